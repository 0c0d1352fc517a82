"""Compiled inner loops.

Everything here works on plain numpy arrays with 0-based indices. The public
modules wrap these with validation and friendlier types.
"""

import numba
import numpy as np

_JIT = dict(nopython=True, cache=True, nogil=True)


@numba.jit(**_JIT)
def pava_increasing(y, w):
    """Weighted isotonic (non-decreasing) least squares by pooling."""
    m = y.shape[0]
    sums = np.empty(m)
    wts = np.empty(m)
    ends = np.empty(m, dtype=np.int64)
    nb = 0
    for i in range(m):
        sums[nb] = w[i] * y[i]
        wts[nb] = w[i]
        ends[nb] = i
        nb += 1
        # merge while the previous block mean is not below the new one
        while nb > 1 and sums[nb - 2] * wts[nb - 1] >= sums[nb - 1] * wts[nb - 2]:
            sums[nb - 2] += sums[nb - 1]
            wts[nb - 2] += wts[nb - 1]
            ends[nb - 2] = ends[nb - 1]
            nb -= 1
    out = np.empty(m)
    start = 0
    for b in range(nb):
        v = sums[b] / wts[b]
        for i in range(start, ends[b] + 1):
            out[i] = v
        start = ends[b] + 1
    return out


@numba.jit(**_JIT)
def fit_cdf_columns(group_of, weights, threshold_stop):
    """Antitonic least-squares fit of every threshold column.

    group_of[i] is the group index of the i-th smallest response.  The
    responses with sorted position < threshold_stop[k] are exactly those
    <= the k-th threshold.  Targets are handled as integer counts so every
    fitted value is an exact pooled fraction C/W.

    Returns CSR-style blocks: col_ptr (len ell+1), block_end (last row index
    of each block, ascending within a column), block_val.
    """
    m = weights.shape[0]
    ell = threshold_stop.shape[0]
    counts = np.zeros(m, dtype=np.int64)
    st_c = np.empty(m, dtype=np.int64)
    st_w = np.empty(m, dtype=np.int64)
    st_lo = np.empty(m, dtype=np.int64)

    cap = max(16, 4 * ell)
    block_end = np.empty(cap, dtype=np.int32)
    block_val = np.empty(cap)
    col_ptr = np.empty(ell + 1, dtype=np.int64)
    col_ptr[0] = 0
    nnz = 0
    pos = 0
    for k in range(ell):
        stop = threshold_stop[k]
        while pos < stop:
            counts[group_of[pos]] += 1
            pos += 1
        # isotonic in reversed row order == antitonic in row order
        nb = 0
        for j in range(m - 1, -1, -1):
            st_c[nb] = counts[j]
            st_w[nb] = weights[j]
            st_lo[nb] = j
            nb += 1
            while nb > 1 and st_c[nb - 2] * st_w[nb - 1] >= st_c[nb - 1] * st_w[nb - 2]:
                st_c[nb - 2] += st_c[nb - 1]
                st_w[nb - 2] += st_w[nb - 1]
                st_lo[nb - 2] = st_lo[nb - 1]
                nb -= 1
        if nnz + nb > cap:
            while nnz + nb > cap:
                cap *= 2
            be = np.empty(cap, dtype=np.int32)
            bv = np.empty(cap)
            be[:nnz] = block_end[:nnz]
            bv[:nnz] = block_val[:nnz]
            block_end = be
            block_val = bv
        # stack top holds the lowest rows; emit in ascending row order
        for b in range(nb - 1, -1, -1):
            idx = nnz + (nb - 1 - b)
            if b == 0:
                block_end[idx] = m - 1
            else:
                block_end[idx] = st_lo[b - 1] - 1
            block_val[idx] = st_c[b] / st_w[b]
        nnz += nb
        col_ptr[k + 1] = nnz
    return col_ptr, block_end[:nnz].copy(), block_val[:nnz].copy()


@numba.jit(**_JIT)
def column_value(col_ptr, block_end, block_val, k, j):
    lo = col_ptr[k]
    hi = col_ptr[k + 1] - 1
    # first block whose end is >= j
    while lo < hi:
        mid = (lo + hi) // 2
        if block_end[mid] >= j:
            hi = mid
        else:
            lo = mid + 1
    return block_val[lo]


@numba.jit(**_JIT)
def dense_columns(col_ptr, block_end, block_val, m, k0, k1):
    out = np.empty((m, k1 - k0))
    for k in range(k0, k1):
        start = 0
        for b in range(col_ptr[k], col_ptr[k + 1]):
            e = block_end[b] + 1
            v = block_val[b]
            for j in range(start, e):
                out[j, k - k0] = v
            start = e
    return out


@numba.jit(**_JIT)
def dense_rows(col_ptr, block_end, block_val, rows):
    ell = col_ptr.shape[0] - 1
    out = np.empty((rows.shape[0], ell))
    for k in range(ell):
        for r in range(rows.shape[0]):
            out[r, k] = column_value(col_ptr, block_end, block_val, k, rows[r])
    return out


@numba.jit(**_JIT)
def row_quantile_indices(col_ptr, block_end, block_val, j, betas, strict):
    """First column index whose value at row j is >= beta (> beta if strict).

    Rows are non-decreasing in the column index, so a binary search works.
    """
    ell = col_ptr.shape[0] - 1
    out = np.empty(betas.shape[0], dtype=np.int64)
    for t in range(betas.shape[0]):
        beta = betas[t]
        lo = 0
        hi = ell - 1
        while lo < hi:
            mid = (lo + hi) // 2
            v = column_value(col_ptr, block_end, block_val, mid, j)
            ok = v > beta if strict else v >= beta
            if ok:
                hi = mid
            else:
                lo = mid + 1
        out[t] = lo
    return out


@numba.jit(**_JIT)
def _fenwick_add(tree, i):
    n = tree.shape[0] - 1
    i += 1
    while i <= n:
        tree[i] += 1
        i += i & (-i)


@numba.jit(**_JIT)
def _fenwick_kth(tree, k, log):
    # smallest 0-based position p with prefix count(p) >= k
    pos = 0
    rem = k
    step = log
    n = tree.shape[0] - 1
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] < rem:
            pos = nxt
            rem -= tree[nxt]
        step >>= 1
    return pos


@numba.jit(**_JIT)
def pooled_quantile_row(a, ranks, offsets, values_by_rank, kmin, kmax):
    """Minimal/maximal sample quantiles of groups a..b for every b >= a.

    ranks[offsets[j]:offsets[j+1]] are the global ranks of group j's
    responses; kmin[w], kmax[w] are the order-statistic indices (1-based)
    for a pool of size w.
    """
    m = offsets.shape[0] - 1
    n = values_by_rank.shape[0]
    tree = np.zeros(n + 1, dtype=np.int64)
    log = 1
    while log * 2 <= n:
        log *= 2
    lo = np.empty(m - a)
    hi = np.empty(m - a)
    w = 0
    for b in range(a, m):
        for i in range(offsets[b], offsets[b + 1]):
            _fenwick_add(tree, ranks[i])
        w += offsets[b + 1] - offsets[b]
        lo[b - a] = values_by_rank[_fenwick_kth(tree, kmin[w], log)]
        hi[b - a] = values_by_rank[_fenwick_kth(tree, kmax[w], log)]
    return lo, hi


@numba.jit(**_JIT)
def smooth_knots(lower, upper, h, q0, omega, tol, max_sweeps):
    """Projected over-relaxed Gauss-Seidel for sum (q[j+1]-q[j])^2 / h[j]."""
    m = lower.shape[0]
    q = q0.copy()
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        delta = 0.0
        for j in range(m):
            num = 0.0
            den = 0.0
            if j > 0:
                num += q[j - 1] / h[j - 1]
                den += 1.0 / h[j - 1]
            if j < m - 1:
                num += q[j + 1] / h[j]
                den += 1.0 / h[j]
            target = num / den
            new = q[j] + omega * (target - q[j])
            if new < lower[j]:
                new = lower[j]
            elif new > upper[j]:
                new = upper[j]
            d = abs(new - q[j])
            if d > delta:
                delta = d
            q[j] = new
        if delta < tol:
            break
    return q, sweeps


@numba.jit(**_JIT)
def pair_sup_stat(cum_counts, cum_truth, exact):
    """max over r <= s of w_rs^{-1/2} * sup_y |pooled count - pooled truth|.

    cum_counts[j, g] and cum_truth[j, g] are prefix sums over groups (row 0
    is zero) of #responses <= y_g and of w_j F_j(y_g) on an increasing grid
    whose last point is >= every response.  With exact=True the grid must be
    all distinct responses and the result is exact for continuous truths;
    otherwise one-cell slack turns it into an upper bound.
    """
    m = cum_counts.shape[0] - 1
    G = cum_counts.shape[1]
    best = 0.0
    for r in range(m):
        for s in range(r, m):
            w = cum_counts[s + 1, G - 1] - cum_counts[r, G - 1]
            top = 0.0
            c_prev = 0.0
            f_prev = 0.0
            for g in range(G):
                c = cum_counts[s + 1, g] - cum_counts[r, g]
                f = cum_truth[s + 1, g] - cum_truth[r, g]
                d = abs(c - f)
                if exact:
                    d2 = abs(c_prev - f)
                else:
                    d2 = max(c - f_prev, f - c_prev)
                if d2 > d:
                    d = d2
                if d > top:
                    top = d
                c_prev = c
                f_prev = f
            val = top / np.sqrt(w)
            if val > best:
                best = val
    return best


@numba.jit(**_JIT)
def cell_sup_error(V, r0, r1, t, T, TL, ix, best):
    """Update best[p] with the sup over cells of |fit - truth| for pair p.

    The fit (1 - t) V[r0] + t V[r1] is constant on each cell [P_c, P_{c+1}),
    so both the truth T at P_c and its left limit TL at P_{c+1} are compared.
    """
    npts = V.shape[1]
    for p in range(len(r0)):
        a, b, tp, u = r0[p], r1[p], t[p], ix[p]
        top = best[p]
        for c in range(npts):
            f = V[a, c]
            if tp != 0.0:
                f = (1.0 - tp) * f + tp * V[b, c]
            d = abs(f - T[u, c])
            if c + 1 < npts:
                d2 = abs(f - TL[u, c + 1])
                if d2 > d:
                    d = d2
            if d > top:
                top = d
        best[p] = top
