"""Monte Carlo view of the two exponential tail inequalities.

The first table compares exceedance frequencies of the heterogeneous
empirical process with its bound. The second does the same for the maximal
deviation of a running mean of +-1/2 increments.
"""

import numpy as np

from monodist.sim import inequalities as ineq


def main():
    k = 100
    dists, mean_cdf = ineq.heterogeneous_uniforms(k)
    est = ineq.dkw_mc(k, dists, [0.5, 1.0, 1.5, 2.0], 20_000, seed=0, mean_cdf=mean_cdf)
    print("eta   freq      classical  bound")
    for e, f in zip(est.eta, est.freq):
        print(f"{e:.1f}  {f:.5f}  {ineq.classical_dkw_bound(e):.5f}    {ineq.dkw_bound(e):.3f}")

    c_prime = 1.5
    C_prime = ineq.maximal_constant(ineq.hoeffding_c(0.5), c_prime, 2.0)
    print(f"\nmaximal inequality constant: {C_prime:.2f}")
    eta = np.array([0.1, 0.2, 0.3])
    for n_o in (20, 50):
        est = ineq.lln_exp_mc(n_o, eta, 5000, seed=n_o, n_max=2000)
        bound = ineq.lln_bound(n_o, eta, c_prime, C_prime)
        for e, f, b in zip(eta, est.freq, bound):
            print(f"n_o={n_o} eta={e:.1f}: freq={f:.4f} bound={min(b, 1.0):.4f}")


if __name__ == "__main__":
    main()
