"""Why a monotone quantile fit needs a band rather than a single vector.

Two observations, the one at the smaller covariate having the larger
response. Every constant vector between the two responses minimizes the
median pinball risk, and no increasing vector does.
"""

import numpy as np

from monodist import DesignGroups, fit_cdf_family, pinball_risk, quantile_band
from monodist.isoreg import PinballOracle, check_membership


def main():
    groups = DesignGroups.from_arrays(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    fit = fit_cdf_family(groups)
    print("thresholds:", fit.thresholds)
    print("fitted CDF values (rows = x, columns = thresholds):")
    print(fit.values)

    band = quantile_band(groups, 0.5)
    print(f"median band: lower={band.lower} upper={band.upper}")

    oracle = PinballOracle(groups, 0.5)
    for q in ([0.0, 0.0], [0.25, 0.25], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0]):
        risk = pinball_risk(groups, q, 0.5).value
        print(f"q={q}: risk={risk:.3f} minimizer={check_membership(oracle, q)}")


if __name__ == "__main__":
    main()
