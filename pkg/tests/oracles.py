"""Reference values for the test suite.

Everything here is computed independently of the package: power-rule
images of the fractional operators, closed-form solutions of the two
worked problems, and an exact hypergeometric solution of the fractional
boundary-tracking problem. Tests compare solver output against these.
"""

import numpy as np
from scipy.special import gamma, hyp2f1


def boundary_tracking_lower(r, x):
    """Lower bound of the classical boundary-tracking solution on [0, 1]."""
    x = np.asarray(x, dtype=float)
    return ((9.0 - 3.0 * r) * x + 3.0) / (15.0 - 4.0 * r)


def boundary_tracking_upper(r, x):
    x = np.asarray(x, dtype=float)
    return ((3.0 * r + 3.0) * x + 3.0) / (4.0 * r + 7.0)


def curve_endpoint_lower(r, x):
    """Lower bound of the free-endpoint solution on [1, sqrt(2)]."""
    x = np.asarray(x, dtype=float)
    return 2.0 * (r + 1.0) / x ** 2 - r - 3.0


def curve_endpoint_upper(r, x):
    x = np.asarray(x, dtype=float)
    return 2.0 * (3.0 - r) / x ** 2 + r - 5.0


def power_derivative_image(p, mu, t):
    """Order-mu fractional derivative of t**p, t measured from the anchor."""
    t = np.asarray(t, dtype=float)
    return gamma(p + 1.0) / gamma(p + 1.0 - mu) * t ** (p - mu)


def power_integral_image(p, mu, t):
    """Order-mu fractional integral of t**p, t measured from the anchor."""
    t = np.asarray(t, dtype=float)
    return gamma(p + 1.0) / gamma(p + 1.0 + mu) * t ** (p + mu)


def fractional_tracking_level(alpha, r, x):
    """Exact level bounds of the order-alpha boundary-tracking problem.

    Only valid for alpha > 1/2. Obtained by collapsing the optimality
    system to a single integral equation whose solution is a
    hypergeometric series; the endpoint value x = 1 converges because
    2*alpha - 1 > 0.
    """
    x = np.asarray(x, dtype=float)
    out = []
    for acoef in (3.0 - r, 1.0 + r):
        kconst = 1.0 / (gamma(alpha) * (2.0 * alpha - 1.0))
        y0 = 3.0 / (3.0 + acoef * (3.0 * kconst + gamma(alpha)) / gamma(alpha))
        c = acoef * y0 / gamma(alpha)
        series = hyp2f1(1.0 - alpha, 1.0, alpha + 1.0, x)
        out.append(y0 + c * x ** alpha * series / gamma(alpha + 1.0))
    return out[0], out[1]


def sup_distance(xgrid_vals, rvals, lower, upper, ref_lower, ref_upper):
    """Worst node error of a levelwise table against closed-form bounds."""
    worst = 0.0
    for k, r in enumerate(rvals):
        worst = max(worst, float(np.max(np.abs(lower[k] - ref_lower(r, xgrid_vals)))))
        worst = max(worst, float(np.max(np.abs(upper[k] - ref_upper(r, xgrid_vals)))))
    return worst
