"""Built-in problems with registered closed-form solutions.

Three ready-made definitions cover the main solver paths:

* ``example2``: both endpoints free, quadratic integrand that tracks the
  boundary values themselves; linear closed form at order one.
* ``example3``: fixed fuzzy start, free terminal point on a fuzzy curve,
  cubically weighted kinetic integrand; terminal point sqrt(2) at order one.
* ``quadratic-crisp``: crisp fixed-fixed kinetic energy, straight-line
  solution, handy as a degenerate regression case.
"""

import numpy as np

from .frac_ops import XGrid
from .fuzzy_core import FuzzyNumber, RGrid
from .transversality import FreeEndpointProblem, FuzzyCurve
from .variational import FREE, Lagrangian, ProblemSpec

__all__ = [
    "BUILTIN_NAMES",
    "example2_problem",
    "example3_problem",
    "quadratic_crisp_problem",
    "builtin_problem",
]

BUILTIN_NAMES = ("example2", "example3", "quadratic-crisp")


def _example2_lagrangian():
    def lower(p):
        return 0.5 * (p.dcl ** 2 + (3.0 - p.r) * p.yla ** 2
                      + 3.0 * (p.ylb - 1.0) ** 2)

    def upper(p):
        return 0.5 * (p.dcu ** 2 + (1.0 + p.r) * p.yua ** 2
                      + 3.0 * (p.yub - 1.0) ** 2)

    zero = lambda p: 0.0
    pl = {2: zero, 3: zero, 4: lambda p: p.dcl, 5: zero, 6: zero, 7: zero,
          8: lambda p: (3.0 - p.r) * p.yla, 9: zero,
          10: lambda p: 3.0 * (p.ylb - 1.0), 11: zero}
    pu = {2: zero, 3: zero, 4: zero, 5: lambda p: p.dcu, 6: zero, 7: zero,
          8: zero, 9: lambda p: (1.0 + p.r) * p.yua,
          10: zero, 11: lambda p: 3.0 * (p.yub - 1.0)}
    return Lagrangian(lower, upper, pl, pu, nargs=11)


def _example2_closed_form(r, x):
    x = np.asarray(x, dtype=float)
    lo = ((-3.0 * r + 9.0) * x + 3.0) / (-4.0 * r + 15.0)
    up = ((3.0 * r + 3.0) * x + 3.0) / (4.0 * r + 7.0)
    return lo, up


def example2_problem(alpha, beta=None, a=0.0, b=1.0, nodes=201,
                     rgrid=None, gh_case=1):
    """Both-endpoints-free quadratic boundary-tracking problem."""
    rgrid = rgrid or RGrid(11)
    return ProblemSpec(alpha=alpha, beta=alpha if beta is None else beta,
                       xgrid=XGrid(a, b, nodes), rgrid=rgrid,
                       lagrangian=_example2_lagrangian(),
                       ya=FREE, yb=FREE, gh_case=gh_case,
                       closed_form=_example2_closed_form)


def _quadratic_crisp_lagrangian():
    def both(p):
        return 0.25 * (p.dcl ** 2 + p.dcu ** 2)

    zero = lambda p: 0.0
    part = {2: zero, 3: zero, 4: lambda p: 0.5 * p.dcl,
            5: lambda p: 0.5 * p.dcu, 6: zero, 7: zero,
            8: zero, 9: zero, 10: zero, 11: zero}
    return Lagrangian(both, both, dict(part), dict(part), nargs=11)


def quadratic_crisp_problem(alpha, beta=None, a=0.0, b=1.0, nodes=201,
                            rgrid=None, gh_case=1):
    """Crisp kinetic-energy problem, fixed ends, straight-line solution."""
    rgrid = rgrid or RGrid(11)
    return ProblemSpec(alpha=alpha, beta=alpha if beta is None else beta,
                       xgrid=XGrid(a, b, nodes), rgrid=rgrid,
                       lagrangian=_quadratic_crisp_lagrangian(),
                       ya=FuzzyNumber.crisp(0.0, rgrid),
                       yb=FuzzyNumber.crisp(1.0, rgrid),
                       gh_case=gh_case,
                       closed_form=lambda r, x: (np.asarray(x, float),
                                                 np.asarray(x, float)))


def _example3_lagrangian():
    def lower(p):
        return p.dcl ** 2 * p.x ** 3

    def upper(p):
        return p.dcu ** 2 * p.x ** 3

    zero = lambda p: 0.0
    pl = {2: zero, 3: zero, 4: lambda p: 2.0 * p.dcl * p.x ** 3, 5: zero}
    pu = {2: zero, 3: zero, 4: zero, 5: lambda p: 2.0 * p.dcu * p.x ** 3}
    return Lagrangian(lower, upper, pl, pu, nargs=5)


def _example3_closed_form(r, x):
    x = np.asarray(x, dtype=float)
    lo = 2.0 * (r + 1.0) / x ** 2 - r - 3.0
    up = 2.0 * (3.0 - r) / x ** 2 + r - 5.0
    return lo, up


def example3_problem(alpha=1.0, a=1.0, bracket=(1.1, 2.0), rgrid=None):
    """Free terminal point on a fuzzy curve, cubically weighted integrand."""
    rgrid = rgrid or RGrid(11)
    ya = FuzzyNumber.triangular(-1.0, 0.0, 1.0, rgrid)
    curve = FuzzyCurve(
        lower=lambda r, x: (r + 1.0) / x ** 2 - 4.0 + r,
        upper=lambda r, x: (3.0 - r) / x ** 2 - 4.0 - r,
        dlower=lambda r, x: -2.0 * (r + 1.0) / x ** 3,
        dupper=lambda r, x: -2.0 * (3.0 - r) / x ** 3)
    return FreeEndpointProblem(alpha=alpha, a=a, ya=ya, curve=curve,
                               bracket=bracket,
                               lagrangian=_example3_lagrangian(),
                               closed_form=_example3_closed_form)


def builtin_problem(name, **kwargs):
    """Instantiate a registry problem by name."""
    if name == "example2":
        return example2_problem(**kwargs)
    if name == "example3":
        return example3_problem(**kwargs)
    if name == "quadratic-crisp":
        return quadratic_crisp_problem(**kwargs)
    raise ValueError("unknown builtin problem %r (have: %s)"
                     % (name, ", ".join(BUILTIN_NAMES)))
