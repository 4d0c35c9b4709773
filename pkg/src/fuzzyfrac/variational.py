"""Problem model and residual evaluation for fuzzy fractional variational systems.

A problem couples a Lagrangian over lower/upper endpoint functions with
fractional derivative arguments and boundary-value arguments. This module
evaluates, for a candidate trajectory, the residuals of the interior
optimality equations, of the natural boundary conditions at free
endpoints, and of the three-region system that arises when the
integration interval [A, B] sits strictly inside the trajectory
interval [a, b].
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .frac_ops import (FractionalOrder, GHCase, XGrid, grid_derivative,
                       _fint_left, _fint_right)
from .fuzzy_core import FuzzyNumber, RGrid, validate_stacking

__all__ = [
    "LagrangianPoint",
    "Lagrangian",
    "ProblemSpec",
    "FuzzyTrajectory",
    "ResidualRow",
    "ResidualReport",
    "GridAlignmentError",
    "report_margin",
    "el_residuals",
    "natural_bc_residuals",
    "subinterval_residuals",
    "functional_value",
]

# Lagrangian argument numbering. Arguments 1..7 are the running ones
# (abscissa, endpoint functions, left and right fractional derivatives of
# each), the rest are boundary values. Two-point problems use 11
# arguments; inner-interval problems use 15, with the boundary block
# ordered a, A, B, b.
ARG_NAMES_11 = (None, "x", "yl", "yu", "dcl", "dcu", "drl", "dru",
                "yla", "yua", "ylb", "yub")
ARG_NAMES_15 = (None, "x", "yl", "yu", "dcl", "dcu", "drl", "dru",
                "yla", "yua", "ylA", "yuA", "ylB", "yuB", "ylb", "yub")
ARG_NAMES_5 = (None, "x", "yl", "yu", "dcl", "dcu")

_ALL_FIELDS = ("x", "yl", "yu", "dcl", "dcu", "drl", "dru",
               "yla", "yua", "ylA", "yuA", "ylB", "yuB", "ylb", "yub", "r")


class LagrangianPoint:
    """Argument bundle for Lagrangian evaluation.

    Fields may be scalars or arrays along the x-grid; boundary fields are
    scalars. Unused fields stay None.
    """

    __slots__ = _ALL_FIELDS

    def __init__(self, **kwargs):
        for name in _ALL_FIELDS:
            object.__setattr__(self, name, kwargs.pop(name, None))
        if kwargs:
            raise TypeError("unknown point fields: %s" % ", ".join(sorted(kwargs)))

    def copy(self):
        p = LagrangianPoint()
        for name in _ALL_FIELDS:
            object.__setattr__(p, name, getattr(self, name))
        return p

    def __setattr__(self, name, value):
        object.__setattr__(self, name, value)


def _arg_names(nargs):
    if nargs == 11:
        return ARG_NAMES_11
    if nargs == 15:
        return ARG_NAMES_15
    if nargs == 5:
        return ARG_NAMES_5
    raise ValueError("nargs must be 5, 11 or 15")


def _probe_points(names):
    # deterministic probe values, nothing special about them
    base = {"x": 0.37, "yl": 0.21, "yu": 0.68, "dcl": 0.13, "dcu": 0.41,
            "drl": -0.29, "dru": 0.17, "yla": 0.11, "yua": 0.52,
            "ylA": 0.05, "yuA": 0.45, "ylB": -0.15, "yuB": 0.25,
            "ylb": -0.23, "yub": 0.31}
    points = []
    for s, r in ((1.0, 0.5), (0.6, 0.25), (1.7, 0.75)):
        kw = {k: s * v for k, v in base.items() if k in names}
        kw["r"] = r
        points.append(LagrangianPoint(**kw))
    return points


class Lagrangian:
    """Lower/upper integrand pair with partial derivatives by argument index.

    `eval_lower` and `eval_upper` map a LagrangianPoint to a value
    (elementwise over array fields). Partial derivatives with respect to
    argument i (2 <= i <= nargs) may be supplied analytically through
    `partials_lower` / `partials_upper` dicts; any missing index falls
    back to central finite differences with step 1e-6 * max(1, |arg|).
    Supplied partials are cross-checked against the finite-difference
    values at construction and rejected on disagreement.
    """

    def __init__(self, eval_lower, eval_upper, partials_lower=None,
                 partials_upper=None, nargs=11, fd_step=1e-6,
                 cross_validate=True):
        self.nargs = int(nargs)
        self.arg_names = _arg_names(self.nargs)
        self.eval_lower = eval_lower
        self.eval_upper = eval_upper
        self.fd_step = float(fd_step)
        self._partials = {"lower": dict(partials_lower or {}),
                          "upper": dict(partials_upper or {})}
        for which, table in self._partials.items():
            for i in table:
                if not 2 <= int(i) <= self.nargs:
                    raise ValueError("partial index %r out of range for %d arguments"
                                     % (i, self.nargs))
        if cross_validate:
            self._cross_validate()

    def evaluate(self, which, point):
        fn = self.eval_lower if which == "lower" else self.eval_upper
        return fn(point)

    def partial(self, which, i, point):
        """Partial derivative of the chosen bound with respect to argument i."""
        i = int(i)
        if not 2 <= i <= self.nargs:
            raise ValueError("partial index %d out of range" % i)
        fn = self._partials[which].get(i)
        if fn is not None:
            return fn(point)
        return self._fd_partial(which, self.arg_names[i], point)

    def _fd_partial(self, which, name, point):
        v = getattr(point, name)
        if v is None:
            raise ValueError("point is missing argument %r" % name)
        v = np.asarray(v, dtype=float)
        step = self.fd_step * np.maximum(1.0, np.abs(v))
        pp = point.copy()
        pm = point.copy()
        setattr(pp, name, v + step)
        setattr(pm, name, v - step)
        ev = self.eval_lower if which == "lower" else self.eval_upper
        return (ev(pp) - ev(pm)) / (2.0 * step)

    def _cross_validate(self, rel_tol=1e-5):
        points = _probe_points([n for n in self.arg_names if n])
        for which, table in self._partials.items():
            for i, fn in table.items():
                name = self.arg_names[int(i)]
                for pt in points:
                    got = float(np.asarray(fn(pt)))
                    ref = float(np.asarray(self._fd_partial(which, name, pt)))
                    if abs(got - ref) > rel_tol * max(1.0, abs(got), abs(ref)):
                        raise ValueError(
                            "analytic partial %d of the %s bound disagrees with "
                            "finite differences (%g vs %g)" % (i, which, got, ref))


class _FreeMarker:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Free"


FREE = _FreeMarker()


def _as_mode(value, rgrid, label):
    """Normalize a boundary mode: None/FREE stay free, fuzzy values are fixed."""
    if value is None or value is FREE:
        return FREE
    if isinstance(value, FuzzyNumber):
        if value.rgrid != rgrid:
            raise ValueError("%s boundary value lives on a different r-grid" % label)
        rep = validate_stacking(value)
        if not rep.valid:
            raise ValueError("%s boundary value fails stacking: %s" % (label, rep.failed))
        return value
    raise TypeError("%s must be FREE, None, or a FuzzyNumber" % label)


def is_free(mode):
    return mode is FREE


class ProblemSpec:
    """Fixed-interval fuzzy fractional variational problem.

    Boundary modes `ya`, `yb` (and `yA`, `yB` when an inner interval is
    present) are either FREE or a FuzzyNumber on the problem's r-grid.
    """

    def __init__(self, alpha, beta, xgrid, rgrid, lagrangian,
                 ya=FREE, yb=FREE, inner=None, yA=FREE, yB=FREE,
                 gh_case=GHCase(1), closed_form=None):
        self.alpha = alpha if isinstance(alpha, FractionalOrder) else FractionalOrder(alpha)
        self.beta = beta if isinstance(beta, FractionalOrder) else FractionalOrder(beta)
        if not isinstance(xgrid, XGrid):
            raise TypeError("xgrid must be an XGrid")
        if not isinstance(rgrid, RGrid):
            raise TypeError("rgrid must be an RGrid")
        self.xgrid = xgrid
        self.rgrid = rgrid
        self.lagrangian = lagrangian
        self.gh_case = gh_case if isinstance(gh_case, GHCase) else GHCase(gh_case)
        self.ya = _as_mode(ya, rgrid, "ya")
        self.yb = _as_mode(yb, rgrid, "yb")
        if inner is not None:
            A, B = float(inner[0]), float(inner[1])
            if not (xgrid.a <= A < B <= xgrid.b):
                raise ValueError("inner interval must satisfy a <= A < B <= b")
            self.inner = (A, B)
        else:
            self.inner = None
        self.yA = _as_mode(yA, rgrid, "yA")
        self.yB = _as_mode(yB, rgrid, "yB")
        expected = 15 if self.inner is not None else 11
        if lagrangian.nargs != expected:
            raise ValueError("lagrangian takes %d arguments, problem needs %d"
                             % (lagrangian.nargs, expected))
        self.closed_form = closed_form

    def replaced(self, **kwargs):
        """Copy with selected fields replaced."""
        init = dict(alpha=self.alpha, beta=self.beta, xgrid=self.xgrid,
                    rgrid=self.rgrid, lagrangian=self.lagrangian,
                    ya=self.ya, yb=self.yb, inner=self.inner,
                    yA=self.yA, yB=self.yB, gh_case=self.gh_case,
                    closed_form=self.closed_form)
        init.update(kwargs)
        return ProblemSpec(**init)


class FuzzyTrajectory:
    """Lower/upper endpoint functions per r-level over an x-grid."""

    def __init__(self, xgrid, rgrid, lower, upper, gh_case=GHCase(1),
                 check=True, tol=1e-9):
        lower = np.array(lower, dtype=float, copy=True)
        upper = np.array(upper, dtype=float, copy=True)
        shape = (rgrid.n, xgrid.n)
        if lower.shape != shape or upper.shape != shape:
            raise ValueError("trajectory arrays must be (n_levels, n_nodes)")
        if check and np.any(lower > upper + tol):
            raise ValueError("lower trajectory exceeds upper trajectory")
        lower.setflags(write=False)
        upper.setflags(write=False)
        self.xgrid = xgrid
        self.rgrid = rgrid
        self.lower = lower
        self.upper = upper
        self.gh_case = gh_case if isinstance(gh_case, GHCase) else GHCase(gh_case)

    def level_values(self, r):
        idx = self.rgrid.index_of(r)
        if idx is None:
            raise ValueError("level %r is not on the trajectory r-grid" % r)
        return self.lower[idx], self.upper[idx]

    def stacking_at_nodes(self, tol=0.0):
        """Per-node stacking check across levels: (all_ok, failing node indices)."""
        bad = []
        for j in range(self.xgrid.n):
            if not validate_stacking(self.lower[:, j], self.upper[:, j], tol=tol).valid:
                bad.append(j)
        return (not bad), tuple(bad)


@dataclass(frozen=True)
class ResidualRow:
    equation_id: str
    r: float
    max_abs: float
    l2: float
    passed: bool


@dataclass
class ResidualReport:
    """Residual norms per equation and level, with a pass verdict."""

    rows: list = field(default_factory=list)
    excluded_nodes: tuple = ()
    tolerance: float = 0.0
    note: str = ""

    @property
    def max_abs(self):
        return max((row.max_abs for row in self.rows), default=0.0)

    def passed(self):
        return all(row.passed for row in self.rows)

    def by_id(self, equation_id):
        return [row for row in self.rows if row.equation_id == equation_id]


class GridAlignmentError(ValueError):
    """An inner boundary does not coincide with a grid node."""


# ------------------------------------------------------------------
# assembly helpers (shared with the solver module)

# (equation id, bound, index of the y partial, of the left-derivative
# partial, of the right-derivative partial)
_EL_EQUATIONS = (
    ("el_lower_yl", "lower", 2, 4, 6),
    ("el_upper_yl", "upper", 2, 4, 6),
    ("el_lower_yu", "lower", 3, 5, 7),
    ("el_upper_yu", "upper", 3, 5, 7),
)


def _field(value, n):
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        # read-only view; cheaper than materializing a constant array
        return np.broadcast_to(v, (n,))
    if v.shape != (n,):
        raise ValueError("field has wrong length")
    return v


def _point_fields(p, yl, yu, r, subinterval=False, iA=None, iB=None):
    n = p.xgrid.n
    h = p.xgrid.h
    alpha = p.alpha.alpha
    beta = p.beta.alpha
    dcl = _fint_left(grid_derivative(yl, h), h, 1.0 - alpha)
    dcu = _fint_left(grid_derivative(yu, h), h, 1.0 - alpha)
    drl = -_fint_right(grid_derivative(yl, h), h, 1.0 - beta)
    dru = -_fint_right(grid_derivative(yu, h), h, 1.0 - beta)
    kw = dict(x=p.xgrid.nodes, yl=yl, yu=yu, dcl=dcl, dcu=dcu, drl=drl, dru=dru,
              yla=yl[0], yua=yu[0], ylb=yl[n - 1], yub=yu[n - 1], r=r)
    if subinterval:
        kw.update(ylA=yl[iA], yuA=yu[iA], ylB=yl[iB], yuB=yu[iB])
    return LagrangianPoint(**kw)


def _check_finite(arr, label, r):
    if not np.all(np.isfinite(arr)):
        j = int(np.nonzero(~np.isfinite(np.atleast_1d(arr)))[0][0])
        raise ValueError("non-finite %s at node %d, level r=%g" % (label, j, r))


def _el_arrays(p, yl, yu, r):
    """Residual arrays of the four interior equations at one level."""
    n = p.xgrid.n
    h = p.xgrid.h
    alpha = p.alpha.alpha
    beta = p.beta.alpha
    point = _point_fields(p, yl, yu, r)
    lag = p.lagrangian
    out = {}
    for eq_id, which, iy, idc, idr in _EL_EQUATIONS:
        f2 = _field(lag.partial(which, iy, point), n)
        f4 = _field(lag.partial(which, idc, point), n)
        f6 = _field(lag.partial(which, idr, point), n)
        rr = -grid_derivative(_fint_right(f4, h, 1.0 - alpha), h)
        ll = grid_derivative(_fint_left(f6, h, 1.0 - beta), h)
        res = f2 + rr + ll
        _check_finite(res, "residual of %s" % eq_id, r)
        out[eq_id] = res
    return out


def _extrap_left(F):
    # linear extrapolation to the first node from the two nearest interior ones
    return 2.0 * F[1] - F[2]


def _extrap_right(F):
    return 2.0 * F[-2] - F[-3]


def _nbc_rows(p, yl, yu, r):
    """Natural boundary condition rows at one level: list of (id, value).

    Bracket terms are fractional-integral fields; their endpoint values
    come from linear extrapolation off the two nearest interior nodes,
    because the quadrature value at an operator's own anchor is an empty
    sum while the true one-sided limit need not vanish.
    """
    n = p.xgrid.n
    h = p.xgrid.h
    x = p.xgrid.nodes
    alpha = p.alpha.alpha
    beta = p.beta.alpha
    point = _point_fields(p, yl, yu, r)
    lag = p.lagrangian

    def fld(which, i):
        return _field(lag.partial(which, i, point), n)

    def bracket(which, idc, idr):
        F = _fint_right(fld(which, idc), h, 1.0 - alpha)
        G = _fint_left(fld(which, idr), h, 1.0 - beta)
        at_a = _extrap_left(F) - _extrap_left(G)
        at_b = _extrap_right(F) - _extrap_right(G)
        return at_a, at_b

    rows = []
    need_a = is_free(p.ya)
    need_b = is_free(p.yb)
    if not (need_a or need_b):
        return rows
    for fam, idc, idr, i_a, i_b in (("yl", 4, 6, 8, 10), ("yu", 5, 7, 9, 11)):
        for which in ("lower", "upper"):
            at_a, at_b = bracket(which, idc, idr)
            if need_a:
                val = np.trapezoid(fld(which, i_a), x) - at_a
                rows.append(("nbc_a_%s_%s" % (which, fam), float(val)))
            if need_b:
                val = np.trapezoid(fld(which, i_b), x) + at_b
                rows.append(("nbc_b_%s_%s" % (which, fam), float(val)))
    for _, v in rows:
        if not np.isfinite(v):
            raise ValueError("non-finite boundary condition row at level r=%g" % r)
    return rows


# ------------------------------------------------------------------
# public residual evaluation


def _check_match(p, y):
    if y.xgrid != p.xgrid:
        raise ValueError("trajectory x-grid does not match the problem grid")
    if y.rgrid != p.rgrid:
        raise ValueError("trajectory r-grid does not match the problem grid")


def _window_rows(eq_id, res, window, r, tol):
    v = np.abs(res[window])
    max_abs = float(v.max()) if v.size else 0.0
    l2 = float(np.linalg.norm(res[window])) if v.size else 0.0
    return ResidualRow(eq_id, float(r), max_abs, l2, max_abs <= tol)


def report_margin(n):
    """Nodes dropped at each end of a residual report window.

    At least three nodes: the five-point stencils at nodes 2 and n-3
    read the operator anchor nodes, which hold an empty-sum zero where
    the true one-sided limit is finite. Beyond that the margin grows
    with the grid, one node per 64, so the window covers a fixed
    fraction of the span; the optimality fields of the continuous
    problem blow up near the endpoints as the orders approach one, and
    a margin that shrank with h would let that layer dominate the
    report.
    """
    return max(3, int(np.ceil(n / 64.0)))


def el_residuals(p, y, tol=1e-6):
    """Interior optimality equation residuals of a trajectory.

    Four equations per level are evaluated on interior nodes, excluding
    a small margin at each end where the discrete fractional operators
    lose accuracy against the kernel singularities.
    """
    _check_match(p, y)
    n = p.xgrid.n
    if n < 9:
        raise ValueError("need at least 9 nodes for a nonempty report window")
    m = report_margin(n)
    window = slice(m, n - m)
    excluded = tuple(range(m)) + tuple(range(n - m, n))
    report = ResidualReport(excluded_nodes=excluded, tolerance=tol)
    for k, r in enumerate(p.rgrid.values):
        arrays = _el_arrays(p, y.lower[k], y.upper[k], r)
        for eq_id, res in arrays.items():
            report.rows.append(_window_rows(eq_id, res, window, r, tol))
    return report


def natural_bc_residuals(p, y, tol=1e-6):
    """Natural boundary condition residuals at the free endpoints.

    Four rows per free endpoint and level: the two boundary-partial
    families against the lower and upper integrand. Returns an empty
    report when both endpoints are fixed.
    """
    _check_match(p, y)
    report = ResidualReport(tolerance=tol)
    if not (is_free(p.ya) or is_free(p.yb)):
        report.note = "all endpoints fixed"
        return report
    for k, r in enumerate(p.rgrid.values):
        for row_id, val in _nbc_rows(p, y.lower[k], y.upper[k], r):
            a = abs(val)
            report.rows.append(ResidualRow(row_id, float(r), a, a, a <= tol))
    return report


def functional_value(p, y):
    """Levelwise value of the problem functional along a trajectory."""
    _check_match(p, y)
    x = p.xgrid.nodes
    iA, iB = 0, p.xgrid.n - 1
    sub = p.inner is not None
    if sub:
        iA, iB = _inner_indices(p)
    Jl = np.empty(p.rgrid.n)
    Ju = np.empty(p.rgrid.n)
    for k, r in enumerate(p.rgrid.values):
        point = _point_fields(p, y.lower[k], y.upper[k], r,
                              subinterval=sub, iA=iA, iB=iB)
        lo = _field(p.lagrangian.evaluate("lower", point), x.size)
        up = _field(p.lagrangian.evaluate("upper", point), x.size)
        _check_finite(lo, "lower integrand", r)
        _check_finite(up, "upper integrand", r)
        Jl[k] = np.trapezoid(lo[iA:iB + 1], x[iA:iB + 1])
        Ju[k] = np.trapezoid(up[iA:iB + 1], x[iA:iB + 1])
    result = FuzzyNumber(p.rgrid, Jl, Ju, check=False)
    rep = validate_stacking(Jl, Ju, tol=1e-12)
    if np.any(Jl > Ju) or not rep.valid:
        warnings.warn("functional value fails the stacking checks", stacklevel=2)
    return result


# ------------------------------------------------------------------
# inner-interval problem


def _inner_indices(p):
    if p.inner is None:
        raise ValueError("problem has no inner interval")
    A, B = p.inner
    nodes = p.xgrid.nodes
    atol = 1e-12 * max(1.0, abs(p.xgrid.a), abs(p.xgrid.b))
    out = []
    for val, label in ((A, "A"), (B, "B")):
        idx = int(np.argmin(np.abs(nodes - val)))
        if abs(nodes[idx] - val) > atol:
            raise GridAlignmentError("%s=%g does not lie on a grid node" % (label, val))
        out.append(idx)
    return out[0], out[1]


def _right_op_field(f, h, order, i_hi):
    """Right RL derivative anchored at node i_hi, on nodes 0..i_hi."""
    if i_hi < 4:
        return np.zeros(i_hi + 1)
    sub = f[:i_hi + 1]
    return -grid_derivative(_fint_right(sub, h, 1.0 - order), h)


def _left_op_field(f, h, order, i_lo, n):
    """Left RL derivative anchored at node i_lo, on nodes i_lo..n-1."""
    if n - i_lo < 5:
        return np.zeros(n - i_lo)
    sub = f[i_lo:]
    return grid_derivative(_fint_left(sub, h, 1.0 - order), h)


def subinterval_residuals(p, y, tol=1e-6):
    """Residuals of the three-region optimality system for an inner interval.

    The integration interval [A, B] lies inside the trajectory interval
    [a, b]; both inner boundaries must coincide with grid nodes. Interior
    equations split into operator-difference equations on the outer
    regions and the full equations (with operators anchored at A and B)
    on the middle one; boundary rows appear for every free point among
    a, A, B, b. Rows are grouped by region in the report.
    """
    _check_match(p, y)
    if p.inner is None:
        raise ValueError("problem declares no inner interval")
    iA, iB = _inner_indices(p)
    n = p.xgrid.n
    h = p.xgrid.h
    x = p.xgrid.nodes
    alpha = p.alpha.alpha
    beta = p.beta.alpha
    lag = p.lagrangian

    win_aA = range(3, iA - 2)           # absolute node indices, ends excluded
    win_AB = range(iA + 3, iB - 2)
    win_Bb = range(iB + 3, n - 3)
    included = set(win_aA) | set(win_AB) | set(win_Bb)
    excluded = tuple(sorted(set(range(n)) - included))
    report = ResidualReport(excluded_nodes=excluded, tolerance=tol,
                            note="regions: [a,A], [A,B], [B,b]")

    degenerate_a = iA == 0
    degenerate_b = iB == n - 1

    for k, r in enumerate(p.rgrid.values):
        yl, yu = y.lower[k], y.upper[k]
        point = _point_fields(p, yl, yu, r, subinterval=True, iA=iA, iB=iB)

        def fld(which, i):
            return _field(lag.partial(which, i, point), n)

        # interior rows, all four bound/family combinations
        for eq_tag, which, iy, idc, idr in _EL_EQUATIONS:
            fam = eq_tag.split("_")[-1]
            f4 = fld(which, idc)
            f6 = fld(which, idr)
            DB4 = _right_op_field(f4, h, alpha, iB)
            DA4 = np.zeros(iA + 1) if degenerate_a else _right_op_field(f4, h, alpha, iA)
            LA6 = _left_op_field(f6, h, beta, iA, n)
            LB6 = np.zeros(n - iB) if degenerate_b else _left_op_field(f6, h, beta, iB, n)

            if not degenerate_a and len(win_aA):
                res = DB4[:iA + 1] - DA4
                idx = np.fromiter(win_aA, dtype=int)
                report.rows.append(_window_rows(
                    "sub_aA_%s_%s" % (which, fam), res, idx, r, tol))
            if len(win_AB):
                f2 = fld(which, iy)
                res = f2[iA:iB + 1] + DB4[iA:] + LA6[:iB - iA + 1]
                _check_finite(res, "sub_AB residual", r)
                idx = np.fromiter(win_AB, dtype=int) - iA
                report.rows.append(_window_rows(
                    "sub_AB_%s_%s" % (which, fam),
                    res, idx, r, tol))
            if not degenerate_b and len(win_Bb):
                res = LA6[iB - iA:] - LB6
                idx = np.fromiter(win_Bb, dtype=int) - iB
                report.rows.append(_window_rows(
                    "sub_Bb_%s_%s" % (which, fam), res, idx, r, tol))

        # boundary rows; integrals run over [A, B] only
        def trapAB(which, i):
            return float(np.trapezoid(fld(which, i)[iA:iB + 1], x[iA:iB + 1]))

        def right_int(f, i_hi):
            # right fractional integral anchored at node i_hi, nodes 0..i_hi
            if i_hi < 2:
                return None
            return _fint_right(f[:i_hi + 1], h, 1.0 - alpha)

        def left_int(f, i_lo):
            if n - i_lo < 3:
                return None
            return _fint_left(f[i_lo:], h, 1.0 - beta)

        for which in ("lower", "upper"):
            for fam, idc, idr, i_at_a, i_at_A, i_at_B, i_at_b in (
                    ("yl", 4, 6, 8, 10, 12, 14), ("yu", 5, 7, 9, 11, 13, 15)):
                f_dc = fld(which, idc)
                f_dr = fld(which, idr)
                IB = right_int(f_dc, iB)
                IA = right_int(f_dc, iA)
                GA = left_int(f_dr, iA)
                GB = left_int(f_dr, iB)
                if is_free(p.ya):
                    br = (IB[0] if IB is not None else 0.0) - \
                         (IA[0] if IA is not None else 0.0)
                    val = trapAB(which, i_at_a) - br
                    report.rows.append(ResidualRow(
                        "sub_bc_a_%s_%s" % (which, fam), float(r),
                        abs(val), abs(val), abs(val) <= tol))
                if is_free(p.yA):
                    # both operators are at their own anchor here
                    left_part = _extrap_right(IA) if IA is not None else 0.0
                    right_part = _extrap_left(GA) if GA is not None else 0.0
                    val = trapAB(which, i_at_A) - (left_part - right_part)
                    report.rows.append(ResidualRow(
                        "sub_bc_A_%s_%s" % (which, fam), float(r),
                        abs(val), abs(val), abs(val) <= tol))
                if is_free(p.yB):
                    left_part = _extrap_left(GB) if GB is not None else 0.0
                    right_part = _extrap_right(IB) if IB is not None else 0.0
                    val = trapAB(which, i_at_B) - (left_part - right_part)
                    report.rows.append(ResidualRow(
                        "sub_bc_B_%s_%s" % (which, fam), float(r),
                        abs(val), abs(val), abs(val) <= tol))
                if is_free(p.yb):
                    br = (GA[-1] if GA is not None else 0.0) - \
                         (GB[-1] if GB is not None else 0.0)
                    val = trapAB(which, i_at_b) - br
                    report.rows.append(ResidualRow(
                        "sub_bc_b_%s_%s" % (which, fam), float(r),
                        abs(val), abs(val), abs(val) <= tol))
    return report
