"""Fuzzy numbers represented by stacked r-level intervals.

A fuzzy quantity is stored as two arrays of interval endpoints, one pair
per membership level r on a shared grid of levels. All arithmetic is
levelwise interval arithmetic; validity of a stack of intervals as a
fuzzy number is checked by `validate_stacking`.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RGrid",
    "FuzzyNumber",
    "TriangularFuzzyNumber",
    "StackingReport",
    "GHDifferenceReport",
    "validate_stacking",
    "add",
    "scale",
    "product",
    "gh_difference",
    "hausdorff",
    "compare",
    "STRICTLY_LESS",
    "LESS_EQUAL",
    "APPROX_EQUAL",
    "GREATER_EQUAL",
    "STRICTLY_GREATER",
    "NONCOMPARABLE",
]

DEFAULT_TOL = 1e-12

STRICTLY_LESS = "strictly_less"
LESS_EQUAL = "less_equal"
APPROX_EQUAL = "approx_equal"
GREATER_EQUAL = "greater_equal"
STRICTLY_GREATER = "strictly_greater"
NONCOMPARABLE = "noncomparable"


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class RGrid:
    """Ascending membership levels in [0, 1].

    Constructed either from a level count (uniform grid, default 11 levels)
    or from an explicit ascending array. The grid must start at 0 and end
    at 1 so that the core level and the support are always present.
    """

    def __init__(self, levels=11):
        if np.isscalar(levels):
            vals = np.linspace(0.0, 1.0, int(levels))
        else:
            vals = np.asarray(levels, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("rgrid needs at least two levels")
        if np.any(np.diff(vals) <= 0.0):
            raise ValueError("rgrid levels must be strictly ascending")
        if vals[0] != 0.0 or vals[-1] != 1.0:
            raise ValueError("rgrid must run from 0 to 1 inclusive")
        self._values = _frozen(vals)

    @property
    def values(self):
        return self._values

    @property
    def n(self):
        return self._values.size

    def index_of(self, r, tol=1e-12):
        """Index of the grid level equal to r, or None."""
        hits = np.nonzero(np.abs(self._values - r) <= tol)[0]
        return int(hits[0]) if hits.size else None

    def __eq__(self, other):
        if not isinstance(other, RGrid):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def __len__(self):
        return self._values.size

    def __repr__(self):
        return "RGrid(%d levels on [0, 1])" % self.n


class FuzzyNumber:
    """Interval endpoints per r-level on an RGrid.

    `lower[i] <= upper[i]` is required at every level; the cross-level
    stacking conditions are not enforced here, use `validate_stacking`.
    """

    def __init__(self, rgrid, lower, upper, check=True):
        if not isinstance(rgrid, RGrid):
            raise TypeError("rgrid must be an RGrid")
        lower = _frozen(lower)
        upper = _frozen(upper)
        if lower.shape != (rgrid.n,) or upper.shape != (rgrid.n,):
            raise ValueError("endpoint arrays must have one value per level")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("endpoints must be finite")
        if check and np.any(lower > upper):
            raise ValueError("lower endpoint exceeds upper endpoint at some level")
        self.rgrid = rgrid
        self.lower = lower
        self.upper = upper

    @classmethod
    def triangular(cls, left, mode, right, rgrid=None):
        return TriangularFuzzyNumber(left, mode, right).expand(rgrid or RGrid())

    @classmethod
    def crisp(cls, value, rgrid=None):
        rgrid = rgrid or RGrid()
        v = np.full(rgrid.n, float(value))
        return cls(rgrid, v, v)

    def level(self, r):
        """Interval [lower, upper] at level r, linearly interpolated between grid levels."""
        r = float(r)
        if r < 0.0 or r > 1.0:
            raise ValueError("level must lie in [0, 1]")
        rv = self.rgrid.values
        return (float(np.interp(r, rv, self.lower)),
                float(np.interp(r, rv, self.upper)))

    def __repr__(self):
        return "FuzzyNumber(support=[%g, %g], core=[%g, %g], %d levels)" % (
            self.lower[0], self.upper[0], self.lower[-1], self.upper[-1], self.rgrid.n)


@dataclass(frozen=True)
class TriangularFuzzyNumber:
    """Triangular shape (left, mode, right) with linear level maps."""

    left: float
    mode: float
    right: float

    def __post_init__(self):
        if not (self.left <= self.mode <= self.right):
            raise ValueError("triangular shape needs left <= mode <= right")

    def expand(self, rgrid=None):
        rgrid = rgrid or RGrid()
        r = rgrid.values
        lower = self.left + r * (self.mode - self.left)
        upper = self.right - r * (self.right - self.mode)
        return FuzzyNumber(rgrid, lower, upper)


@dataclass(frozen=True)
class StackingReport:
    """Outcome of the checkable interval-stacking conditions.

    `failed` lists the violated conditions among:
      "i"   lower endpoints nondecreasing in r
      "ii"  upper endpoints nonincreasing in r
      "iii" lower <= upper at r = 1
    Conditions "iv" and "v" (one-sided continuity of the level maps) are
    not decidable from finitely many samples and stay unverified.
    """

    valid: bool
    failed: tuple
    unverified: tuple = ("iv", "v")


def validate_stacking(lower, upper=None, tol=0.0):
    """Check the decidable stacking conditions of a level-interval family.

    Accepts a FuzzyNumber or a pair of per-level endpoint arrays ordered
    from r=0 to r=1.
    """
    if isinstance(lower, FuzzyNumber):
        lower, upper = lower.lower, lower.upper
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    if lo.shape != up.shape or lo.ndim != 1 or lo.size < 2:
        raise ValueError("need matching per-level endpoint arrays")
    failed = []
    if np.any(np.diff(lo) < -tol):
        failed.append("i")
    if np.any(np.diff(up) > tol):
        failed.append("ii")
    if lo[-1] > up[-1] + tol:
        failed.append("iii")
    return StackingReport(valid=not failed, failed=tuple(failed))


def _joint_grid(u, v):
    if u.rgrid != v.rgrid:
        raise ValueError("fuzzy numbers live on different r-grids")
    return u.rgrid


def add(u, v):
    """Levelwise interval sum."""
    rg = _joint_grid(u, v)
    return FuzzyNumber(rg, u.lower + v.lower, u.upper + v.upper)


def scale(lam, u):
    """Multiply by a crisp scalar; a negative scalar swaps the endpoints."""
    lam = float(lam)
    if lam >= 0.0:
        return FuzzyNumber(u.rgrid, lam * u.lower, lam * u.upper)
    return FuzzyNumber(u.rgrid, lam * u.upper, lam * u.lower)


def product(u, v):
    """Levelwise interval product: min and max of the four endpoint products."""
    rg = _joint_grid(u, v)
    cands = np.stack([u.lower * v.lower, u.lower * v.upper,
                      u.upper * v.lower, u.upper * v.upper])
    return FuzzyNumber(rg, cands.min(axis=0), cands.max(axis=0))


@dataclass(frozen=True)
class GHDifferenceReport:
    """Validity of a generalized difference candidate.

    case 1 means u = v + w holds levelwise, case 2 means v = u + (-1) w;
    None means neither case is consistent across all levels. `exists`
    additionally requires the candidate to pass the stacking checks.
    """

    exists: bool
    case: object  # 1, 2, or None
    stacking: StackingReport


def gh_difference(u, v, tol=DEFAULT_TOL):
    """Generalized difference candidate with a validity report.

    Always returns the levelwise [min, max] of the endpoint differences;
    non-existence is reported, never raised, so callers can inspect the
    candidate regardless.
    """
    rg = _joint_grid(u, v)
    dl = u.lower - v.lower
    du = u.upper - v.upper
    cand = FuzzyNumber(rg, np.minimum(dl, du), np.maximum(dl, du))
    case1 = bool(np.all(dl <= du + tol))
    case2 = bool(np.all(du <= dl + tol))
    case = 1 if case1 else (2 if case2 else None)
    stacking = validate_stacking(cand.lower, cand.upper, tol=tol)
    return cand, GHDifferenceReport(exists=case is not None and stacking.valid,
                                    case=case, stacking=stacking)


def hausdorff(u, v):
    """Sup over levels of the larger endpoint deviation."""
    _joint_grid(u, v)
    return float(np.maximum(np.abs(u.lower - v.lower),
                            np.abs(u.upper - v.upper)).max())


def compare(u, v, tol=DEFAULT_TOL):
    """Partial order on fuzzy numbers by levelwise endpoint comparison.

    Returns one of STRICTLY_LESS, LESS_EQUAL, APPROX_EQUAL, GREATER_EQUAL,
    STRICTLY_GREATER, NONCOMPARABLE. The strict verdicts additionally need
    both endpoints strictly separated at some grid level.
    """
    _joint_grid(u, v)
    le = bool(np.all(u.lower <= v.lower + tol) and np.all(u.upper <= v.upper + tol))
    ge = bool(np.all(v.lower <= u.lower + tol) and np.all(v.upper <= u.upper + tol))
    if le and ge:
        return APPROX_EQUAL
    if le:
        strict = np.any((u.lower < v.lower - tol) & (u.upper < v.upper - tol))
        return STRICTLY_LESS if strict else LESS_EQUAL
    if ge:
        strict = np.any((v.lower < u.lower - tol) & (v.upper < u.upper - tol))
        return STRICTLY_GREATER if strict else GREATER_EQUAL
    return NONCOMPARABLE
