"""TOML problem configuration: schema validation and problem construction.

The document has two top-level tables. `[problem]` declares the orders,
interval, r-grid, boundary data, and the integrand (a registry name or
a pair of expressions); `[solver]` carries numeric overrides. Unknown
keys anywhere are rejected with their dotted path so typos surface
before any computation.
"""

import os
from dataclasses import dataclass, field

import tomli

from .csvio import read_fuzzy_number
from .expressions import lagrangian_from_expressions
from .frac_ops import XGrid
from .fuzzy_core import FuzzyNumber, RGrid
from .problems import builtin_problem
from .solver import SolverConfig
from .transversality import FreeEndpointProblem, FuzzyCurve
from .variational import FREE, ProblemSpec

__all__ = [
    "ConfigError",
    "Config",
    "load_config",
    "solver_config",
    "build_problem",
    "build_free_problem",
]


class ConfigError(ValueError):
    """Missing, unknown, or ill-typed configuration content."""


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


_PROBLEM_LEAVES = {"kind", "name", "alpha", "beta", "a", "b", "A", "B",
                   "rlevels", "gh_case"}
_PROBLEM_TABLES = {"lagrangian", "boundary", "curve"}
_LAG_KEYS = {"lower", "upper"}
_BOUNDARY_KEYS = {"ya", "yb", "yA", "yB"}
_CURVE_KEYS = {"lower", "upper", "bracket"}
_SOLVER_KEYS = {"nodes", "tolerance", "max_iterations", "damping", "fd_step"}


def _reject_unknown(table, allowed, path):
    for key in table:
        if key not in allowed:
            raise ConfigError("unknown key %s.%s" % (path, key))


def _require(table, key, path):
    if key not in table:
        raise ConfigError("missing key %s.%s" % (path, key))
    return table[key]


def _number(table, key, path, required=False, default=None):
    if key not in table:
        if required:
            raise ConfigError("missing key %s.%s" % (path, key))
        return default
    v = table[key]
    if not _num(v):
        raise ConfigError("%s.%s must be a number" % (path, key))
    return float(v)


def _integer(table, key, path, default=None):
    if key not in table:
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError("%s.%s must be an integer" % (path, key))
    return v


def _string(table, key, path, required=False, default=None):
    if key not in table:
        if required:
            raise ConfigError("missing key %s.%s" % (path, key))
        return default
    v = table[key]
    if not isinstance(v, str):
        raise ConfigError("%s.%s must be a string" % (path, key))
    return v


@dataclass
class Config:
    """Validated configuration document plus its directory for relative paths."""

    kind: str
    alpha: float
    base_dir: str = "."
    name: str = None
    beta: float = None          # None follows alpha
    a: float = None
    b: float = None
    inner: tuple = None
    rlevels: int = 11
    gh_case: int = 1
    lag_lower: str = None
    lag_upper: str = None
    boundary: dict = field(default_factory=dict)
    curve_lower: str = None
    curve_upper: str = None
    bracket: tuple = None
    solver: dict = field(default_factory=dict)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("cannot parse %s: %s" % (path, exc))
    _reject_unknown(doc, {"problem", "solver"}, "top level")
    prob = doc.get("problem")
    if not isinstance(prob, dict):
        raise ConfigError("missing key problem")
    _reject_unknown(prob, _PROBLEM_LEAVES | _PROBLEM_TABLES, "problem")

    kind = _string(prob, "kind", "problem", required=True)
    if kind not in ("builtin", "expression"):
        raise ConfigError("problem.kind must be 'builtin' or 'expression'")
    alpha = _number(prob, "alpha", "problem", required=True)
    cfg = Config(kind=kind, alpha=alpha,
                 base_dir=os.path.dirname(os.path.abspath(path)))
    cfg.name = _string(prob, "name", "problem")
    cfg.beta = _number(prob, "beta", "problem")
    cfg.a = _number(prob, "a", "problem")
    cfg.b = _number(prob, "b", "problem")
    A = _number(prob, "A", "problem")
    B = _number(prob, "B", "problem")
    if (A is None) != (B is None):
        raise ConfigError("problem.A and problem.B must appear together")
    if A is not None:
        cfg.inner = (A, B)
    cfg.rlevels = _integer(prob, "rlevels", "problem", default=11)
    cfg.gh_case = _integer(prob, "gh_case", "problem", default=1)

    lag = prob.get("lagrangian")
    if lag is not None:
        if not isinstance(lag, dict):
            raise ConfigError("problem.lagrangian must be a table")
        _reject_unknown(lag, _LAG_KEYS, "problem.lagrangian")
        cfg.lag_lower = _string(lag, "lower", "problem.lagrangian", required=True)
        cfg.lag_upper = _string(lag, "upper", "problem.lagrangian", required=True)

    bnd = prob.get("boundary")
    if bnd is not None:
        if not isinstance(bnd, dict):
            raise ConfigError("problem.boundary must be a table")
        _reject_unknown(bnd, _BOUNDARY_KEYS, "problem.boundary")
        cfg.boundary = dict(bnd)

    curve = prob.get("curve")
    if curve is not None:
        if not isinstance(curve, dict):
            raise ConfigError("problem.curve must be a table")
        _reject_unknown(curve, _CURVE_KEYS, "problem.curve")
        cfg.curve_lower = _string(curve, "lower", "problem.curve", required=True)
        cfg.curve_upper = _string(curve, "upper", "problem.curve", required=True)
        br = _require(curve, "bracket", "problem.curve")
        if (not isinstance(br, list) or len(br) != 2
                or not all(_num(v) for v in br)):
            raise ConfigError("problem.curve.bracket must be a pair of numbers")
        cfg.bracket = (float(br[0]), float(br[1]))

    sol = doc.get("solver")
    if sol is not None:
        if not isinstance(sol, dict):
            raise ConfigError("solver must be a table")
        _reject_unknown(sol, _SOLVER_KEYS, "solver")
        for key in ("tolerance", "damping", "fd_step"):
            if key in sol and not _num(sol[key]):
                raise ConfigError("solver.%s must be a number" % key)
        for key in ("nodes", "max_iterations"):
            if key in sol and (isinstance(sol[key], bool)
                               or not isinstance(sol[key], int)):
                raise ConfigError("solver.%s must be an integer" % key)
        cfg.solver = dict(sol)
    return cfg


def solver_config(cfg, nodes=None, tolerance=None):
    kw = {}
    for key in _SOLVER_KEYS:
        if key in cfg.solver:
            kw[key] = cfg.solver[key]
    if nodes is not None:
        kw["nodes"] = int(nodes)
    if tolerance is not None:
        kw["tolerance"] = float(tolerance)
    return SolverConfig(**kw)


def effective_orders(cfg, alpha_override=None):
    """Final (alpha, beta) after the command-line override.

    An explicit beta in the document is kept; otherwise beta follows
    whatever alpha ends up being.
    """
    alpha = float(alpha_override) if alpha_override is not None else cfg.alpha
    beta = cfg.beta if cfg.beta is not None else alpha
    return alpha, beta


# a valid placeholder order for the classical path, which ignores it
_CLASSICAL_STANDIN = 0.5


def _frac(order):
    return _CLASSICAL_STANDIN if order == 1.0 else order


def _boundary_value(spec, rg, base_dir, label):
    if spec is None:
        return FREE
    if isinstance(spec, str):
        if spec == "free":
            return FREE
        raise ConfigError("%s must be 'free', a [l, m, u] triple, "
                          "or {csv = path}" % label)
    if isinstance(spec, list):
        if len(spec) != 3 or not all(_num(v) for v in spec):
            raise ConfigError("%s triple must hold three numbers" % label)
        return FuzzyNumber.triangular(float(spec[0]), float(spec[1]),
                                      float(spec[2]), rg)
    if isinstance(spec, dict):
        if set(spec) != {"csv"} or not isinstance(spec["csv"], str):
            raise ConfigError("%s table must be {csv = path}" % label)
        fn = read_fuzzy_number(os.path.join(base_dir, spec["csv"]))
        if fn.rgrid != rg:
            raise ConfigError("%s level table does not match the problem "
                              "r-grid" % label)
        return fn
    raise ConfigError("%s has an unsupported value type" % label)


def build_problem(cfg, alpha=None, beta=None, rlevels=None, nodes=None):
    """Fixed-interval problem from a config; orders may be pre-resolved."""
    if alpha is None:
        alpha, beta = effective_orders(cfg)
    rg = RGrid(int(rlevels) if rlevels is not None else cfg.rlevels)
    n = int(nodes) if nodes is not None else cfg.solver.get("nodes", 201)
    if cfg.kind == "builtin":
        if cfg.name is None:
            raise ConfigError("missing key problem.name")
        if cfg.name == "example3":
            raise ConfigError("problem 'example3' has a free terminal point; "
                              "use the transversality command")
        kw = dict(alpha=_frac(alpha), beta=_frac(beta), rgrid=rg,
                  gh_case=cfg.gh_case, nodes=n)
        if cfg.a is not None:
            kw["a"] = cfg.a
        if cfg.b is not None:
            kw["b"] = cfg.b
        return builtin_problem(cfg.name, **kw)
    if cfg.lag_lower is None:
        raise ConfigError("missing key problem.lagrangian")
    if cfg.a is None or cfg.b is None:
        raise ConfigError("expression problems need problem.a and problem.b")
    nargs = 15 if cfg.inner is not None else 11
    lag = lagrangian_from_expressions(cfg.lag_lower, cfg.lag_upper, nargs)
    bnd = cfg.boundary
    return ProblemSpec(
        alpha=_frac(alpha), beta=_frac(beta),
        xgrid=XGrid(cfg.a, cfg.b, n), rgrid=rg, lagrangian=lag,
        ya=_boundary_value(bnd.get("ya"), rg, cfg.base_dir, "problem.boundary.ya"),
        yb=_boundary_value(bnd.get("yb"), rg, cfg.base_dir, "problem.boundary.yb"),
        inner=cfg.inner,
        yA=_boundary_value(bnd.get("yA"), rg, cfg.base_dir, "problem.boundary.yA"),
        yB=_boundary_value(bnd.get("yB"), rg, cfg.base_dir, "problem.boundary.yB"),
        gh_case=cfg.gh_case)


def build_free_problem(cfg, alpha=None):
    """Free-terminal-point problem from a config (order one admitted)."""
    if alpha is None:
        alpha, _ = effective_orders(cfg)
    if cfg.kind == "builtin":
        if cfg.name != "example3":
            raise ConfigError("builtin %r has no terminal curve; only "
                              "'example3' runs under transversality" % cfg.name)
        kw = dict(alpha=alpha)
        if cfg.a is not None:
            kw["a"] = cfg.a
        if cfg.bracket is not None:
            kw["bracket"] = cfg.bracket
        return builtin_problem("example3", **kw)
    if cfg.curve_lower is None:
        raise ConfigError("missing key problem.curve")
    if cfg.lag_lower is None:
        raise ConfigError("missing key problem.lagrangian")
    if cfg.a is None:
        raise ConfigError("missing key problem.a")
    rg = RGrid(cfg.rlevels)
    ya = _boundary_value(cfg.boundary.get("ya"), rg, cfg.base_dir,
                         "problem.boundary.ya")
    if ya is FREE:
        raise ConfigError("transversality problems need a fixed "
                          "problem.boundary.ya")
    from .expressions import parse_expression
    lo = parse_expression(cfg.curve_lower, ("r", "x"))
    up = parse_expression(cfg.curve_upper, ("r", "x"))
    dlo = lo.derivative("x")
    dup = up.derivative("x")
    curve = FuzzyCurve(
        lower=lambda r, x: lo.evaluate({"r": r, "x": x}),
        upper=lambda r, x: up.evaluate({"r": r, "x": x}),
        dlower=(lambda r, x: dlo.evaluate({"r": r, "x": x})) if dlo else None,
        dupper=(lambda r, x: dup.evaluate({"r": r, "x": x})) if dup else None)
    lag = lagrangian_from_expressions(cfg.lag_lower, cfg.lag_upper, nargs=5)
    return FreeEndpointProblem(alpha=alpha, a=cfg.a, ya=ya, curve=curve,
                               bracket=cfg.bracket, lagrangian=lag)
