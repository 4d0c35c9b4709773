"""Numerical toolkit for fuzzy fractional variational problems.

Fuzzy numbers are carried as stacked r-level intervals; trajectories are
lower/upper endpoint functions per level. Fractional derivatives follow
the Caputo (left/right) and Riemann-Liouville (left/right) conventions
on uniform grids. On top of these sit residual systems for variational
optimality conditions, Gauss-Newton solvers for fixed-interval problems,
and a bisection-plus-shooting solver for free terminal points on a
fuzzy curve.
"""

from .fuzzy_core import (DEFAULT_TOL, STRICTLY_LESS, LESS_EQUAL, APPROX_EQUAL,
                         GREATER_EQUAL, STRICTLY_GREATER, NONCOMPARABLE,
                         FuzzyNumber, GHDifferenceReport, RGrid,
                         StackingReport, TriangularFuzzyNumber, add, compare,
                         gh_difference, hausdorff, product, scale,
                         validate_stacking)
from .frac_ops import (CaputoCaseReport, FractionalOrder, GHCase,
                       GridFunction, XGrid, caputo_left, caputo_right,
                       frac_integral_left, frac_integral_right,
                       fuzzy_caputo_left, grid_derivative, rl_left_deriv,
                       rl_right_deriv)
from .variational import (FREE, FuzzyTrajectory, GridAlignmentError,
                          Lagrangian, LagrangianPoint, ProblemSpec,
                          ResidualReport, ResidualRow, el_residuals,
                          functional_value, natural_bc_residuals,
                          subinterval_residuals)
from .solver import (SolveResult, SolverConfig, SweepEntry, alpha_sweep,
                     solve_classical_limit, solve_ffvp)
from .transversality import (BracketError, FreeEndpointProblem,
                             FreeEndpointResult, FuzzyCurve,
                             el_residuals_free, solve_free_endpoint,
                             transversality_residual)
from .problems import (BUILTIN_NAMES, builtin_problem, example2_problem,
                       example3_problem, quadratic_crisp_problem)
from .expressions import (Expression, ExpressionError,
                          lagrangian_from_expressions, parse_expression)

__version__ = "0.1.0"
