"""Optimization under parametric uncertainty via polynomial chaos expansions.

The decision variables are expanded in polynomials orthonormal with respect
to the distribution of the random parameters; the stochastic program then
becomes a deterministic problem in the expansion coefficients.
"""
from .orthopoly import Basis, PolynomialFamily, eval_orthonormal, recurrence_coeffs, total_degree_indices
from .quadrature import QuadratureRule, gauss_rule, integrate, product_gauss_rule, tensor_rule
from .pce import Expansion, MomentSummary, evaluate, moments, num_terms, project
from .expressions import ParseError, grad_expr, parse_expr
from .problem import Distribution, StochasticProblem, load_problem, parse_problem, standardize
from .transform import DeterministicProblem, fixed_parameter_problem, transform
from .solver import (
    KKTReport,
    SolveOptions,
    SolveResult,
    StationaryKind,
    classify_stationary_point,
    dual_gap,
    kkt_residual,
    minimize_constrained,
    minimize_unconstrained,
    solve,
)
from .montecarlo import SampleStats, mc_solve, normal_draw, uniform_draw
from .linear import LinearStochasticProgram
from .diagnostics import GapBoundReport, convexity_probe, estimate_lipschitz, interchange_gap_bound
from .runs import RunReport, run_mc, run_pc

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "PolynomialFamily",
    "eval_orthonormal",
    "recurrence_coeffs",
    "total_degree_indices",
    "QuadratureRule",
    "gauss_rule",
    "integrate",
    "product_gauss_rule",
    "tensor_rule",
    "Expansion",
    "MomentSummary",
    "evaluate",
    "moments",
    "num_terms",
    "project",
    "ParseError",
    "grad_expr",
    "parse_expr",
    "Distribution",
    "StochasticProblem",
    "load_problem",
    "parse_problem",
    "standardize",
    "DeterministicProblem",
    "fixed_parameter_problem",
    "transform",
    "KKTReport",
    "SolveOptions",
    "SolveResult",
    "StationaryKind",
    "classify_stationary_point",
    "dual_gap",
    "kkt_residual",
    "minimize_constrained",
    "minimize_unconstrained",
    "solve",
    "SampleStats",
    "mc_solve",
    "normal_draw",
    "uniform_draw",
    "LinearStochasticProgram",
    "GapBoundReport",
    "convexity_probe",
    "estimate_lipschitz",
    "interchange_gap_bound",
    "RunReport",
    "run_mc",
    "run_pc",
]
