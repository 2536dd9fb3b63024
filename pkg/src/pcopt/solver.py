"""Local solvers for deterministic reformulations.

* :func:`minimize_unconstrained` -- BFGS with a backtracking Armijo line search.
* :func:`minimize_constrained` -- augmented Lagrangian outer loop around it.
* :func:`kkt_residual`, :func:`dual_gap` -- optimality certificates.
* :func:`classify_stationary_point` -- bordered-matrix test for 1-D equality problems.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .expressions import Expression, ExpressionError, eval_expr, grad_expr
from .transform import DeterministicProblem

ARMIJO_C = 1e-4
BACKTRACK = 0.5
MAX_BACKTRACKS = 60
FEAS_STALL = 0.25


@dataclass
class SolveOptions:
    max_iters: int = 500
    grad_tol: float = 1e-8
    feas_tol: float = 1e-8
    initial_point: Optional[np.ndarray] = None
    penalty_init: float = 10.0
    penalty_growth: float = 10.0
    al_outer_iters: int = 20

    def __post_init__(self):
        if self.grad_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.penalty_growth <= 1:
            raise ValueError("penalty growth factor must exceed 1")
        if self.penalty_init <= 0:
            raise ValueError("initial penalty must be positive")
        if self.initial_point is not None:
            self.initial_point = np.asarray(self.initial_point, dtype=float).ravel()


@dataclass
class KKTReport:
    stationarity: float
    feasibility: float
    complementarity: float
    dual_sign: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "KKTReport":
        return cls(**{k: float(data[k]) for k in ("stationarity", "feasibility", "complementarity", "dual_sign")})


@dataclass
class SolveResult:
    a_star: np.ndarray
    u: np.ndarray
    v: np.ndarray
    objective_value: float
    kkt: KKTReport
    iterations: int
    converged: bool
    message: str = ""
    history: list = field(default_factory=list, repr=False)


def _safe_eval(fun, x):
    try:
        value = float(fun(x))
    except (ExpressionError, FloatingPointError, OverflowError, ZeroDivisionError):
        return math.inf
    return value if math.isfinite(value) else math.inf


def _bfgs(fun, grad, x0, max_iters: int, tol: float, callback=None):
    """Core BFGS loop; returns ``(x, f, g, iterations, converged, message, history)``."""
    x = np.array(x0, dtype=float)
    f = float(fun(x))
    g = np.asarray(grad(x), dtype=float)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise FloatingPointError("objective or gradient is not finite at the initial point")
    n = x.size
    H = np.eye(n)
    scaled = False
    history = [f]
    message = "iteration limit reached"
    converged = False
    it = 0
    for it in range(max_iters + 1):
        if np.linalg.norm(g) <= tol:
            converged, message = True, "gradient tolerance reached"
            break
        if it == max_iters:
            break
        p = -H @ g
        slope = float(g @ p)
        if not slope < 0:
            H = np.eye(n)
            p = -g
            slope = -float(g @ g)

        # Trial step from a quadratic fit along p, then Armijo backtracking.
        f_unit = _safe_eval(fun, x + p)
        curvature = f_unit - f - slope
        alpha = 1.0
        if math.isfinite(f_unit) and curvature > 0:
            alpha = min(-slope / (2.0 * curvature), 4.0)
        f_new = f_unit if alpha == 1.0 else _safe_eval(fun, x + alpha * p)
        if not f_new <= f + ARMIJO_C * alpha * slope:
            if f_unit <= f + ARMIJO_C * slope:
                alpha, f_new = 1.0, f_unit
            else:
                alpha = min(alpha, 1.0)
                for _ in range(MAX_BACKTRACKS):
                    alpha *= BACKTRACK
                    f_new = _safe_eval(fun, x + alpha * p)
                    if f_new <= f + ARMIJO_C * alpha * slope:
                        break
                else:
                    message = "line search failed"
                    break
        assert f_new <= f, "accepted step increased the objective"

        s = alpha * p
        x_new = x + s
        g_new = np.asarray(grad(x_new), dtype=float)
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if not scaled:
                H = np.eye(n) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            Hy = H @ y
            H = H - rho * (np.outer(Hy, s) + np.outer(s, Hy)) + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if callback is not None:
            callback(x, f)
    return x, f, g, it, converged, message, history


def minimize_unconstrained(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0=None,
    opts: Optional[SolveOptions] = None,
    callback=None,
) -> SolveResult:
    """Minimize a smooth function with BFGS.

    Stops when ``||grad|| <= grad_tol * (1 + ||grad(x0)||)``. Hitting the
    iteration cap is reported through ``converged=False``, not raised.
    """
    opts = opts or SolveOptions()
    x0 = opts.initial_point if x0 is None else x0
    if x0 is None:
        raise ValueError("an initial point is required")
    x0 = np.asarray(x0, dtype=float).ravel()
    g0 = np.asarray(grad(x0), dtype=float)
    tol = opts.grad_tol * (1.0 + float(np.linalg.norm(g0)))
    x, f, g, iters, converged, message, history = _bfgs(fun, grad, x0, opts.max_iters, tol, callback)
    kkt = KKTReport(float(np.linalg.norm(g)), 0.0, 0.0, 0.0)
    return SolveResult(x, np.zeros(0), np.zeros(0), f, kkt, iters, converged, message, history)


def kkt_residual(dp: DeterministicProblem, a, u, v) -> KKTReport:
    a = np.asarray(a, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if a.size != dp.dim or u.size != dp.n_ineq or v.size != dp.n_eq:
        raise ValueError(
            f"dimension mismatch: a={a.size} (want {dp.dim}), u={u.size} (want {dp.n_ineq}), "
            f"v={v.size} (want {dp.n_eq})"
        )
    grad = dp.grad_F(a)
    G = dp.G(a)
    H = dp.H(a)
    if dp.n_ineq:
        grad = grad + dp.jac_G(a).T @ u
    if dp.n_eq:
        grad = grad + dp.jac_H(a).T @ v
    feas = max(np.max(np.maximum(G, 0.0), initial=0.0), np.max(np.abs(H), initial=0.0))
    return KKTReport(
        stationarity=float(np.linalg.norm(grad)),
        feasibility=float(feas),
        complementarity=float(np.max(np.abs(u * G), initial=0.0)),
        dual_sign=float(max(0.0, -np.min(u, initial=0.0))),
    )


def minimize_constrained(dp: DeterministicProblem, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Augmented Lagrangian method with BFGS inner solves.

    Multipliers are updated as ``u <- max(0, u + rho G)``, ``v <- v + rho H``;
    the penalty grows whenever feasibility fails to shrink by a factor 4.
    """
    opts = opts or SolveOptions()
    if opts.initial_point is None:
        raise ValueError("an initial point is required")
    a = np.asarray(opts.initial_point, dtype=float).ravel()
    if a.size != dp.dim:
        raise ValueError(f"initial point has length {a.size}, problem has {dp.dim}")
    if not dp.constrained:
        raise ValueError("problem has no constraints; use minimize_unconstrained")

    u = np.zeros(dp.n_ineq)
    v = np.zeros(dp.n_eq)
    rho = opts.penalty_init
    stat_tol = opts.grad_tol * (1.0 + float(np.linalg.norm(dp.grad_F(a))))
    prev_feas = math.inf
    total_iters = 0
    history = []
    kkt = kkt_residual(dp, a, u, v)
    converged = False
    message = "outer iteration limit reached"

    for _ in range(opts.al_outer_iters):
        u_k, v_k, rho_k = u, v, rho

        def merit(x):
            shifted = np.maximum(0.0, u_k + rho_k * dp.G(x))
            H = dp.H(x)
            return (
                dp.F(x)
                + float(shifted @ shifted - u_k @ u_k) / (2.0 * rho_k)
                + float(v_k @ H)
                + 0.5 * rho_k * float(H @ H)
            )

        def merit_grad(x):
            g = dp.grad_F(x)
            if dp.n_ineq:
                g = g + dp.jac_G(x).T @ np.maximum(0.0, u_k + rho_k * dp.G(x))
            if dp.n_eq:
                g = g + dp.jac_H(x).T @ (v_k + rho_k * dp.H(x))
            return g

        a, _, _, iters, _, _, hist = _bfgs(merit, merit_grad, a, opts.max_iters, stat_tol)
        total_iters += iters
        history.extend(hist)
        u = np.maximum(0.0, u_k + rho_k * dp.G(a))
        v = v_k + rho_k * dp.H(a)
        kkt = kkt_residual(dp, a, u, v)
        if kkt.stationarity <= stat_tol and kkt.feasibility <= opts.feas_tol:
            converged, message = True, "KKT tolerances reached"
            break
        if kkt.feasibility > FEAS_STALL * prev_feas:
            rho *= opts.penalty_growth
        prev_feas = kkt.feasibility

    return SolveResult(a, u, v, dp.F(a), kkt, total_iters, converged, message, history)


def solve(dp: DeterministicProblem, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Dispatch to the constrained or unconstrained solver."""
    opts = opts or SolveOptions()
    if dp.constrained:
        return minimize_constrained(dp, opts)
    return minimize_unconstrained(dp.F, dp.grad_F, opts.initial_point, opts)


class DualGapError(RuntimeError):
    pass


def dual_gap(dp: DeterministicProblem, result: SolveResult, opts: Optional[SolveOptions] = None) -> float:
    """``F(a*) - min_a [F + u.G + v.H]`` at the returned multipliers.

    The dual function is evaluated by an unconstrained solve started at
    ``a*``; if that solve fails (for example the Lagrangian is unbounded)
    :class:`DualGapError` is raised.
    """
    if not dp.constrained:
        return 0.0
    opts = opts or SolveOptions()
    u, v = result.u, result.v

    def lagrangian(x):
        return dp.F(x) + float(u @ dp.G(x)) + float(v @ dp.H(x))

    def lagrangian_grad(x):
        g = dp.grad_F(x)
        if dp.n_ineq:
            g = g + dp.jac_G(x).T @ u
        if dp.n_eq:
            g = g + dp.jac_H(x).T @ v
        return g

    inner = minimize_unconstrained(lagrangian, lagrangian_grad, result.a_star, opts)
    if not inner.converged or not math.isfinite(inner.objective_value):
        raise DualGapError(f"dual function evaluation failed: {inner.message}")
    return dp.F(result.a_star) - inner.objective_value


class StationaryKind(str, enum.Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


FD_STEP = 1e-5


def bordered_matrix(f: Expression, h: Expression, x: float, v: float, var: str = "x", env=None) -> np.ndarray:
    """``[[L'', h'], [h', 0]]`` for ``L = f + v h``; ``L''`` by central differences of ``L'``."""
    env = dict(env or {})

    def dL(t):
        e = dict(env, **{var: t})
        return float(grad_expr(f, var, e)) + v * float(grad_expr(h, var, e))

    second = (dL(x + FD_STEP) - dL(x - FD_STEP)) / (2.0 * FD_STEP)
    dh = float(grad_expr(h, var, dict(env, **{var: x})))
    return np.array([[second, dh], [dh, 0.0]])


def classify_stationary_point(
    f: Expression, h: Expression, x: float, v: float, var: str = "x", env=None
) -> StationaryKind:
    """Classify a stationary point of ``f + v h`` in the joint ``(x, v)`` space."""
    env = dict(env or {})
    point = dict(env, **{var: x})
    residual = float(grad_expr(f, var, point)) + v * float(grad_expr(h, var, point))
    if abs(residual) > 1e-6 or abs(float(eval_expr(h, point))) > 1e-6:
        raise ValueError(f"({x}, {v}) is not a stationary point of the Lagrangian")
    J = bordered_matrix(f, h, x, v, var, env)
    if abs(J[0, 1]) < 1e-8:
        return StationaryKind.DEGENERATE
    eta = np.linalg.eigvalsh(J)
    if eta[0] * eta[1] < -1e-8:
        return StationaryKind.SADDLE
    if np.all(eta > 0):
        return StationaryKind.MINIMUM
    if np.all(eta < 0):
        return StationaryKind.MAXIMUM
    return StationaryKind.DEGENERATE
