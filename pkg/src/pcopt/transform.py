"""Reformulation of a stochastic problem as a deterministic problem in expansion coefficients.

Decision variables are replaced by expansions ``x_i(xi) = sum_k a[i, k] psi_k(xi)``
and every expectation is a quadrature over the rule's nodes. Coefficient
vectors are flat, row-major over ``(decision, basis term)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .expressions import eval_expr, value_and_partials
from .orthopoly import Basis, PolynomialFamily
from .problem import StochasticProblem
from .quadrature import QuadratureRule, product_gauss_rule

MODES = ("expectation", "collocation")

Vector = np.ndarray


def _no_constraints(a):
    return np.zeros(0)


@dataclass(frozen=True)
class DeterministicProblem:
    """Smooth problem over a flat coefficient vector.

    Inequalities follow the ``G(a) <= 0`` convention. Jacobians have one
    row per constraint.
    """

    dim: int
    objective: Callable[[Vector], float]
    objective_grad: Callable[[Vector], Vector]
    ineq: Callable[[Vector], Vector] = _no_constraints
    ineq_jac: Optional[Callable[[Vector], np.ndarray]] = None
    eq: Callable[[Vector], Vector] = _no_constraints
    eq_jac: Optional[Callable[[Vector], np.ndarray]] = None
    n_ineq: int = 0
    n_eq: int = 0
    constraint_mode: str = "expectation"
    basis: Optional[Basis] = None
    rule: Optional[QuadratureRule] = None
    d: int = 1
    sense: str = "minimize"

    def F(self, a) -> float:
        return float(self.objective(np.asarray(a, dtype=float)))

    def grad_F(self, a) -> Vector:
        return np.asarray(self.objective_grad(np.asarray(a, dtype=float)), dtype=float)

    def G(self, a) -> Vector:
        return np.asarray(self.ineq(np.asarray(a, dtype=float)), dtype=float).reshape(self.n_ineq)

    def H(self, a) -> Vector:
        return np.asarray(self.eq(np.asarray(a, dtype=float)), dtype=float).reshape(self.n_eq)

    def jac_G(self, a) -> np.ndarray:
        if self.n_ineq == 0:
            return np.zeros((0, self.dim))
        return np.asarray(self.ineq_jac(np.asarray(a, dtype=float)), dtype=float)

    def jac_H(self, a) -> np.ndarray:
        if self.n_eq == 0:
            return np.zeros((0, self.dim))
        return np.asarray(self.eq_jac(np.asarray(a, dtype=float)), dtype=float)

    @property
    def constrained(self) -> bool:
        return self.n_ineq + self.n_eq > 0


def grad_F(dp: DeterministicProblem, a) -> Vector:
    a = np.asarray(a, dtype=float)
    if a.size != dp.dim:
        raise ValueError(f"coefficient vector has length {a.size}, problem has {dp.dim}")
    return dp.grad_F(a)


def basis_families(prob: StochasticProblem) -> tuple[PolynomialFamily, ...]:
    """One family per random parameter; a problem without any gets a single dummy dimension."""
    fams = tuple(dist.family for dist in prob.distributions)
    return fams or (PolynomialFamily.HERMITE,)


def default_rule(basis: Basis, n: Optional[int] = None) -> QuadratureRule:
    """Tensor Gauss rule with ``2r + 2`` nodes per dimension unless ``n`` is given."""
    return product_gauss_rule(basis.families, n if n is not None else 2 * basis.order + 2)


def initial_coefficients(start: Sequence[float], d: int, terms: int) -> Vector:
    """Coefficient vector whose mean part is ``start`` and higher-order part is zero."""
    start = np.asarray(start, dtype=float).ravel()
    if start.size != d:
        raise ValueError(f"start point has {start.size} entries, problem has {d} decision variables")
    a = np.zeros((d, terms))
    a[:, 0] = start
    return a.ravel()


class _NodalModel:
    """Expression evaluation at every quadrature node at once."""

    def __init__(self, prob: StochasticProblem, basis: Basis, rule: QuadratureRule):
        self.names = list(prob.decision_names)
        self.d = prob.d
        self.terms = len(basis)
        self.psi = basis.evaluate(rule.nodes)  # (Q, T)
        self.w = rule.weights
        self.q = len(rule)
        self.params = prob.physical_params(rule.nodes) if prob.p else {}

    def env(self, a):
        a = np.asarray(a, dtype=float)
        if a.size != self.d * self.terms:
            raise ValueError(
                f"coefficient vector has length {a.size}, expected {self.d * self.terms}"
            )
        x = a.reshape(self.d, self.terms) @ self.psi.T  # (d, Q)
        env = dict(self.params)
        env.update({name: x[i] for i, name in enumerate(self.names)})
        return env

    def values(self, expr, a):
        vals = np.broadcast_to(np.asarray(eval_expr(expr, self.env(a)), dtype=float), (self.q,))
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise FloatingPointError(f"expression is not finite at quadrature node {bad}")
        return vals

    def values_and_partials(self, expr, a):
        val, parts = value_and_partials(expr, self.names, self.env(a))
        val = np.broadcast_to(np.asarray(val, dtype=float), (self.q,))
        dx = np.array([np.broadcast_to(np.asarray(p, dtype=float), (self.q,)) for p in parts])
        return val, dx  # (Q,), (d, Q)

    def expect_grad(self, dx):
        return ((dx * self.w) @ self.psi).ravel()

    def nodal_jac(self, dx):
        # row (q) of d x_l(q) / d a[l, k] = psi[q, k]
        return np.einsum("lq,qk->qlk", dx, self.psi).reshape(self.q, -1)


def transform(
    prob: StochasticProblem,
    basis: Basis,
    rule: QuadratureRule,
    mode: str = "expectation",
) -> DeterministicProblem:
    """Deterministic problem whose objective is the quadrature expectation of ``f``.

    In ``expectation`` mode each constraint is replaced by its expectation.
    In ``collocation`` mode each constraint is imposed at every node,
    ordered constraint-major.
    """
    if mode not in MODES:
        raise ValueError(f"constraint mode must be one of {MODES}, got {mode!r}")
    if basis.p != max(prob.p, 1):
        raise ValueError(f"basis has {basis.p} random dimensions, problem has {prob.p}")
    if rule.dim != basis.p:
        raise ValueError(f"quadrature rule has dimension {rule.dim}, basis has {basis.p}")
    model = _NodalModel(prob, basis, rule)
    f = prob.minimization_objective()
    gs, hs = prob.inequality_constraints, prob.equality_constraints

    def objective(a):
        return float(np.dot(model.w, model.values(f, a)))

    def objective_grad(a):
        return model.expect_grad(model.values_and_partials(f, a)[1])

    if mode == "expectation":

        def stack(exprs):
            return lambda a: np.array([np.dot(model.w, model.values(e, a)) for e in exprs])

        def stack_jac(exprs):
            return lambda a: np.array(
                [model.expect_grad(model.values_and_partials(e, a)[1]) for e in exprs]
            ).reshape(len(exprs), -1)

        n_ineq, n_eq = len(gs), len(hs)
    else:

        def stack(exprs):
            return lambda a: np.concatenate([model.values(e, a) for e in exprs]) if exprs else np.zeros(0)

        def stack_jac(exprs):
            return lambda a: np.concatenate(
                [model.nodal_jac(model.values_and_partials(e, a)[1]) for e in exprs]
            )

        n_ineq, n_eq = len(gs) * model.q, len(hs) * model.q

    return DeterministicProblem(
        dim=prob.d * len(basis),
        objective=objective,
        objective_grad=objective_grad,
        ineq=stack(gs) if gs else _no_constraints,
        ineq_jac=stack_jac(gs) if gs else None,
        eq=stack(hs) if hs else _no_constraints,
        eq_jac=stack_jac(hs) if hs else None,
        n_ineq=n_ineq,
        n_eq=n_eq,
        constraint_mode=mode,
        basis=basis,
        rule=rule,
        d=prob.d,
        sense=prob.sense,
    )


def fixed_parameter_problem(prob: StochasticProblem, xi) -> DeterministicProblem:
    """The original problem with its random parameters frozen at standardized ``xi``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size == 0:
        xi = np.zeros(1)
    basis = Basis(basis_families(prob), 0)
    rule = QuadratureRule(xi[None, :], np.ones(1))
    return transform(prob, basis, rule, "expectation")
