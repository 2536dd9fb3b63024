"""Linear programs whose constraint right-hand sides depend on one random parameter.

``max/min c.x  s.t.  A x <= b0 + b1 * beta`` with ``beta`` drawn from a
:class:`~pcopt.problem.Distribution`. Matrix-structured, so transforms
are assembled with linear algebra instead of expression trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .orthopoly import Basis, PolynomialFamily
from .problem import Distribution, standardize
from .quadrature import QuadratureRule
from .transform import MODES, DeterministicProblem


@dataclass(frozen=True)
class LinearStochasticProgram:
    c: np.ndarray
    A: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    distribution: Distribution
    sense: str = "maximize"
    decision_names: tuple[str, ...] = field(default=())
    param_name: str = "beta"
    name: str = "linear"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        object.__setattr__(self, "A", A)
        for attr in ("c", "b0", "b1"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=float))
        if self.c.shape != (A.shape[1],) or self.b0.shape != (A.shape[0],) or self.b1.shape != (A.shape[0],):
            raise ValueError("inconsistent LP dimensions")
        if not self.decision_names:
            object.__setattr__(self, "decision_names", tuple(f"x{i}" for i in range(A.shape[1])))

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def p(self) -> int:
        return 1

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def distributions(self) -> tuple[Distribution, ...]:
        return (self.distribution,)

    @property
    def random_names(self) -> tuple[str, ...]:
        return (self.param_name,)

    def digest(self) -> dict:
        return {
            "name": self.name,
            "decision": list(self.decision_names),
            "random": {self.param_name: str(self.distribution)},
            "d": self.d,
            "p": 1,
            "m": self.m,
            "n": 0,
            "sense": self.sense,
        }

    def _cost(self) -> np.ndarray:
        return -self.c if self.sense == "maximize" else self.c

    def transform(self, basis: Basis, rule: QuadratureRule, mode: str = "expectation") -> DeterministicProblem:
        if mode not in MODES:
            raise ValueError(f"constraint mode must be one of {MODES}, got {mode!r}")
        if basis.p != 1 or rule.dim != 1:
            raise ValueError("linear programs carry exactly one random parameter")
        d, T, Q = self.d, len(basis), len(rule)
        psi = basis.evaluate(rule.nodes)  # (Q, T)
        w = rule.weights
        rhs = self.b0[:, None] + self.b1[:, None] * standardize(self.distribution, rule.nodes[:, 0])[None, :]
        cost = self._cost()
        mean_map = psi.T @ w  # (T,) expectation of each basis function
        obj_grad = np.outer(cost, mean_map).ravel()

        if mode == "expectation":
            jac = np.kron(self.A, mean_map[None, :])  # (m, d*T)
            e_rhs = rhs @ w

            def ineq(a):
                return jac @ a - e_rhs

        else:
            jac = np.einsum("il,qk->iqlk", self.A, psi).reshape(self.m * Q, d * T)
            flat_rhs = rhs.ravel()

            def ineq(a):
                return jac @ a - flat_rhs

        return DeterministicProblem(
            dim=d * T,
            objective=lambda a: float(obj_grad @ a),
            objective_grad=lambda a: obj_grad,
            ineq=ineq,
            ineq_jac=lambda a: jac,
            n_ineq=jac.shape[0],
            constraint_mode=mode,
            basis=basis,
            rule=rule,
            d=d,
            sense=self.sense,
        )

    def objective_values(self, x, node=None) -> np.ndarray:
        """Minimization-sense objective at the rows of ``x``."""
        return np.atleast_2d(np.asarray(x, dtype=float)) @ self._cost()

    def fixed_problem(self, xi) -> DeterministicProblem:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        basis = Basis((PolynomialFamily.HERMITE,), 0)
        return self.transform(basis, QuadratureRule(xi[None, :1], np.ones(1)), "expectation")
