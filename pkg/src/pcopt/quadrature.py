"""Gauss rules for the supported weights and tensor-product grids."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .orthopoly import PolynomialFamily, recurrence_coeffs

QL_TOL = 1e-14
QL_MAX_SWEEPS = 50


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes of shape ``(Q, p)`` with positive weights summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        weights = np.array(self.weights, dtype=float).ravel()
        if nodes.shape[0] == 0 or nodes.shape[0] != weights.size:
            raise ValueError(
                f"rule needs matching non-empty nodes/weights, got "
                f"{nodes.shape[0]} nodes and {weights.size} weights"
            )
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return self.weights.size

    def expect(self, values) -> np.ndarray:
        """Weighted sum over the leading (node) axis of ``values``."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


def _tridiagonal_eigen(diag: np.ndarray, offdiag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal matrix.

    Implicitly shifted QL; only the first row of the eigenvector matrix
    is accumulated since that is all Golub-Welsch needs.
    """
    n = diag.size
    d = diag.astype(float).copy()
    e = np.zeros(n)
    e[: n - 1] = offdiag
    z = np.zeros(n)
    z[0] = 1.0
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= QL_TOL * dd or abs(e[m]) < 1e-300:
                    break
                m += 1
            if m == l:
                break
            if sweeps == QL_MAX_SWEEPS:
                raise RuntimeError(f"QL iteration did not converge for eigenvalue {l}")
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[i + 1]
                z[i + 1] = s * z[i] + c * zi1
                z[i] = c * z[i] - s * zi1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def gauss_rule(family: PolynomialFamily, n: int) -> QuadratureRule:
    """``n``-node Gauss rule for the family's probability weight.

    Exact for polynomials of degree ``2n - 1``. Built with Golub-Welsch
    from the recurrence coefficients; nodes are sorted ascending.
    """
    if n < 1:
        raise ValueError(f"a Gauss rule needs at least one node, got {n}")
    alpha, beta = recurrence_coeffs(family, n)
    nodes, first = _tridiagonal_eigen(alpha, np.sqrt(beta[1:]))
    weights = beta[0] * first**2
    order = np.argsort(nodes, kind="stable")
    return QuadratureRule(nodes[order], weights[order])


def tensor_rule(rules: Sequence[QuadratureRule]) -> QuadratureRule:
    """Full tensor product of one-dimensional rules.

    The last dimension varies fastest.
    """
    rules = list(rules)
    if not rules:
        raise ValueError("tensor_rule needs at least one factor rule")
    if len(rules) == 1:
        return rules[0]
    nodes, weights = [], []
    for combo in itertools.product(*(range(len(r)) for r in rules)):
        nodes.append([r.nodes[q, 0] for r, q in zip(rules, combo)])
        weights.append(math.prod(r.weights[q] for r, q in zip(rules, combo)))
    return QuadratureRule(np.array(nodes), np.array(weights))


def product_gauss_rule(families: Sequence[PolynomialFamily], n: int) -> QuadratureRule:
    """Tensor grid of ``n``-node Gauss rules, one factor per family."""
    return tensor_rule([gauss_rule(fam, n) for fam in families])


def integrate(fn: Callable[[np.ndarray], float], rule: QuadratureRule) -> float:
    """Weighted sum of ``fn`` over the rule's nodes, in ascending node order."""
    total = 0.0
    for q in range(len(rule)):
        value = float(fn(rule.nodes[q]))
        if not math.isfinite(value):
            raise ValueError(f"integrand is not finite at node {q}: {rule.nodes[q].tolist()}")
        total += rule.weights[q] * value
    return total
