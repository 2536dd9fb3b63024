"""Polynomial chaos expansions of decision variables and their moments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .orthopoly import Basis
from .quadrature import QuadratureRule

MU2_TOL = 1e-10


def num_terms(d: int, r: int, p: int) -> int:
    """Number of scalar unknowns, ``d (r+p)! / (r! p!)``."""
    if d < 1 or r < 0 or p < 1:
        raise ValueError(f"need d >= 1, r >= 0, p >= 1; got d={d}, r={r}, p={p}")
    return d * math.comb(r + p, p)


@dataclass(frozen=True)
class Expansion:
    """Coefficient table of shape ``(d, len(basis))``."""

    basis: Basis
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[None, :]
        if coeffs.shape[1] != len(self.basis):
            raise ValueError(
                f"expansion has {coeffs.shape[1]} columns, basis has {len(self.basis)} terms"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("expansion coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_vector(cls, basis: Basis, a, d: int) -> "Expansion":
        return cls(basis, np.asarray(a, dtype=float).reshape(d, len(basis)))

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    def evaluate_many(self, points) -> np.ndarray:
        """Values at many points, shape ``(n_points, d)``."""
        return self.basis.evaluate(points) @ self.coeffs.T


def evaluate(exp: Expansion, xi) -> np.ndarray:
    """Decision vector ``x(xi)`` at a single standardized point."""
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.size != exp.basis.p:
        raise ValueError(f"point has dimension {xi.size}, expansion expects {exp.basis.p}")
    return exp.evaluate_many(xi[None, :])[0]


def project(values, basis: Basis, rule: QuadratureRule) -> np.ndarray:
    """Coefficients of nodal ``values`` (shape ``(Q,)`` or ``(Q, d)``) by discrete projection."""
    values = np.asarray(values, dtype=float)
    psi = basis.evaluate(rule.nodes)
    coeffs = (psi * rule.weights[:, None]).T @ values.reshape(len(rule), -1)
    return coeffs.T


@dataclass
class MomentSummary:
    mean: np.ndarray
    std: np.ndarray
    central_moments: dict[int, np.ndarray] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "central_moments": {str(k): v.tolist() for k, v in sorted(self.central_moments.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MomentSummary":
        return cls(
            np.array(data["mean"], dtype=float),
            np.array(data["std"], dtype=float),
            {int(k): np.array(v, dtype=float) for k, v in data["central_moments"].items()},
        )


def moments(exp: Expansion, rule: QuadratureRule, max_k: int = 4) -> MomentSummary:
    """Mean, standard deviation and central moments of order 2..max_k.

    Mean and standard deviation come straight from the coefficients;
    the central moments are quadratures of ``(x - mean)**k``, so the rule
    must be exact for degree ``max_k * r``. A mismatch between the
    quadrature second moment and the squared coefficient norm raises.
    """
    mean = exp.coeffs[:, 0].copy()
    std = np.sqrt(np.sum(exp.coeffs[:, 1:] ** 2, axis=1))
    central = {}
    if max_k >= 2:
        dev = exp.evaluate_many(rule.nodes) - mean
        for k in range(2, max_k + 1):
            central[k] = rule.expect(dev**k)
        mismatch = np.abs(central[2] - std**2)
        if np.any(mismatch > MU2_TOL * np.maximum(1.0, std**2)):
            raise ValueError(
                "quadrature rule under-resolves the expansion: second central moment "
                f"differs from the coefficient variance by {mismatch.max():.3e}"
            )
    return MomentSummary(mean, std, central)


def moment_rule_size(order: int, max_k: int, at_least: int = 1) -> int:
    """Gauss nodes per dimension needed to integrate degree ``max_k * order`` exactly."""
    return max(at_least, (max(max_k, 2) * order) // 2 + 1)
