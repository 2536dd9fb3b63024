"""Orthonormal polynomial families and total-degree multivariate bases.

Polynomials are normalized against probability densities, so the
zeroth member of every family is the constant 1:

* Hermite: probabilists' Hermite polynomials, standard normal weight.
* Legendre: density 1/2 on [-1, 1].
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MultiIndex = tuple[int, ...]


class PolynomialFamily(enum.Enum):
    HERMITE = "hermite"
    LEGENDRE = "legendre"


def recurrence_coeffs(family: PolynomialFamily, n: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``n`` three-term recurrence coefficients of the monic family.

    The monic polynomials satisfy
    ``pi_{k+1}(t) = (t - alpha_k) pi_k(t) - beta_k pi_{k-1}(t)``,
    with ``beta_0`` equal to the total mass of the weight (here 1).

    Parameters
    ----------
    family : PolynomialFamily
    n : int
        Number of coefficients, ``n >= 1``.

    Returns
    -------
    alpha, beta : ndarray of shape (n,)
    """
    if n < 1:
        raise ValueError(f"need n >= 1 recurrence coefficients, got {n}")
    k = np.arange(n, dtype=float)
    alpha = np.zeros(n)
    if family is PolynomialFamily.HERMITE:
        beta = k.copy()
    elif family is PolynomialFamily.LEGENDRE:
        beta = k**2 / (4.0 * k**2 - 1.0)
    else:
        raise ValueError(f"unsupported polynomial family: {family!r}")
    beta[0] = 1.0
    return alpha, beta


def eval_orthonormal_all(family: PolynomialFamily, kmax: int, t) -> np.ndarray:
    """Evaluate orthonormal members of degree 0..kmax at ``t``.

    Returns an array of shape ``np.shape(t) + (kmax + 1,)``.
    """
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("evaluation points must be finite")
    alpha, beta = recurrence_coeffs(family, kmax + 1)
    out = np.empty(t.shape + (kmax + 1,))
    out[..., 0] = 1.0
    if kmax >= 1:
        out[..., 1] = (t - alpha[0]) / math.sqrt(beta[1])
    for k in range(1, kmax):
        out[..., k + 1] = (
            (t - alpha[k]) * out[..., k] - math.sqrt(beta[k]) * out[..., k - 1]
        ) / math.sqrt(beta[k + 1])
    return out


def eval_orthonormal(family: PolynomialFamily, k: int, t):
    """Value of the degree-``k`` orthonormal polynomial at ``t``."""
    if k < 0:
        raise ValueError(f"degree must be non-negative, got {k}")
    vals = eval_orthonormal_all(family, k, t)[..., k]
    return float(vals) if vals.ndim == 0 else vals


def total_degree_indices(p: int, r: int) -> list[MultiIndex]:
    """All multi-indices of length ``p`` with total degree at most ``r``.

    Ordered by total degree, then with larger leading entries first, so
    ``(2, 1)`` gives ``[(0, 0), (1, 0), (0, 1)]``.
    """
    if p < 1 or r < 0:
        raise ValueError(f"need p >= 1 and r >= 0, got p={p}, r={r}")

    def compositions(total: int, slots: int):
        if slots == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, slots - 1):
                yield (first,) + rest

    return [idx for deg in range(r + 1) for idx in compositions(deg, p)]


@dataclass(frozen=True)
class Basis:
    """Total-degree orthonormal basis over ``p`` independent inputs."""

    families: tuple[PolynomialFamily, ...]
    order: int
    index_set: tuple[MultiIndex, ...] = field(init=False, repr=False)

    def __post_init__(self):
        families = tuple(self.families)
        if not families:
            raise ValueError("a basis needs at least one random dimension")
        object.__setattr__(self, "families", families)
        object.__setattr__(
            self, "index_set", tuple(total_degree_indices(len(families), self.order))
        )

    @property
    def p(self) -> int:
        return len(self.families)

    def __len__(self) -> int:
        return len(self.index_set)

    def evaluate(self, points) -> np.ndarray:
        """Matrix of basis values, shape ``(n_points, len(self))``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.p:
            raise ValueError(f"points have dimension {pts.shape[1]}, basis has {self.p}")
        univariate = [
            eval_orthonormal_all(fam, self.order, pts[:, j])
            for j, fam in enumerate(self.families)
        ]
        idx = np.array(self.index_set)
        out = np.ones((pts.shape[0], len(self.index_set)))
        for j in range(self.p):
            out *= univariate[j][:, idx[:, j]]
        return out


def eval_multivariate(basis: Basis, idx: Sequence[int], t: Sequence[float]) -> float:
    """Product of univariate orthonormal polynomials at the point ``t``."""
    idx = tuple(int(i) for i in idx)
    t = np.asarray(t, dtype=float).ravel()
    if len(idx) != basis.p or t.size != basis.p:
        raise ValueError(
            f"index of length {len(idx)} and point of length {t.size} "
            f"do not match basis dimension {basis.p}"
        )
    if idx not in basis.index_set:
        raise ValueError(f"multi-index {idx} is not in the basis")
    value = 1.0
    for fam, k, tj in zip(basis.families, idx, t):
        value *= eval_orthonormal(fam, k, tj)
    return value
