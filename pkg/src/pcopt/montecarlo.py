"""Monte Carlo baseline: solve the deterministic problem once per parameter sample.

Every sample draws from its own counter-based stream keyed by
``(seed, sample index)``, so results do not depend on how samples are
scheduled across workers.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .problem import Distribution, standardize
from .solver import SolveOptions, solve
from .transform import fixed_parameter_problem

MAX_EXCLUDED_FRACTION = 0.05


class MonteCarloError(RuntimeError):
    pass


class SampleStream:
    """Reproducible uniform stream for one ``(seed, index)`` pair (Philox)."""

    def __init__(self, seed: int, index: int):
        ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def next_uniform(self) -> float:
        """Uniform on [0, 1)."""
        return float(self._gen.random())


def normal_draw(stream: SampleStream) -> float:
    """Standard normal by Box-Muller on two stream outputs."""
    u1 = 1.0 - stream.next_uniform()
    u2 = stream.next_uniform()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def uniform_draw(stream: SampleStream) -> float:
    """Uniform on [-1, 1]."""
    return 2.0 * stream.next_uniform() - 1.0


def standardized_sample(distributions: Sequence[Distribution], seed: int, index: int) -> np.ndarray:
    stream = SampleStream(seed, index)
    return np.array(
        [normal_draw(stream) if dist.kind == "normal" else uniform_draw(stream) for dist in distributions]
    )


def sample_parameters(distributions: Sequence[Distribution], seed: int, index: int) -> np.ndarray:
    """Physical parameter values for one sample."""
    xi = standardized_sample(distributions, seed, index)
    return np.array([standardize(dist, x) for dist, x in zip(distributions, xi)])


@dataclass
class SampleStats:
    n: int
    mean: np.ndarray
    std: np.ndarray
    min: np.ndarray
    max: np.ndarray
    stderr: np.ndarray
    excluded: int = 0

    @classmethod
    def from_samples(cls, values: np.ndarray, excluded: int = 0) -> "SampleStats":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        n = values.shape[0]
        std = values.std(axis=0, ddof=1) if n > 1 else np.zeros(values.shape[1])
        return cls(
            n=n,
            mean=values.mean(axis=0),
            std=std,
            min=values.min(axis=0),
            max=values.max(axis=0),
            stderr=std / math.sqrt(n),
            excluded=excluded,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "min": self.min.tolist(),
            "max": self.max.tolist(),
            "stderr": self.stderr.tolist(),
            "excluded": self.excluded,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleStats":
        arrays = {k: np.array(data[k], dtype=float) for k in ("mean", "std", "min", "max", "stderr")}
        return cls(n=int(data["n"]), excluded=int(data["excluded"]), **arrays)


@dataclass
class MonteCarloResult:
    stats: SampleStats
    optima: np.ndarray  # (N, d)
    converged: np.ndarray  # (N,) bool
    params: np.ndarray  # (N, p) physical parameter values
    seed: int


def _fixed_problem(prob, xi):
    if hasattr(prob, "fixed_problem"):
        return prob.fixed_problem(xi)
    return fixed_parameter_problem(prob, xi)


def _solve_one(prob, seed: int, index: int, start, opts: SolveOptions):
    xi = standardized_sample(prob.distributions, seed, index)
    dp = _fixed_problem(prob, xi)
    run_opts = SolveOptions(**{**vars(opts), "initial_point": np.asarray(start, dtype=float)})
    try:
        res = solve(dp, run_opts)
        x, ok = res.a_star, bool(res.converged)
    except (FloatingPointError, ValueError, ArithmeticError):
        x, ok = np.full(dp.dim, np.nan), False
    return xi, x, ok


def _solve_chunk(args):
    prob, seed, indices, start, opts = args
    return [_solve_one(prob, seed, i, start, opts) for i in indices]


def mc_solve(
    prob,
    samples: int,
    seed: int,
    start: Sequence[float],
    opts: Optional[SolveOptions] = None,
    workers: int = 1,
) -> MonteCarloResult:
    """Solve the problem at ``samples`` independent parameter draws.

    Non-converged samples are excluded from the statistics; more than 5%
    exclusions raise :class:`MonteCarloError`.
    """
    if samples < 2:
        raise ValueError(f"Monte Carlo needs at least 2 samples, got {samples}")
    opts = opts or SolveOptions()
    start = np.asarray(start, dtype=float).ravel()
    if start.size != prob.d:
        raise ValueError(f"start point has {start.size} entries, problem has {prob.d} decision variables")
    if workers <= 1:
        rows = [_solve_one(prob, seed, i, start, opts) for i in range(samples)]
    else:
        chunks = np.array_split(np.arange(samples), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_solve_chunk, [(prob, seed, c.tolist(), start, opts) for c in chunks])
            rows = [row for part in parts for row in part]

    xis = np.array([r[0] for r in rows]).reshape(samples, -1)
    optima = np.array([r[1] for r in rows]).reshape(samples, prob.d)
    converged = np.array([r[2] for r in rows], dtype=bool)
    excluded = int(samples - converged.sum())
    if excluded > MAX_EXCLUDED_FRACTION * samples:
        raise MonteCarloError(f"{excluded} of {samples} inner solves did not converge")
    params = np.array(
        [[standardize(dist, x) for dist, x in zip(prob.distributions, row)] for row in xis]
    ).reshape(samples, len(prob.distributions))
    stats = SampleStats.from_samples(optima[converged], excluded)
    return MonteCarloResult(stats, optima, converged, params, int(seed))


def write_samples_csv(path, result: MonteCarloResult, names: Sequence[str]) -> None:
    """``sample,<names...>,converged`` with one row per sample."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", *names, "converged"])
        for i, (row, ok) in enumerate(zip(result.optima, result.converged)):
            writer.writerow([i, *(repr(float(v)) for v in row), int(ok)])
