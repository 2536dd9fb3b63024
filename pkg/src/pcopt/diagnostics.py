"""Numerical checks of the interchange-error bound and of convexity preservation."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .expressions import eval_expr
from .montecarlo import SampleStream
from .orthopoly import Basis, PolynomialFamily
from .problem import StochasticProblem, standardize
from .quadrature import QuadratureRule
from .solver import SolveOptions, solve
from .transform import basis_families, fixed_parameter_problem, transform

LIPSCHITZ_SAMPLES = 2000
HULL_INFLATION = 0.10
CONVEXITY_TOL = 1e-10
DEVIATION_RESOLUTION = 1e-12


class InconsistentBoundError(RuntimeError):
    """The empirical bound fell below the observed gap."""


@dataclass
class GapBoundReport:
    lipschitz_L: float
    weighted_deviation: float
    bound: float
    observed_gap: float
    empirical: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GapBoundReport":
        return cls(**dict(data))


def estimate_lipschitz(
    f,
    decision_names: Sequence[str],
    lambda_nodes: Sequence[Mapping[str, float]],
    intervals,
    samples: int = LIPSCHITZ_SAMPLES,
    seed: int = 0,
    anchor_pairs: Sequence[tuple] = (),
) -> float:
    """Largest sampled difference quotient of ``f`` in ``x`` over a box.

    ``f`` is an :class:`Expression` or a callable ``f(x, node)`` taking an
    ``(S, d)`` array of decision points and one parameter binding. Pairs
    are drawn uniformly from ``intervals`` (one ``(lo, hi)`` per decision
    variable), pair ``k`` from its own stream, and every pair is tried at
    every binding in ``lambda_nodes``. Extra pairs ``(x1, x2, node_index)``
    may be supplied through ``anchor_pairs``. The result is a lower
    estimate of the true local constant.
    """
    intervals = np.atleast_2d(np.asarray(intervals, dtype=float))
    if intervals.shape != (len(decision_names), 2):
        raise ValueError("need one (lo, hi) interval per decision variable")
    width = intervals[:, 1] - intervals[:, 0]
    if np.any(width <= 0):
        raise ValueError("Lipschitz estimation needs intervals of positive width")
    fun = _objective_function(f, decision_names)
    d = len(decision_names)
    draws = np.empty((samples, 2, d))
    for k in range(samples):
        stream = SampleStream(seed, k)
        draws[k] = [[stream.next_uniform() for _ in range(d)] for _ in range(2)]
    x1 = intervals[:, 0] + width * draws[:, 0, :]
    x2 = intervals[:, 0] + width * draws[:, 1, :]
    dist = np.linalg.norm(x1 - x2, axis=1)
    keep = dist > 0
    best = 0.0
    if np.any(keep):
        for node in lambda_nodes:
            diff = np.abs(fun(x1[keep], node) - fun(x2[keep], node))
            best = max(best, float(np.max(diff / dist[keep])))
    for a, b, q in anchor_pairs:
        a, b = np.atleast_1d(a).astype(float), np.atleast_1d(b).astype(float)
        gap = float(np.linalg.norm(a - b))
        if gap > 0:
            pair = fun(np.vstack([a, b]), lambda_nodes[q])
            best = max(best, abs(float(pair[0] - pair[1])) / gap)
    return best


def _objective_function(f, decision_names):
    if callable(f):
        return lambda x, node: np.asarray(f(x, node), dtype=float).reshape(x.shape[0])

    def fun(x, node):
        env = dict(node, **{n: x[:, i] for i, n in enumerate(decision_names)})
        return np.broadcast_to(np.asarray(eval_expr(f, env), dtype=float), (x.shape[0],))

    return fun


def _problem_pieces(prob, rule: QuadratureRule):
    """Expected-value problem, per-node problems and objective of either problem type."""
    if isinstance(prob, StochasticProblem):
        mean_problem = transform(prob, Basis(basis_families(prob), 0), rule)
        fixed = [fixed_parameter_problem(prob, node) for node in rule.nodes]
        objective = prob.minimization_objective()
    else:
        mean_problem = prob.transform(Basis((PolynomialFamily.HERMITE,), 0), rule)
        fixed = [prob.fixed_problem(node) for node in rule.nodes]
        objective = prob.objective_values
    nodes = [
        {name: float(standardize(dist, x)) for (name, dist), x in zip(zip(prob.random_names, prob.distributions), node)}
        for node in rule.nodes
    ]
    return mean_problem, fixed, objective, nodes


def interchange_gap_bound(
    prob,
    rule: QuadratureRule,
    start: Sequence[float],
    opts: Optional[SolveOptions] = None,
    samples: int = LIPSCHITZ_SAMPLES,
    seed: int = 0,
) -> GapBoundReport:
    """Observed ``|E[min f] - min E[f]|`` next to its Lipschitz bound.

    ``q`` minimizes the quadrature expectation of ``f`` and ``p_hat`` is
    the minimizer at each node. Constrained problems use the constrained
    solver for both, with expected constraints for ``q``. The Lipschitz
    constant is estimated over the hull of all minimizers inflated by 10%,
    with the ``(p_hat, q)`` pairs included so that the bound dominates the
    gap by construction unless an inner solve failed. Deviations below
    ``1e-12 (1 + |q|)`` are treated as zero.
    """
    opts = opts or SolveOptions()
    start = np.asarray(start, dtype=float).ravel()
    mean_problem, fixed, f, nodes = _problem_pieces(prob, rule)

    run_opts = SolveOptions(**{**vars(opts), "initial_point": start})
    res_q = solve(mean_problem, run_opts)
    if not res_q.converged:
        raise RuntimeError(f"expected-value solve did not converge: {res_q.message}")
    q = res_q.a_star
    min_of_mean = res_q.objective_value

    p_hat, f_hat = [], []
    for node, dp in zip(rule.nodes, fixed):
        res = solve(dp, run_opts)
        if not res.converged:
            raise RuntimeError(f"per-node solve at {node.tolist()} did not converge: {res.message}")
        p_hat.append(res.a_star)
        f_hat.append(res.objective_value)
    p_hat = np.array(p_hat)
    mean_of_min = float(rule.weights @ np.array(f_hat))
    observed = abs(mean_of_min - min_of_mean)
    deviations = np.linalg.norm(p_hat - q, axis=1)
    deviations[deviations <= DEVIATION_RESOLUTION * (1.0 + np.linalg.norm(q))] = 0.0
    weighted_dev = float(rule.weights @ deviations)

    pts = np.vstack([p_hat, q[None, :]])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    if weighted_dev == 0.0:
        # every minimizer coincides with q; L is reported over a unit box around it
        lo, hi = q - 0.5, q + 0.5
    pad = HULL_INFLATION * (hi - lo)
    pad[pad == 0] = HULL_INFLATION
    anchors = [(p_hat[k], q, k) for k in range(len(rule))]
    L = estimate_lipschitz(
        f, prob.decision_names, nodes, np.column_stack([lo - pad, hi + pad]), samples, seed, anchors
    )
    bound = L * weighted_dev
    if bound < observed - 1e-6:
        raise InconsistentBoundError(
            f"bound {bound:.3e} is below the observed gap {observed:.3e}; "
            "an inner solve failed or the rule is under-resolved"
        )
    return GapBoundReport(L, weighted_dev, bound, observed)


def convexity_probe(
    F: Callable[[np.ndarray], float],
    dim: int,
    trials: int,
    seed: int = 0,
    radius: float = 1.0,
) -> tuple[int, float]:
    """Count midpoint-convexity violations of ``F`` on random segments in a box.

    A violation is ``F(t b + (1-t) c) - (t F(b) + (1-t) F(c))`` exceeding
    ``1e-10`` times the magnitude of the chord value (at least 1).
    Returns ``(violations, worst excess)``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    count, worst = 0, 0.0
    for k in range(trials):
        stream = SampleStream(seed, k)
        b = radius * (2.0 * np.array([stream.next_uniform() for _ in range(dim)]) - 1.0)
        c = radius * (2.0 * np.array([stream.next_uniform() for _ in range(dim)]) - 1.0)
        theta = stream.next_uniform()
        chord = theta * F(b) + (1.0 - theta) * F(c)
        excess = F(theta * b + (1.0 - theta) * c) - chord
        worst = max(worst, excess)
        if excess > CONVEXITY_TOL * max(1.0, abs(chord)):
            count += 1
    return count, worst
