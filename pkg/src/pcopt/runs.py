"""End-to-end runs (polynomial chaos and Monte Carlo) and their JSON reports."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Mapping, Optional, Sequence

import numpy as np

from . import builtin
from .diagnostics import interchange_gap_bound
from .montecarlo import MonteCarloResult, SampleStats, mc_solve, write_samples_csv
from .orthopoly import Basis
from .pce import Expansion, MomentSummary, moment_rule_size, moments
from .problem import StochasticProblem
from .quadrature import product_gauss_rule
from .solver import DualGapError, SolveOptions, SolveResult, dual_gap, solve
from .transform import basis_families, default_rule, initial_coefficients, transform

REPORT_VERSION = 1


@dataclass
class RunReport:
    problem: dict
    method: str
    converged: bool
    basis: Optional[dict] = None
    quadrature_nodes: Optional[int] = None
    constraint_mode: Optional[str] = None
    coefficients: Optional[list] = None
    moments: Optional[dict] = None
    statistics: Optional[dict] = None
    kkt: Optional[dict] = None
    dual_gap: Optional[float] = None
    diagnostics: Optional[dict] = None
    summaries: dict = field(default_factory=dict)
    label: Optional[str] = None
    seed: Optional[int] = None
    timing: dict = field(default_factory=lambda: {"wall_seconds": 0.0})
    version: int = REPORT_VERSION

    @property
    def mean(self) -> np.ndarray:
        src = self.moments if self.method == "pc" else self.statistics
        return np.array(src["mean"])

    @property
    def std(self) -> np.ndarray:
        src = self.moments if self.method == "pc" else self.statistics
        return np.array(src["std"])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def dump_document(reports: Sequence[RunReport], comparison: Optional[list] = None) -> str:
    """One JSON document: a single report, or a bundle of runs."""
    if len(reports) == 1 and comparison is None:
        return reports[0].to_json()
    doc = {"runs": [r.to_dict() for r in reports]}
    if comparison is not None:
        doc["comparison"] = comparison
    return json.dumps(doc, indent=2, sort_keys=True)


def load_document(text: str) -> list[RunReport]:
    data = json.loads(text)
    if "runs" in data:
        return [RunReport.from_dict(r) for r in data["runs"]]
    return [RunReport.from_dict(data)]


@dataclass
class PCRun:
    report: RunReport
    expansion: Expansion
    result: SolveResult
    moments: MomentSummary


def _finite_or_none(x):
    return float(x) if x is not None and math.isfinite(x) else None


def run_pc(
    prob,
    order: int,
    quad: Optional[int] = None,
    mode: str = "expectation",
    start: Optional[Sequence[float]] = None,
    opts: Optional[SolveOptions] = None,
    max_k: int = 4,
    diagnostics: bool = False,
    metrics: Optional[Mapping[str, np.ndarray]] = None,
    label: Optional[str] = None,
) -> PCRun:
    """Expand, transform, solve and summarize one problem."""
    t0 = time.perf_counter()
    opts = opts or SolveOptions()
    if isinstance(prob, StochasticProblem):
        families = basis_families(prob)
    else:
        families = tuple(dist.family for dist in prob.distributions)
    basis = Basis(families, order)
    n_nodes = quad if quad is not None else 2 * order + 2
    rule = default_rule(basis, n_nodes)
    if isinstance(prob, StochasticProblem):
        dp = transform(prob, basis, rule, mode)
    else:
        dp = prob.transform(basis, rule, mode)

    start = np.zeros(prob.d) if start is None else np.asarray(start, dtype=float)
    a0 = initial_coefficients(start, prob.d, len(basis))
    run_opts = SolveOptions(**{**vars(opts), "initial_point": a0})
    result = solve(dp, run_opts)

    expansion = Expansion.from_vector(basis, result.a_star, prob.d)
    mom_rule = product_gauss_rule(families, moment_rule_size(order, max_k, at_least=n_nodes))
    summary = moments(expansion, mom_rule, max_k)

    gap = None
    if dp.constrained:
        try:
            gap = dual_gap(dp, result, opts)
        except DualGapError:
            gap = None

    diag = None
    if diagnostics:
        diag = interchange_gap_bound(prob, rule, start, opts).to_dict()

    summaries = {}
    for name, weights in (metrics or {}).items():
        coeffs = np.asarray(weights, dtype=float) @ expansion.coeffs
        summaries[name] = {"mean": float(coeffs[0]), "std": float(np.sqrt(np.sum(coeffs[1:] ** 2)))}

    report = RunReport(
        problem=prob.digest(),
        method="pc",
        converged=bool(result.converged),
        basis={
            "families": [fam.value for fam in basis.families],
            "order": order,
            "index_set": [list(idx) for idx in basis.index_set],
        },
        quadrature_nodes=n_nodes,
        constraint_mode=mode if dp.constrained else None,
        coefficients=expansion.coeffs.tolist(),
        moments=summary.to_dict(),
        kkt=result.kkt.to_dict(),
        dual_gap=_finite_or_none(gap),
        diagnostics=diag,
        summaries=summaries,
        label=label,
        timing={"wall_seconds": time.perf_counter() - t0},
    )
    return PCRun(report, expansion, result, summary)


def run_mc(
    prob,
    samples: int,
    seed: int,
    start: Optional[Sequence[float]] = None,
    opts: Optional[SolveOptions] = None,
    workers: int = 1,
    metrics: Optional[Mapping[str, np.ndarray]] = None,
    csv_path=None,
    label: Optional[str] = None,
) -> tuple[RunReport, MonteCarloResult]:
    t0 = time.perf_counter()
    start = np.zeros(prob.d) if start is None else np.asarray(start, dtype=float)
    mc = mc_solve(prob, samples, seed, start, opts, workers)
    if csv_path is not None:
        write_samples_csv(csv_path, mc, prob.decision_names)
    good = mc.optima[mc.converged]
    summaries = {}
    for name, weights in (metrics or {}).items():
        stats = SampleStats.from_samples((good @ np.asarray(weights, dtype=float))[:, None])
        summaries[name] = {"mean": float(stats.mean[0]), "std": float(stats.std[0])}
    report = RunReport(
        problem=prob.digest(),
        method="mc",
        converged=True,
        statistics=mc.stats.to_dict(),
        summaries=summaries,
        label=label,
        seed=int(seed),
        timing={"wall_seconds": time.perf_counter() - t0},
    )
    return report, mc


def compare(pc: RunReport, mc: RunReport) -> list[dict]:
    """Rows of PC-versus-MC means and standard deviations."""
    rows = []
    names = pc.problem["decision"]

    def row(name, pm, ps, mm, ms):
        rel = abs(pm - mm) / abs(mm) if mm != 0 else (0.0 if pm == 0 else math.inf)
        return {
            "quantity": name,
            "pc_mean": pm,
            "mc_mean": mm,
            "rel_diff_mean": rel,
            "pc_std": ps,
            "mc_std": ms,
            "abs_diff_std": abs(ps - ms),
        }

    for i, name in enumerate(names):
        rows.append(row(name, float(pc.mean[i]), float(pc.std[i]), float(mc.mean[i]), float(mc.std[i])))
    for name in pc.summaries:
        if name in mc.summaries:
            a, b = pc.summaries[name], mc.summaries[name]
            rows.append(row(name, a["mean"], a["std"], b["mean"], b["std"]))
    return rows


def format_comparison(rows: list[dict], title: str = "") -> str:
    header = f"{'quantity':<18}{'PC mean':>12}{'MC mean':>12}{'rel diff':>10}{'PC std':>10}{'MC std':>10}"
    lines = [title] if title else []
    lines += [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r['quantity']:<18}{r['pc_mean']:>12.4f}{r['mc_mean']:>12.4f}{r['rel_diff_mean']:>10.2%}"
            f"{r['pc_std']:>10.4f}{r['mc_std']:>10.4f}"
        )
    return "\n".join(lines)


# ------------------------------------------------------------ built-in examples

SCHEDULING_ORDER = 4


def example_runs(
    name: str,
    method: str = "pc",
    samples: int = 1000,
    seed: int = 0,
    equilibrium: Optional[int] = None,
    order: Optional[int] = None,
    workers: int = 1,
    diagnostics: bool = False,
) -> list[RunReport]:
    """Run a built-in example; returns PC reports before MC reports."""
    if name not in builtin.EXAMPLES:
        raise ValueError(f"unknown example {name!r}; choose from {', '.join(builtin.EXAMPLES)}")
    if method not in ("pc", "mc", "both"):
        raise ValueError(f"method must be pc, mc or both, got {method!r}")
    cases = []
    if name == "quadratic":
        prob = builtin.quadratic_problem()
        cases.append((prob, dict(order=order or builtin.QUADRATIC_ORDER), [0.0], None, None))
    elif name == "himmelblau":
        prob = builtin.himmelblau_problem()
        which = range(1, 5) if equilibrium is None else [equilibrium]
        for i in which:
            if not 1 <= i <= 4:
                raise ValueError(f"equilibrium must be 1..4, got {i}")
            cases.append(
                (prob, dict(order=order or builtin.HIMMELBLAU_ORDER), builtin.HIMMELBLAU_STARTS[i - 1], None, f"equilibrium {i}")
            )
    else:
        inst = builtin.scheduling_instance()
        r = order or SCHEDULING_ORDER
        # as many nodes as basis terms: the collocation system interpolates per-node optima
        pc_args = dict(order=r, quad=r + 1, mode="collocation")
        cases.append((inst.program, pc_args, np.zeros(inst.program.d), inst.metric_weights(), None))

    reports = []
    if method in ("pc", "both"):
        for prob, args, start, metrics, label in cases:
            use_diag = diagnostics
            reports.append(
                run_pc(prob, start=start, metrics=metrics, label=label, diagnostics=use_diag, **args).report
            )
    if method in ("mc", "both"):
        for prob, args, start, metrics, label in cases:
            reports.append(run_mc(prob, samples, seed, start, metrics=metrics, label=label, workers=workers)[0])
    return reports
