"""Built-in example instances: random quadratic, Himmelblau, task scheduling."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .linear import LinearStochasticProgram
from .problem import Distribution, StochasticProblem, parse_problem

EXAMPLES = ("quadratic", "himmelblau", "scheduling")

QUADRATIC_ORDER = 2
HIMMELBLAU_ORDER = 1
# one start per basin of attraction, in the order of the four minima
HIMMELBLAU_STARTS = ((3.0, 3.0), (-3.0, 3.0), (-4.0, -3.0), (4.0, -2.0))


def problem_text(name: str) -> str:
    return resources.files("pcopt").joinpath("data").joinpath(f"{name}.prob").read_text(encoding="utf-8")


def quadratic_problem() -> StochasticProblem:
    return parse_problem(problem_text("quadratic"), name="quadratic")


def himmelblau_problem() -> StochasticProblem:
    return parse_problem(problem_text("himmelblau"), name="himmelblau")


def himmelblau_deterministic() -> StochasticProblem:
    """Himmelblau with the random shift removed."""
    text = problem_text("himmelblau").replace(" + 2.0*lambda", "")
    return parse_problem(text, name="himmelblau-deterministic")


def himmelblau_value(x1, x2):
    return (x1**2 + x2 - 11.0) ** 2 + (x1 + x2**2 - 7.0) ** 2


def himmelblau_grid(n: int = 101, lo: float = -5.0, hi: float = 5.0) -> np.ndarray:
    """Rows ``(x1, x2, f)`` of the deterministic cost on a uniform ``n x n`` grid."""
    t = np.linspace(lo, hi, n)
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    return np.column_stack([x1.ravel(), x2.ravel(), himmelblau_value(x1, x2).ravel()])


@dataclass(frozen=True)
class Task:
    name: str
    duration: float  # carried for completeness; the relaxed LP does not use it
    reward: float
    load: float
    rest: bool = False


@dataclass(frozen=True)
class SchedulingInstance:
    """Fractional task-to-slot assignment with a random load threshold.

    Variables ``x[i, j]`` are the fraction of task ``i`` done in slot ``j``
    (flattened task-major). Constraints, with ``beta`` the random threshold:

    * ``sum_j x[i, j] <= 1`` for every task (availability);
    * ``sum_j x[i, j] <= beta`` for rest tasks (rest budget);
    * ``sum_i load_i x[i, j] <= beta`` for every slot (task load);
    * ``x >= 0``.

    The objective maximizes total reward.
    """

    tasks: tuple[Task, ...]
    slots: int
    threshold: Distribution
    program: LinearStochasticProgram

    @property
    def work_mask(self) -> np.ndarray:
        return np.repeat([not t.rest for t in self.tasks], self.slots)

    def metric_weights(self) -> dict[str, np.ndarray]:
        """Linear functionals giving the completed fraction of work and rest tasks."""
        work = self.work_mask.astype(float)
        rest = 1.0 - work
        return {
            "task_completion": work / max(work.sum() / self.slots, 1),
            "rest_usage": rest / max(rest.sum() / self.slots, 1),
        }


def scheduling_instance(
    n_tasks: int = 3,
    n_rest: int = 3,
    slots: int = 10,
    reward: float = 1.0,
    task_load: float = 3.0,
    rest_load: float = -1.0,
    threshold: Distribution = Distribution.normal(1.0, 0.2),
) -> SchedulingInstance:
    tasks = tuple(Task(f"task{i + 1}", 1.0, reward, task_load) for i in range(n_tasks)) + tuple(
        Task(f"rest{i + 1}", 1.0, reward, rest_load, rest=True) for i in range(n_rest)
    )
    nt = len(tasks)
    d = nt * slots
    rows, b0, b1 = [], [], []

    def block(i):
        row = np.zeros(d)
        row[i * slots:(i + 1) * slots] = 1.0
        return row

    for i in range(nt):
        rows.append(block(i)); b0.append(1.0); b1.append(0.0)
    for i, task in enumerate(tasks):
        if task.rest:
            rows.append(block(i)); b0.append(0.0); b1.append(1.0)
    loads = np.array([t.load for t in tasks])
    for j in range(slots):
        row = np.zeros(d)
        row[np.arange(nt) * slots + j] = loads
        rows.append(row); b0.append(0.0); b1.append(1.0)
    rows.extend(-np.eye(d)); b0.extend([0.0] * d); b1.extend([0.0] * d)

    names = tuple(f"x_{t.name}_{j + 1}" for t in tasks for j in range(slots))
    program = LinearStochasticProgram(
        c=np.repeat([t.reward for t in tasks], slots),
        A=np.array(rows),
        b0=np.array(b0),
        b1=np.array(b1),
        distribution=threshold,
        sense="maximize",
        decision_names=names,
        param_name="beta",
        name="scheduling",
    )
    return SchedulingInstance(tasks, slots, threshold, program)
