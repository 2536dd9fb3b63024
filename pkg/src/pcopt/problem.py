"""Stochastic optimization problems and the line-oriented problem file format.

Example file::

    [decision]
    x1, x2
    [random]
    lambda ~ normal(0.0, 0.1)
    [objective]
    minimize (1 + lambda)*x1^2 + x1
    [constraints]
    x1 + x2 - 1 <= 0
    x1 - x2 == 0
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expressions import Const, Expression, Neg, ParseError, Sub, parse_expr, to_text, variables
from .orthopoly import PolynomialFamily


class ProblemError(ValueError):
    """Invalid problem definition."""


class UndeclaredIdentifierError(ProblemError):
    def __init__(self, name: str, where: str = ""):
        super().__init__(f"undeclared identifier {name!r}" + (f" in {where}" if where else ""))
        self.name = name


class DuplicateIdentifierError(ProblemError):
    def __init__(self, name: str):
        super().__init__(f"duplicate identifier {name!r}")
        self.name = name


class InvalidDistributionError(ProblemError):
    pass


@dataclass(frozen=True)
class Distribution:
    """Normal(mean, std) or Uniform(lo, hi) law of one random parameter."""

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("normal", "uniform"):
            raise InvalidDistributionError(f"unknown distribution {self.kind!r}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidDistributionError("distribution parameters must be finite")
        if self.kind == "normal" and self.b <= 0:
            raise InvalidDistributionError(f"normal std must be positive, got {self.b}")
        if self.kind == "uniform" and self.b <= self.a:
            raise InvalidDistributionError(
                f"uniform bounds need lo < hi, got ({self.a}, {self.b})"
            )

    @classmethod
    def normal(cls, mean: float, std: float) -> "Distribution":
        return cls("normal", float(mean), float(std))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "Distribution":
        return cls("uniform", float(lo), float(hi))

    @property
    def family(self) -> PolynomialFamily:
        return PolynomialFamily.HERMITE if self.kind == "normal" else PolynomialFamily.LEGENDRE

    @property
    def mean(self) -> float:
        return self.a if self.kind == "normal" else 0.5 * (self.a + self.b)

    @property
    def variance(self) -> float:
        return self.b**2 if self.kind == "normal" else (self.b - self.a) ** 2 / 12.0

    def __str__(self) -> str:
        return f"{self.kind}({self.a!r}, {self.b!r})"


def standardize(dist: Distribution, xi):
    """Map a standardized variable to the physical parameter."""
    if dist.kind == "normal":
        return dist.a + dist.b * (np.asarray(xi, dtype=float) if np.ndim(xi) else xi)
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi_arr) > 1.0):
        raise ValueError("uniform parameters are standardized on [-1, 1]")
    out = dist.a + (dist.b - dist.a) * (xi_arr + 1.0) / 2.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StochasticProblem:
    decision_names: tuple[str, ...]
    random_params: tuple[tuple[str, Distribution], ...]
    objective: Expression
    sense: str = "minimize"
    inequality_constraints: tuple[Expression, ...] = ()
    equality_constraints: tuple[Expression, ...] = ()
    name: str = field(default="problem", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "decision_names", tuple(self.decision_names))
        object.__setattr__(self, "random_params", tuple(tuple(rp) for rp in self.random_params))
        object.__setattr__(self, "inequality_constraints", tuple(self.inequality_constraints))
        object.__setattr__(self, "equality_constraints", tuple(self.equality_constraints))
        if self.sense not in ("minimize", "maximize"):
            raise ProblemError(f"sense must be minimize or maximize, got {self.sense!r}")
        if not self.decision_names:
            raise ProblemError("at least one decision variable is required")
        seen = set()
        for ident in self.decision_names + self.random_names:
            if ident in seen:
                raise DuplicateIdentifierError(ident)
            seen.add(ident)
        for where, exprs in (
            ("objective", (self.objective,)),
            ("constraints", self.inequality_constraints + self.equality_constraints),
        ):
            for e in exprs:
                for ident in sorted(variables(e)):
                    if ident not in seen:
                        raise UndeclaredIdentifierError(ident, where)

    @property
    def random_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.random_params)

    @property
    def distributions(self) -> tuple[Distribution, ...]:
        return tuple(dist for _, dist in self.random_params)

    @property
    def d(self) -> int:
        return len(self.decision_names)

    @property
    def p(self) -> int:
        return len(self.random_params)

    @property
    def m(self) -> int:
        return len(self.inequality_constraints)

    @property
    def n(self) -> int:
        return len(self.equality_constraints)

    def minimization_objective(self) -> Expression:
        return self.objective if self.sense == "minimize" else Neg(self.objective)

    def physical_params(self, xi) -> dict:
        """Bind random parameter names to physical values at standardized ``xi``."""
        xi = np.asarray(xi, dtype=float)
        return {
            name: standardize(dist, xi[..., j]) for j, (name, dist) in enumerate(self.random_params)
        }

    def digest(self) -> dict:
        return {
            "name": self.name,
            "decision": list(self.decision_names),
            "random": {name: str(dist) for name, dist in self.random_params},
            "d": self.d,
            "p": self.p,
            "m": self.m,
            "n": self.n,
            "sense": self.sense,
        }

    def to_text(self) -> str:
        lines = ["[decision]", ", ".join(self.decision_names), "[random]"]
        lines += [f"{name} ~ {dist}" for name, dist in self.random_params]
        lines += ["[objective]", f"{self.sense} {to_text(self.objective)}"]
        if self.m or self.n:
            lines.append("[constraints]")
            lines += [f"{to_text(g)} <= 0" for g in self.inequality_constraints]
            lines += [f"{to_text(h)} == 0" for h in self.equality_constraints]
        return "\n".join(lines) + "\n"


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_RANDOM = re.compile(
    r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*~\s*(?P<kind>[A-Za-z]+)\s*\((?P<args>[^)]*)\)\s*$"
)
_SECTIONS = ("decision", "random", "objective", "constraints")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_problem(text: str, name: str = "problem") -> StochasticProblem:
    """Parse the problem file format into a validated :class:`StochasticProblem`."""
    section = None
    decision: list[str] = []
    random_params: list[tuple[str, Distribution]] = []
    objective = None
    sense = None
    ineq: list[Expression] = []
    eq: list[Expression] = []
    seen_sections = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        stripped = line.strip()
        if stripped.startswith("["):
            m = re.fullmatch(r"\[\s*([A-Za-z]+)\s*\]", stripped)
            if not m or m.group(1).lower() not in _SECTIONS:
                raise ParseError(f"unknown section header {stripped!r}", lineno, indent + 1)
            section = m.group(1).lower()
            if section in seen_sections:
                raise ParseError(f"section [{section}] appears twice", lineno, indent + 1)
            seen_sections.add(section)
            continue
        if section is None:
            raise ParseError("content before the first section header", lineno, indent + 1)

        if section == "decision":
            col = indent + 1
            for part in line.split(","):
                ident = part.strip()
                pcol = col + len(part) - len(part.lstrip())
                if not _IDENT.match(ident):
                    raise ParseError(f"invalid identifier {ident!r}", lineno, pcol)
                if ident in decision:
                    raise DuplicateIdentifierError(ident)
                decision.append(ident)
                col += len(part) + 1
        elif section == "random":
            m = _RANDOM.match(line)
            if not m:
                raise ParseError(
                    "expected 'name ~ normal(mean, std)' or 'name ~ uniform(lo, hi)'",
                    lineno,
                    indent + 1,
                )
            kind = m.group("kind").lower()
            if kind not in ("normal", "uniform"):
                raise ParseError(f"unknown distribution {kind!r}", lineno, m.start("kind") + 1)
            try:
                args = [float(a) for a in m.group("args").split(",")]
            except ValueError:
                raise ParseError("distribution parameters must be numbers", lineno, m.start("args") + 1) from None
            if len(args) != 2:
                raise ParseError(f"{kind} takes two parameters", lineno, m.start("args") + 1)
            random_params.append((m.group("name"), Distribution(kind, *args)))
        elif section == "objective":
            if objective is not None:
                raise ParseError("only one objective line is allowed", lineno, indent + 1)
            m = re.match(r"\s*(minimize|maximize|min|max)\b", line)
            if not m:
                raise ParseError("objective must start with 'minimize' or 'maximize'", lineno, indent + 1)
            sense = "minimize" if m.group(1).startswith("min") else "maximize"
            objective = parse_expr(line[m.end():], lineno, m.end() + 1)
        else:
            m = re.search(r"<=|>=|==", line)
            if not m:
                raise ParseError("constraint needs one of '<=', '>=', '=='", lineno, indent + 1)
            lhs = parse_expr(line[: m.start()], lineno, 1)
            rhs = parse_expr(line[m.end():], lineno, m.end() + 1)
            expr = lhs if _is_zero(rhs) else Sub(lhs, rhs)
            if m.group() == "<=":
                ineq.append(expr)
            elif m.group() == ">=":
                ineq.append(Neg(expr))
            else:
                eq.append(expr)

    if not decision:
        raise ProblemError("missing [decision] section")
    if objective is None:
        raise ProblemError("missing [objective] section")
    return StochasticProblem(
        tuple(decision), tuple(random_params), objective, sense, tuple(ineq), tuple(eq), name=name
    )


def _is_zero(e: Expression) -> bool:
    return isinstance(e, Const) and e.value == 0.0


def load_problem(path) -> StochasticProblem:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), name=path.stem)
