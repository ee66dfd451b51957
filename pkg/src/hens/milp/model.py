"""Solver-agnostic MILP container with deterministic naming and bookkeeping."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class MilpVar:
    name: str
    lb: float
    ub: float
    binary: bool = False


@dataclass(frozen=True)
class MilpRow:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", ">=", "=="
    rhs: float


@dataclass
class MilpModel:
    name: str
    variables: dict[str, MilpVar] = field(default_factory=dict)
    rows: list[MilpRow] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    metadata: dict = field(default_factory=dict)

    def add_var(self, name: str, lb: float, ub: float, binary: bool = False) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        if binary and not (lb >= 0.0 and ub <= 1.0):
            raise ValueError(f"binary {name} must have bounds within [0, 1]")
        self.variables[name] = MilpVar(name, float(lb), float(ub), binary)
        return name

    def add_row(self, name: str, terms, sense: str, rhs: float):
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"bad sense {sense!r}")
        clean = tuple((v, float(c)) for v, c in terms if c != 0.0)
        for v, _ in clean:
            if v not in self.variables:
                raise KeyError(f"row {name} references unknown variable {v}")
        self.rows.append(MilpRow(name, clean, sense, float(rhs)))

    def add_objective(self, var: str, coef: float):
        if var not in self.variables:
            raise KeyError(f"objective references unknown variable {var}")
        if coef:
            self.objective[var] = self.objective.get(var, 0.0) + float(coef)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_binaries(self) -> int:
        return sum(1 for v in self.variables.values() if v.binary)

    @property
    def binary_names(self) -> list[str]:
        return [v.name for v in self.variables.values() if v.binary]

    def row(self, name: str) -> MilpRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def rows_named(self, prefix: str) -> list[MilpRow]:
        return [r for r in self.rows if r.name.startswith(prefix)]

    # ---- verification helpers --------------------------------------------------

    def check_point(self, values: dict[str, float], tol: float = 1e-6) -> list[str]:
        """Names of rows/bounds the given point violates beyond tol."""
        bad = []
        for v in self.variables.values():
            x = values.get(v.name, 0.0)
            if x < v.lb - tol or x > v.ub + tol:
                bad.append(f"bound:{v.name}")
        for r in self.rows:
            lhs = sum(c * values.get(v, 0.0) for v, c in r.terms)
            if r.sense == "<=" and lhs > r.rhs + tol:
                bad.append(r.name)
            elif r.sense == ">=" and lhs < r.rhs - tol:
                bad.append(r.name)
            elif r.sense == "==" and abs(lhs - r.rhs) > tol:
                bad.append(r.name)
        return bad

    def objective_value(self, values: dict[str, float]) -> float:
        return self.objective_constant + sum(c * values.get(v, 0.0) for v, c in self.objective.items())

    # ---- determinism -------------------------------------------------------------

    def canonical_dict(self) -> dict:
        return {
            "name": self.name,
            "variables": [[v.name, v.lb, v.ub, v.binary] for v in self.variables.values()],
            "rows": [[r.name, list(map(list, r.terms)), r.sense, r.rhs] for r in self.rows],
            "objective": sorted(self.objective.items()),
            "objective_constant": self.objective_constant,
        }

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":")).encode()

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()
