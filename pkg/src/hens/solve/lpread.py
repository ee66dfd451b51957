"""Reader for the LP grammar subset produced by the writer.

Used by the bundled solver backend and by round-trip tests.  Tolerates
multi-line constraint bodies; sections are case-insensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class LpProblem:
    name: str = ""
    minimize: bool = True
    objective: dict[str, float] = field(default_factory=dict)
    rows: list[tuple[str, dict[str, float], str, float]] = field(default_factory=list)
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    binaries: set[str] = field(default_factory=set)
    integers: set[str] = field(default_factory=set)
    variable_order: list[str] = field(default_factory=list)

    def ensure_var(self, name: str):
        if name not in self.bounds:
            self.bounds[name] = (0.0, float("inf"))
            self.variable_order.append(name)

    def set_bounds(self, name: str, lb: float, ub: float):
        self.ensure_var(name)
        self.bounds[name] = (lb, ub)


_TERM_RE = re.compile(r"([+-]?)\s*(\d+\.?\d*(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][A-Za-z0-9_]*)")
_SENSE_RE = re.compile(r"(<=|>=|=<|=>|=)")
_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?inf(?:inity)?"


def _parse_number(tok: str) -> float:
    t = tok.lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return float("inf")
    if t in ("-inf", "-infinity"):
        return float("-inf")
    return float(tok)


def _parse_expr(text: str) -> dict[str, float]:
    coefs: dict[str, float] = {}
    for sign, num, name in _TERM_RE.findall(text):
        coef = float(num) if num else 1.0
        if sign == "-":
            coef = -coef
        coefs[name] = coefs.get(name, 0.0) + coef
    return coefs


def parse_lp(text: str) -> LpProblem:
    prob = LpProblem()
    section = None
    pending = ""  # accumulated constraint text until its sense shows up
    pending_name = ""
    row_counter = 0

    def flush_row(body: str, name: str):
        nonlocal row_counter
        m = _SENSE_RE.search(body)
        if not m:
            raise ValueError(f"constraint {name or row_counter} has no sense: {body!r}")
        lhs, sense, rhs_text = body[: m.start()], m.group(1), body[m.end():]
        sense = {"=<": "<=", "=>": ">=", "=": "==", "<=": "<=", ">=": ">="}[sense]
        rhs = _parse_number(rhs_text.strip())
        prob.rows.append((name or f"r{row_counter}", _parse_expr(lhs), sense, rhs))
        row_counter += 1

    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        header = line.strip().lower()
        if header in ("minimize", "minimise", "min"):
            section, prob.minimize = "objective", True
            continue
        if header in ("maximize", "maximise", "max"):
            section, prob.minimize = "objective", False
            continue
        if header in ("subject to", "st", "s.t.", "such that"):
            if pending:
                flush_row(pending, pending_name)
                pending, pending_name = "", ""
            section = "rows"
            continue
        if header == "bounds":
            if pending:
                flush_row(pending, pending_name)
                pending, pending_name = "", ""
            section = "bounds"
            continue
        if header in ("binaries", "binary", "bin"):
            section = "binaries"
            continue
        if header in ("general", "generals", "gen"):
            section = "integers"
            continue
        if header == "end":
            break

        if section == "objective":
            body = line.strip()
            if ":" in body:
                _, body = body.split(":", 1)
            for name, coef in _parse_expr(body).items():
                prob.objective[name] = prob.objective.get(name, 0.0) + coef
        elif section == "rows":
            body = line.strip()
            if ":" in body and not pending:
                pending_name, body = body.split(":", 1)
                pending_name = pending_name.strip()
            pending += " " + body
            if _SENSE_RE.search(pending):
                flush_row(pending, pending_name)
                pending, pending_name = "", ""
        elif section == "bounds":
            _parse_bound_line(prob, line.strip())
        elif section == "binaries":
            for name in line.split():
                prob.binaries.add(name)
                prob.ensure_var(name)
        elif section == "integers":
            for name in line.split():
                prob.integers.add(name)
                prob.ensure_var(name)

    if pending:
        flush_row(pending, pending_name)
    for coefs in [prob.objective] + [r[1] for r in prob.rows]:
        for name in coefs:
            prob.ensure_var(name)
    for b in prob.binaries:
        lb, ub = prob.bounds[b]
        prob.set_bounds(b, max(lb, 0.0), min(ub, 1.0))
    return prob


def _parse_bound_line(prob: LpProblem, line: str):
    two_sided = re.fullmatch(rf"({_NUM})\s*<=\s*(\w+)\s*<=\s*({_NUM})", line)
    if two_sided:
        lo, name, hi = two_sided.groups()
        prob.set_bounds(name, _parse_number(lo), _parse_number(hi))
        return
    one_sided = re.fullmatch(rf"(\w+)\s*(<=|>=|=)\s*({_NUM})", line)
    if one_sided:
        name, op, value = one_sided.groups()
        v = _parse_number(value)
        prob.ensure_var(name)
        lb, ub = prob.bounds[name]
        if op == "<=":
            prob.set_bounds(name, lb, v)
        elif op == ">=":
            prob.set_bounds(name, v, ub)
        else:
            prob.set_bounds(name, v, v)
        return
    free = re.fullmatch(r"(\w+)\s+free", line, re.IGNORECASE)
    if free:
        prob.set_bounds(free.group(1), float("-inf"), float("inf"))
        return
    raise ValueError(f"cannot parse bound line {line!r}")


def parse_lp_file(path: str | Path) -> LpProblem:
    prob = parse_lp(Path(path).read_text())
    prob.name = Path(path).stem
    return prob
