"""CPLEX-style LP text writer with reversible name sanitization.

Bracketed model names (``q[H1,C1,2]``) are flattened to LP-safe tokens;
the mapping is embedded as a comment block so a file round-trips without
the in-memory model.
"""

from __future__ import annotations

from pathlib import Path

from ..case import HensError
from ..milp.model import MilpModel


class NameCollisionError(HensError):
    pass


_SANITIZE = str.maketrans({"[": "_", "]": "_", ",": "_", ".": "_", ":": "_"})


def sanitize_names(names) -> dict[str, str]:
    """model name -> LP name; raises when two names collide after flattening."""
    mapping: dict[str, str] = {}
    seen: dict[str, str] = {}
    for name in names:
        lp = name.translate(_SANITIZE)
        if lp[0].isdigit():
            lp = "v_" + lp
        if lp in seen:
            raise NameCollisionError(f"{name!r} and {seen[lp]!r} both sanitize to {lp!r}")
        seen[lp] = name
        mapping[name] = lp
    return mapping


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".17g")


def _term_str(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    body = name if mag == 1.0 else f"{_num(mag)} {name}"
    return f"{sign} {body}" if not first else (f"{sign}{body}" if sign else body)


def lp_text(model: MilpModel) -> str:
    var_map = sanitize_names(model.variables.keys())
    row_map = sanitize_names(r.name for r in model.rows)
    out: list[str] = []
    out.append(f"\\ MILP model: {model.name}")
    out.append(f"\\ fingerprint: {model.fingerprint()}")
    out.append("\\ name-map begin")
    for name, lp in var_map.items():
        if name != lp:
            out.append(f"\\ name {lp} = {name}")
    out.append("\\ name-map end")
    out.append("Minimize")
    terms = [(var_map[v], c) for v, c in model.objective.items()]
    if model.objective_constant:
        raise ValueError("objective constants are not representable in this LP subset")
    if not terms:
        first = next(iter(var_map.values()))
        terms = [(first, 0.0)]
    out.append(" obj: " + _expr(terms))
    out.append("Subject To")
    for row in model.rows:
        if not row.terms:
            if _constant_row_holds(row):
                continue
            raise ValueError(f"row {row.name} is constant and infeasible")
        sense = {"<=": "<=", ">=": ">=", "==": "="}[row.sense]
        out.append(f" {row_map[row.name]}: " + _expr([(var_map[v], c) for v, c in row.terms])
                   + f" {sense} {_num(row.rhs)}")
    out.append("Bounds")
    for var in model.variables.values():
        lp = var_map[var.name]
        if var.lb == var.ub:
            out.append(f" {lp} = {_num(var.lb)}")
        elif var.ub == float("inf"):
            out.append(f" {lp} >= {_num(var.lb)}")
        else:
            out.append(f" {_num(var.lb)} <= {lp} <= {_num(var.ub)}")
    binaries = [var_map[v.name] for v in model.variables.values() if v.binary]
    if binaries:
        out.append("Binaries")
        for i in range(0, len(binaries), 8):
            out.append(" " + " ".join(binaries[i:i + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


def _expr(terms: list[tuple[str, float]]) -> str:
    parts = []
    for idx, (name, coef) in enumerate(terms):
        parts.append(_term_str(coef, name, first=idx == 0))
    return " ".join(parts)


def _constant_row_holds(row) -> bool:
    return (row.sense == "<=" and 0 <= row.rhs) or (row.sense == ">=" and 0 >= row.rhs) or (
        row.sense == "==" and row.rhs == 0
    )


def write_lp(model: MilpModel, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(lp_text(model))
    return path


def parse_names(path: str | Path) -> dict[str, str]:
    """LP name -> model name, recovered from the embedded comment block."""
    mapping: dict[str, str] = {}
    in_block = False
    for line in Path(path).read_text().splitlines():
        if line.startswith("\\ name-map begin"):
            in_block = True
        elif line.startswith("\\ name-map end"):
            break
        elif in_block and line.startswith("\\ name "):
            lp, model_name = line[len("\\ name "):].split(" = ", 1)
            mapping[lp] = model_name
    return mapping
