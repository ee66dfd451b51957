"""Fixed-layout MPS writer (long names, column-aligned fields)."""

from __future__ import annotations

from pathlib import Path

from ..milp.model import MilpModel
from .lpwrite import sanitize_names


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".17g")


def mps_text(model: MilpModel) -> str:
    var_map = sanitize_names(model.variables.keys())
    row_map = sanitize_names(r.name for r in model.rows)
    sense_code = {"<=": "L", ">=": "G", "==": "E"}
    out = [f"NAME          {model.name}"]
    out.append("* name-map begin")
    for name, mps in {**var_map, **row_map}.items():
        if name != mps:
            out.append(f"* name {mps} = {name}")
    out.append("* name-map end")
    out.append("ROWS")
    out.append(" N  COST")
    for row in model.rows:
        if not row.terms:
            continue
        out.append(f" {sense_code[row.sense]}  {row_map[row.name]}")

    # column-major coefficient list; binaries inside integer markers
    by_var: dict[str, list[tuple[str, float]]] = {v: [] for v in model.variables}
    for v, c in model.objective.items():
        by_var[v].append(("COST", c))
    for row in model.rows:
        for v, c in row.terms:
            by_var[v].append((row_map[row.name], c))
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for var in model.variables.values():
        entries = by_var[var.name]
        if var.binary and not in_int:
            out.append(f"    MARKER{marker:04d}  'MARKER'                 'INTORG'")
            marker += 1
            in_int = True
        elif not var.binary and in_int:
            out.append(f"    MARKER{marker:04d}  'MARKER'                 'INTEND'")
            marker += 1
            in_int = False
        name = var_map[var.name]
        for rname, coef in entries:
            out.append(f"    {name:<24}  {rname:<24}  {_num(coef)}")
        if not entries:
            out.append(f"    {name:<24}  COST  0")
    if in_int:
        out.append(f"    MARKER{marker:04d}  'MARKER'                 'INTEND'")

    out.append("RHS")
    for row in model.rows:
        if row.terms and row.rhs != 0.0:
            out.append(f"    RHS  {row_map[row.name]:<24}  {_num(row.rhs)}")
    out.append("BOUNDS")
    for var in model.variables.values():
        name = var_map[var.name]
        if var.lb == var.ub:
            out.append(f" FX BND  {name:<24}  {_num(var.lb)}")
            continue
        if var.lb != 0.0:
            out.append(f" LO BND  {name:<24}  {_num(var.lb)}")
        if var.ub != float("inf"):
            out.append(f" UP BND  {name:<24}  {_num(var.ub)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def write_mps(model: MilpModel, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(mps_text(model))
    return path


def parse_mps_names(path: str | Path) -> dict[str, str]:
    """MPS name -> model name from the embedded comment block."""
    mapping: dict[str, str] = {}
    in_block = False
    for line in Path(path).read_text().splitlines():
        if line.startswith("* name-map begin"):
            in_block = True
        elif line.startswith("* name-map end"):
            break
        elif in_block and line.startswith("* name "):
            mps, model_name = line[len("* name "):].split(" = ", 1)
            mapping[mps] = model_name
    return mapping
