"""Drive an external MILP solver as a child process and parse its output.

The adapter boundary is a file handshake: the model goes out as an LP (or
MPS) file, the solver leaves a solution file and a log stream behind.  Any
command-line branch-and-cut solver can plug in; adapters are provided for
the bundled backend (HiGHS via scipy, spawned with ``python -m``), for a
``highs`` binary and for a ``cbc`` binary.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import re
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..case import HensError, SolverOptions
from ..milp.model import MilpModel
from .lpwrite import sanitize_names, write_lp

SOLVER_ENV_VAR = "HENS_SOLVER"


class SolverError(HensError):
    pass


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"        # stopped at a limit with an incumbent
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"     # stopped at a limit without an incumbent
    ERROR = "Error"


@dataclass
class Solution:
    status: SolveStatus
    values: dict[str, float] = field(default_factory=dict)
    objective: float = math.nan
    best_bound: float = math.nan
    rel_gap: float = math.nan
    wall_time: float = 0.0

    @property
    def has_incumbent(self) -> bool:
        return self.status in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE) and bool(self.values)


@dataclass
class TracePoint:
    time_s: float
    incumbent: float
    bound: float
    gap_pct: float


@dataclass
class ConvergenceTrace:
    points: list[TracePoint] = field(default_factory=list)

    def append(self, t: float, incumbent: float, bound: float, gap_pct: float):
        if self.points and t <= self.points[-1].time_s:
            t = self.points[-1].time_s + 1e-9
        self.points.append(TracePoint(t, incumbent, bound, gap_pct))

    def __len__(self):
        return len(self.points)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time_s", "incumbent", "bound", "gap_pct"])
        for p in self.points:
            writer.writerow([f"{p.time_s:.6g}", f"{p.incumbent:.10g}", f"{p.bound:.10g}", f"{p.gap_pct:.6g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConvergenceTrace":
        trace = cls()
        rows = list(csv.reader(io.StringIO(text)))
        for row in rows[1:]:
            trace.points.append(TracePoint(*(float(v) for v in row)))
        return trace


def compute_rel_gap(objective: float, bound: float, eps: float = 1e-12) -> float:
    if math.isnan(objective) or math.isnan(bound) or math.isinf(objective) or math.isinf(bound):
        return math.inf
    return abs(objective - bound) / max(abs(objective), eps)


# ---------------------------------------------------------------------------
# adapters
# ---------------------------------------------------------------------------


def _parse_float(tok: str) -> float:
    t = tok.strip().rstrip("%").lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t == "-inf":
        return -math.inf
    if t == "large":
        return math.inf
    try:
        return float(t)
    except ValueError:
        return math.nan


class _HighsStyle:
    """Log/solution conventions shared by the bundled backend and highs CLI."""

    # B&B table row: ... BestBound BestSol Gap Cuts InLp Confl LpIters Time
    @staticmethod
    def parse_log_line(line: str) -> tuple[float, float, float, float] | None:
        toks = line.split()
        if len(toks) < 12 or not re.fullmatch(r"\d+(\.\d+)?s", toks[-1]):
            return None
        gap_tok = toks[-6]
        if not (gap_tok.endswith("%") or gap_tok.lower() in ("inf", "large")):
            return None
        t = float(toks[-1][:-1])
        bound = _parse_float(toks[-8])
        incumbent = _parse_float(toks[-7])
        gap = _parse_float(gap_tok)
        return t, incumbent, bound, gap


def _read_bundled_solution(path: Path) -> tuple[str, float, float, dict[str, float]]:
    status, objective, bound = "Error", math.nan, math.nan
    values: dict[str, float] = {}
    for line in path.read_text().splitlines():
        toks = line.split()
        if not toks:
            continue
        if toks[0] == "Status":
            status = toks[1]
        elif toks[0] == "Objective":
            objective = _parse_float(toks[1])
        elif toks[0] == "Bound":
            bound = _parse_float(toks[1])
        elif toks[0] in ("Gap", "Columns"):
            continue
        elif len(toks) == 2:
            values[toks[0]] = float(toks[1])
    return status, objective, bound, values


def _read_highs_solution(path: Path) -> tuple[str, float, float, dict[str, float]]:
    lines = path.read_text().splitlines()
    status, objective = "Error", math.nan
    values: dict[str, float] = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line == "Model status":
            status = lines[i + 1].strip()
            i += 2
            continue
        if line.startswith("Objective"):
            objective = _parse_float(line.split()[-1])
        if line.startswith("# Columns"):
            n = int(line.split()[-1])
            for j in range(i + 1, i + 1 + n):
                name, value = lines[j].split()
                values[name] = float(value)
            i += n
        i += 1
    return status, objective, math.nan, values


def _read_cbc_solution(path: Path) -> tuple[str, float, float, dict[str, float]]:
    lines = path.read_text().splitlines()
    if not lines:
        return "Error", math.nan, math.nan, {}
    header = lines[0]
    objective = math.nan
    m = re.search(r"objective value (\S+)", header)
    if m:
        objective = _parse_float(m.group(1))
    if header.startswith("Optimal"):
        status = "Optimal"
    elif "Infeasible" in header or "infeasible" in header:
        status = "Infeasible"
    elif header.startswith("Stopped"):
        status = "Stopped"
    else:
        status = "Error"
    values: dict[str, float] = {}
    for line in lines[1:]:
        toks = line.split()
        if len(toks) >= 3:
            values[toks[1]] = float(toks[2])
    return status, objective, math.nan, values


@dataclass
class Adapter:
    name: str
    executable: list[str]

    def command(self, lp_path: Path, sol_path: Path, opts: SolverOptions) -> list[str]:
        raise NotImplementedError

    def parse_log_line(self, line: str):
        return _HighsStyle.parse_log_line(line)

    def read_solution(self, sol_path: Path):
        raise NotImplementedError


class BundledAdapter(Adapter):
    def __init__(self):
        super().__init__("bundled", [sys.executable, "-m", "hens.solve.backend_cli"])

    def command(self, lp_path, sol_path, opts):
        cmd = [*self.executable, str(lp_path), "--solution-file", str(sol_path),
               "--rel-gap", str(opts.rel_gap)]
        if opts.time_limit:
            cmd += ["--time-limit", str(opts.time_limit)]
        return cmd

    def read_solution(self, sol_path):
        return _read_bundled_solution(sol_path)


class HighsAdapter(Adapter):
    def __init__(self, executable: str = "highs"):
        super().__init__("highs", [executable])

    def command(self, lp_path, sol_path, opts):
        options_file = sol_path.with_suffix(".opts")
        lines = [f"mip_rel_gap = {opts.rel_gap}"]
        if opts.time_limit:
            lines.append(f"time_limit = {opts.time_limit}")
        if opts.threads:
            lines.append(f"threads = {opts.threads}")
        if opts.seed:
            lines.append(f"random_seed = {opts.seed}")
        options_file.write_text("\n".join(lines) + "\n")
        return [*self.executable, "--solution_file", str(sol_path),
                "--options_file", str(options_file), str(lp_path)]

    def read_solution(self, sol_path):
        return _read_highs_solution(sol_path)


class CbcAdapter(Adapter):
    def __init__(self, executable: str = "cbc"):
        super().__init__("cbc", [executable])

    def command(self, lp_path, sol_path, opts):
        cmd = [*self.executable, str(lp_path), "-ratio", str(opts.rel_gap)]
        if opts.time_limit:
            cmd += ["-seconds", str(opts.time_limit)]
        if opts.threads:
            cmd += ["-threads", str(opts.threads)]
        if opts.seed:
            cmd += ["-randomCbcSeed", str(opts.seed)]
        cmd += ["solve", "-solu", str(sol_path)]
        return cmd

    _LOG = re.compile(
        r"After (\d+) nodes.*?(\S+) best solution, best possible (\S+) \(([\d.]+) seconds"
    )

    def parse_log_line(self, line):
        m = self._LOG.search(line)
        if not m:
            return None
        incumbent = _parse_float(m.group(2))
        bound = _parse_float(m.group(3))
        t = float(m.group(4))
        gap = 100.0 * compute_rel_gap(incumbent, bound)
        return t, incumbent, bound, gap

    def read_solution(self, sol_path):
        return _read_cbc_solution(sol_path)


def pick_adapter(opts: SolverOptions) -> Adapter:
    """Resolve the adapter from options and the HENS_SOLVER environment override."""
    choice = os.environ.get(SOLVER_ENV_VAR) or opts.executable or opts.adapter
    if choice in (None, "", "auto"):
        if shutil.which("highs"):
            return HighsAdapter()
        if shutil.which("cbc"):
            return CbcAdapter()
        return BundledAdapter()
    stem = Path(choice).stem.lower()
    if stem == "bundled":
        return BundledAdapter()
    if "highs" in stem:
        return HighsAdapter(choice if Path(choice).exists() or shutil.which(choice) else "highs")
    if "cbc" in stem:
        return CbcAdapter(choice if Path(choice).exists() or shutil.which(choice) else "cbc")
    raise SolverError(f"unknown solver adapter {choice!r}")


# ---------------------------------------------------------------------------
# solve driver
# ---------------------------------------------------------------------------


def _status_from(raw: str, values: dict[str, float], timed_out: bool) -> SolveStatus:
    raw_l = raw.lower()
    if raw_l == "optimal":
        return SolveStatus.OPTIMAL
    if "infeasible" in raw_l:
        return SolveStatus.INFEASIBLE
    if raw_l in ("stopped", "feasible", "timelimit", "time limit reached", "objective bound"):
        return SolveStatus.FEASIBLE if values else SolveStatus.TIME_LIMIT
    if timed_out:
        return SolveStatus.FEASIBLE if values else SolveStatus.TIME_LIMIT
    return SolveStatus.ERROR


def solve_once(
    model: MilpModel,
    opts: SolverOptions,
    workdir: str | Path | None = None,
    log_path: str | Path | None = None,
) -> tuple[Solution, ConvergenceTrace]:
    adapter = pick_adapter(opts)
    own_tmp = workdir is None
    workdir = Path(tempfile.mkdtemp(prefix="hens-solve-")) if own_tmp else Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    lp_path = workdir / f"{model.name}.lp"
    sol_path = workdir / f"{model.name}.sol"
    write_lp(model, lp_path)
    lp_to_model = {lp: name for name, lp in sanitize_names(model.variables.keys()).items()}

    cmd = adapter.command(lp_path, sol_path, opts)
    trace = ConvergenceTrace()
    log_lines: list[str] = []
    started = time.monotonic()
    hard_limit = (opts.time_limit or 0) * 1.5 + 300 if opts.time_limit else None
    try:
        proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    except OSError as exc:
        raise SolverError(f"cannot launch solver {cmd[0]!r}: {exc}") from exc
    timed_out = False
    try:
        assert proc.stdout is not None
        for line in proc.stdout:
            log_lines.append(line.rstrip("\n"))
            parsed = adapter.parse_log_line(line)
            if parsed:
                trace.append(*parsed)
            if hard_limit and time.monotonic() - started > hard_limit:
                proc.kill()
                timed_out = True
                break
        proc.wait(timeout=60)
    except (KeyboardInterrupt, subprocess.TimeoutExpired):
        proc.kill()
        proc.wait()
        wall = time.monotonic() - started
        sol = Solution(status=SolveStatus.ERROR, wall_time=wall)
        return sol, trace
    finally:
        if log_path:
            Path(log_path).write_text("\n".join(log_lines) + "\n")
    wall = time.monotonic() - started

    if not sol_path.exists():
        log_text = "\n".join(log_lines).lower()
        status = SolveStatus.INFEASIBLE if "infeasible" in log_text else SolveStatus.ERROR
        return Solution(status=status, wall_time=wall), trace

    raw_status, objective, bound, raw_values = adapter.read_solution(sol_path)
    values = {lp_to_model.get(k, k): v for k, v in raw_values.items()}
    status = _status_from(raw_status, values, timed_out)
    if math.isnan(bound):
        bound = trace.points[-1].bound if trace.points else objective
    if status is SolveStatus.OPTIMAL and math.isnan(objective):
        objective = model.objective_value(values)
    gap = compute_rel_gap(objective, bound)
    solution = Solution(
        status=status,
        values=values,
        objective=objective,
        best_bound=bound,
        rel_gap=gap,
        wall_time=wall,
    )
    if own_tmp:
        shutil.rmtree(workdir, ignore_errors=True)
    return solution, trace


def solve(
    model: MilpModel,
    opts: SolverOptions,
    workdir: str | Path | None = None,
    log_path: str | Path | None = None,
    check_tol: float = 1e-6,
) -> tuple[Solution, ConvergenceTrace]:
    """Solve, optionally repeating and keeping the fastest run.

    Incumbent-carrying solutions are re-checked by substitution into every
    model row; violations beyond the scaled tolerance raise SolverError.
    """
    best: tuple[Solution, ConvergenceTrace] | None = None
    for _ in range(max(1, opts.repeats)):
        sol, trace = solve_once(model, opts, workdir=workdir, log_path=log_path)
        if best is None or sol.wall_time < best[0].wall_time:
            best = (sol, trace)
    sol, trace = best
    if sol.has_incumbent:
        scale = max(1.0, max(abs(v) for v in sol.values.values()))
        bad = model.check_point(sol.values, tol=check_tol * scale * 10)
        if bad:
            raise SolverError(f"solution violates {len(bad)} rows, first: {bad[:5]}")
    return sol, trace
