"""High-level pipeline: fit, build, solve, reconstruct, report.

The service endpoints and the CLI are thin wrappers around these calls.
Artifacts are returned as strings/dicts so callers decide where they live.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .case import CaseStudy, load_case, with_solver_overrides
from .milp.encode import lower_case_to_milp
from .milp.model import MilpModel
from .network import HenDesign, ValidationReport, compare_tac, reconstruct, validate
from .plots import render_convergence, render_stream_plot
from .pwl.library import FitLibrary, fit_case
from .solve.adapter import ConvergenceTrace, Solution, solve
from .solve.lpwrite import lp_text
from .solve.mpswrite import mps_text
from .superstructure import SymbolicModel, build_symbolic_model


def build_model(case: CaseStudy, fits: FitLibrary | None = None) -> tuple[SymbolicModel, FitLibrary, MilpModel]:
    symbolic = build_symbolic_model(case)
    if fits is None:
        fits = fit_case(case, symbolic)
    model = lower_case_to_milp(case, symbolic, fits)
    return symbolic, fits, model


def model_text(model: MilpModel, fmt: str) -> str:
    if fmt == "lp":
        return lp_text(model)
    if fmt == "mps":
        return mps_text(model)
    raise ValueError(f"unknown model format {fmt!r}; expected 'lp' or 'mps'")


@dataclass
class RunResult:
    case: CaseStudy
    model_stats: dict
    solution: Solution
    trace: ConvergenceTrace
    design: HenDesign | None
    validation: ValidationReport | None
    tac_gap_pct: float | None
    fit_reports: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "case": self.case.name,
            "status": self.solution.status.value,
            "objective": self.solution.objective,
            "best_bound": self.solution.best_bound,
            "rel_gap": self.solution.rel_gap,
            "wall_time_s": self.solution.wall_time,
            "model": self.model_stats,
        }
        if self.design is not None:
            out["tac_exact"] = self.design.tac_exact
            out["tac_milp"] = self.design.tac_milp
            out["tac_gap_pct"] = self.tac_gap_pct
            out["loads_kw"] = {
                "cold_utility": self.design.total_cold_utility_duty,
                "hot_utility": self.design.total_hot_utility_duty,
                "stream_exchange": self.design.total_stream_duty,
            }
            out["validation"] = self.validation.to_dict() if self.validation else None
        return out


def run_case(
    case: CaseStudy,
    fits: FitLibrary | None = None,
    workdir=None,
    log_path=None,
    **solver_overrides,
) -> RunResult:
    """Full chain on an in-memory case; solver options may be overridden."""
    case = with_solver_overrides(case, **solver_overrides)
    symbolic, fits, model = build_model(case, fits)
    solution, trace = solve(model, case.solver, workdir=workdir, log_path=log_path)
    design = validation = None
    tac_gap = None
    if solution.has_incumbent:
        design = reconstruct(case, model, solution)
        validation = validate(case, design, fits)
        tac_gap, _ = compare_tac(design)
    return RunResult(
        case=case,
        model_stats={
            "variables": model.n_variables,
            "binaries": model.n_binaries,
            "rows": len(model.rows),
            "binary_ledger": model.metadata.get("binary_ledger", {}),
        },
        solution=solution,
        trace=trace,
        design=design,
        validation=validation,
        tac_gap_pct=tac_gap,
        fit_reports=fits.reports(),
    )


def run_case_file(path, **kw) -> RunResult:
    return run_case(load_case(path), **kw)


def design_plots(case: CaseStudy, design: HenDesign, trace: ConvergenceTrace) -> dict[str, str]:
    plots = {"stream_plot.svg": render_stream_plot(case, design)}
    if trace.points:
        plots["convergence.svg"] = render_convergence(trace, title=f"{case.name} convergence")
    return plots


def tac_table(case: CaseStudy, design: HenDesign) -> str:
    """Aligned text table: cost breakdown and exchanger list."""
    cur = case.costs.currency_label
    lines = [
        f"case: {design.case_name}",
        f"TAC (exact recomputation): {design.tac_exact:,.2f} {cur}/yr",
        f"TAC (optimizer objective): {design.tac_milp:,.2f} {cur}/yr",
        "",
        "cost breakdown:",
    ]
    for key, label in (
        ("utility_cost", "utility operating cost"),
        ("step_fixed_cost", "step-fixed exchanger cost"),
        ("variable_hex_cost", "variable exchanger cost"),
    ):
        lines.append(f"  {label:<28s} {design.breakdown[key]:>14,.2f} {cur}/yr")
    lines.append("")
    lines.append(f"{'exchanger':<22s} {'stage':>5s} {'duty kW':>10s} {'LMTD K':>8s} {'area m2':>9s}")
    for m in design.matches:
        lines.append(f"{m.hot_id + ' / ' + m.cold_id:<22s} {m.stage:>5d} {m.duty:>10.2f} {m.lmtd:>8.2f} {m.area:>9.3f}")
    for p in design.utility_placements:
        lines.append(
            f"{p.stream_id + ' / ' + p.utility_id:<22s} {'-':>5s} {p.duty:>10.2f} {p.lmtd:>8.2f} {p.area:>9.3f}"
        )
    lines.append("")
    lines.append(
        f"loads kW: cold utility {design.total_cold_utility_duty:.2f}, "
        f"hot utility {design.total_hot_utility_duty:.2f}, "
        f"stream exchange {design.total_stream_duty:.2f}"
    )
    return "\n".join(lines) + "\n"
