"""Turn a solver solution back into an engineering design and validate it.

Reconstruction rounds the existence binaries, reads duties, temperatures
and flow capacities, and recomputes every exchanger's log-mean temperature
difference and area from the exact nonlinear expressions, never from the
surrogates.  Validation replays the physical constraints with tolerances
that allow for the fitted surrogates' absolute error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .case import CaseStudy, Side
from .pwl.library import FitLibrary
from .pwl.sampling import lmtd, u_coefficient
from .solve.adapter import Solution, SolveStatus
from .superstructure import sym_dt, sym_f, sym_q, sym_t, sym_z

BINARY_INTEGRALITY_TOL = 1e-4
DUTY_EPS = 1e-6


@dataclass(frozen=True)
class MatchPlacement:
    hot_id: str
    cold_id: str
    stage: int
    duty: float
    lmtd: float
    area: float
    area_reduced: float


@dataclass(frozen=True)
class UtilityPlacement:
    stream_id: str
    utility_id: str
    side: str  # "cu" or "hu"
    duty: float
    lmtd: float
    area: float
    area_reduced: float


@dataclass
class HenDesign:
    case_name: str
    matches: list[MatchPlacement]
    utility_placements: list[UtilityPlacement]
    stage_temperatures: dict[str, list[float]]
    flow_capacities: dict[str, float]
    active_units: int
    tac_milp: float
    tac_exact: float
    breakdown: dict[str, float]
    solver_status: str = ""

    @property
    def total_stream_duty(self) -> float:
        return sum(m.duty for m in self.matches)

    @property
    def total_cold_utility_duty(self) -> float:
        return sum(p.duty for p in self.utility_placements if p.side == "cu")

    @property
    def total_hot_utility_duty(self) -> float:
        return sum(p.duty for p in self.utility_placements if p.side == "hu")

    def to_dict(self) -> dict:
        return {
            "case": self.case_name,
            "solver_status": self.solver_status,
            "tac_milp": self.tac_milp,
            "tac_exact": self.tac_exact,
            "breakdown": self.breakdown,
            "active_units": self.active_units,
            "matches": [vars(m) for m in self.matches],
            "utility_placements": [vars(p) for p in self.utility_placements],
            "stage_temperatures": self.stage_temperatures,
            "flow_capacities": self.flow_capacities,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "HenDesign":
        return cls(
            case_name=d["case"],
            matches=[MatchPlacement(**m) for m in d["matches"]],
            utility_placements=[UtilityPlacement(**p) for p in d["utility_placements"]],
            stage_temperatures=d["stage_temperatures"],
            flow_capacities=d["flow_capacities"],
            active_units=d["active_units"],
            tac_milp=d["tac_milp"],
            tac_exact=d["tac_exact"],
            breakdown=d["breakdown"],
            solver_status=d.get("solver_status", ""),
        )


class ReconstructionError(ValueError):
    pass


def _round_binary(name: str, value: float) -> int:
    if abs(value - round(value)) > BINARY_INTEGRALITY_TOL:
        raise ReconstructionError(f"binary {name} is not integral: {value}")
    return int(round(value))


def reconstruct(case: CaseStudy, model, solution: Solution) -> HenDesign:
    """Map named solution values back to a network design with exact costs."""
    if solution.status not in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE):
        raise ReconstructionError(f"cannot reconstruct from status {solution.status.value}")
    vals = solution.values
    k_temps = case.n_temperatures
    beta = case.costs.beta

    temps = {
        s.id: [vals.get(sym_t(s.id, k), 0.0) for k in range(1, k_temps + 1)]
        for s in case.streams
    }
    flows = {
        s.id: (vals.get(sym_f(s.id), s.flow_capacity.lo) if s.has_variable_flow else s.flow_capacity.value)
        for s in case.streams
    }

    matches: list[MatchPlacement] = []
    active_units = 0
    for i in case.hot_streams:
        for j in case.cold_streams:
            for k in range(1, case.n_match_stages + 1):
                z = vals.get(sym_z(i.id, j.id, k))
                if z is None or _round_binary(sym_z(i.id, j.id, k), z) == 0:
                    continue
                active_units += 1
                duty = vals.get(sym_q(i.id, j.id, k), 0.0)
                if duty <= DUTY_EPS:
                    continue
                dt1 = temps[i.id][k - 1] - temps[j.id][k - 1]
                dt2 = temps[i.id][k] - temps[j.id][k]
                l = lmtd(max(dt1, 1e-9), max(dt2, 1e-9))
                area = duty / (u_coefficient(i.h, j.h) * l)
                matches.append(MatchPlacement(
                    hot_id=i.id, cold_id=j.id, stage=k, duty=duty,
                    lmtd=l, area=area, area_reduced=area**beta,
                ))

    placements: list[UtilityPlacement] = []
    for i in case.hot_streams:
        for u in case.cold_utilities:
            name = f"zcu[{i.id},{u.id}]"
            if name not in vals or _round_binary(name, vals[name]) == 0:
                continue
            active_units += 1
            duty = vals.get(f"qcu[{i.id},{u.id}]", 0.0)
            if duty <= DUTY_EPS:
                continue
            dt1 = temps[i.id][k_temps - 2] - u.t_out
            dt2 = temps[i.id][k_temps - 1] - u.t_in
            l = lmtd(max(dt1, 1e-9), max(dt2, 1e-9))
            area = duty / (u_coefficient(i.h, u.h) * l)
            placements.append(UtilityPlacement(
                stream_id=i.id, utility_id=u.id, side="cu", duty=duty,
                lmtd=l, area=area, area_reduced=area**beta,
            ))
    for j in case.cold_streams:
        for u in case.hot_utilities:
            name = f"zhu[{j.id},{u.id}]"
            if name not in vals or _round_binary(name, vals[name]) == 0:
                continue
            active_units += 1
            duty = vals.get(f"qhu[{j.id},{u.id}]", 0.0)
            if duty <= DUTY_EPS:
                continue
            dt1 = u.t_out - temps[j.id][1]
            dt2 = u.t_in - temps[j.id][0]
            l = lmtd(max(dt1, 1e-9), max(dt2, 1e-9))
            area = duty / (u_coefficient(j.h, u.h) * l)
            placements.append(UtilityPlacement(
                stream_id=j.id, utility_id=u.id, side="hu", duty=duty,
                lmtd=l, area=area, area_reduced=area**beta,
            ))

    utility_cost = sum(
        case.utility(p.utility_id).cost * p.duty for p in placements
    )
    for m in matches:
        utility_cost += (case.cost_vector(case.stream(m.hot_id)) + case.cost_vector(case.stream(m.cold_id))) * m.duty
    step_cost = case.costs.c_f * active_units
    area_cost = case.costs.c_v * (
        sum(m.area_reduced for m in matches) + sum(p.area_reduced for p in placements)
    )
    tac_exact = utility_cost + step_cost + area_cost

    return HenDesign(
        case_name=case.name,
        matches=matches,
        utility_placements=placements,
        stage_temperatures=temps,
        flow_capacities=flows,
        active_units=active_units,
        tac_milp=solution.objective,
        tac_exact=tac_exact,
        breakdown={
            "utility_cost": utility_cost,
            "step_fixed_cost": step_cost,
            "variable_hex_cost": area_cost,
        },
        solver_status=solution.status.value,
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    offender: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [vars(c) for c in self.checks]}


TOL_ABS = 1.0     # kW
TOL_REL = 0.01


def validate(case: CaseStudy, design: HenDesign, fits: FitLibrary | None = None) -> ValidationReport:
    """Replay energy balances, monotonicity, approach and range bounds."""
    report = ValidationReport()
    k_temps = case.n_temperatures
    temps = design.stage_temperatures
    flows = design.flow_capacities

    def fit_slack(key: str) -> float:
        if fits is None:
            return 0.0
        try:
            entry = fits.entries[key]
        except KeyError:
            return 0.0
        return entry.report.max_abs_err if entry.report else 0.0

    def duty_of(stream_id: str, side: Side, k: int | None) -> float:
        total = 0.0
        for m in design.matches:
            sid = m.hot_id if side is Side.HOT else m.cold_id
            if sid == stream_id and (k is None or m.stage == k):
                total += m.duty
        for p in design.utility_placements:
            if p.stream_id != stream_id:
                continue
            at_end = (side is Side.HOT and p.side == "cu" and (k is None or k == case.n_match_stages)) or (
                side is Side.COLD and p.side == "hu" and (k is None or k == 1)
            )
            if at_end:
                total += p.duty
        return total

    # stream-wise and stage-wise balances
    worst_stream = (0.0, "")
    worst_stage = (0.0, "")
    tol_stream = TOL_ABS
    tol_stage = TOL_ABS
    for s in case.streams:
        f = flows[s.id]
        rhs = f * (temps[s.id][0] - temps[s.id][-1])
        resid = abs(duty_of(s.id, s.side, None) - rhs)
        tol = TOL_ABS + TOL_REL * abs(rhs) + fit_slack(f"ebstream:{s.id}")
        tol_stream = max(tol_stream, tol)
        if resid > worst_stream[0]:
            worst_stream = (resid, s.id)
        if resid > tol:
            report.checks.append(CheckResult("stream_balance", False, resid, tol, s.id))
        for k in range(1, case.n_match_stages + 1):
            rhs = f * (temps[s.id][k - 1] - temps[s.id][k])
            resid = abs(duty_of(s.id, s.side, k) - rhs)
            tol = TOL_ABS + TOL_REL * abs(rhs) + fit_slack(f"ebstage:{s.id}")
            tol_stage = max(tol_stage, tol)
            if resid > worst_stage[0]:
                worst_stage = (resid, f"{s.id},k={k}")
            if resid > tol:
                report.checks.append(CheckResult("stage_balance", False, resid, tol, f"{s.id},k={k}"))
    if not any(c.name == "stream_balance" for c in report.checks):
        report.checks.append(CheckResult("stream_balance", True, worst_stream[0], tol_stream, worst_stream[1]))
    if not any(c.name == "stage_balance" for c in report.checks):
        report.checks.append(CheckResult("stage_balance", True, worst_stage[0], tol_stage, worst_stage[1]))

    # temperature monotonicity
    worst = (0.0, "")
    for s in case.streams:
        for k in range(k_temps - 1):
            drop = temps[s.id][k + 1] - temps[s.id][k]
            if drop > worst[0]:
                worst = (drop, f"{s.id},k={k + 1}")
    report.checks.append(CheckResult("monotonic_decrease", worst[0] <= 1e-6, worst[0], 1e-6, worst[1]))

    # minimum approach at every active exchanger face
    worst = (float("inf"), "")
    for m in design.matches:
        for pos in (m.stage - 1, m.stage):
            dt = temps[m.hot_id][pos] - temps[m.cold_id][pos]
            if dt < worst[0]:
                worst = (dt, f"{m.hot_id}/{m.cold_id},k={m.stage}")
    for p in design.utility_placements:
        u = case.utility(p.utility_id)
        if p.side == "cu":
            dts = (temps[p.stream_id][k_temps - 2] - u.t_out, temps[p.stream_id][k_temps - 1] - u.t_in)
        else:
            dts = (u.t_out - temps[p.stream_id][1], u.t_in - temps[p.stream_id][0])
        for dt in dts:
            if dt < worst[0]:
                worst = (dt, f"{p.stream_id}/{p.utility_id}")
    if worst[1]:
        report.checks.append(CheckResult(
            "approach_temperature", worst[0] >= case.dt_min - 1e-6, worst[0], case.dt_min, worst[1],
        ))
    else:
        report.checks.append(CheckResult("approach_temperature", True, case.dt_min, case.dt_min, "no exchangers"))

    # utility-stream ranges: flow capacity and outlet temperature
    worst = (0.0, "")
    for s in case.streams:
        f = flows[s.id]
        over = max(s.flow_capacity.lo - f, f - s.flow_capacity.hi)
        if over > worst[0]:
            worst = (over, f"F[{s.id}]")
        outlet = temps[s.id][-1] if s.side is Side.HOT else temps[s.id][0]
        over = max(s.t_out.lo - outlet, outlet - s.t_out.hi)
        if over > worst[0]:
            worst = (over, f"t_out[{s.id}]")
    report.checks.append(CheckResult("range_bounds", worst[0] <= 1e-6, worst[0], 1e-6, worst[1]))

    # global energy conservation
    hot_enthalpy = sum(flows[s.id] * (temps[s.id][0] - temps[s.id][-1]) for s in case.hot_streams)
    cold_enthalpy = sum(flows[s.id] * (temps[s.id][0] - temps[s.id][-1]) for s in case.cold_streams)
    lhs = hot_enthalpy - design.total_cold_utility_duty
    rhs = cold_enthalpy - design.total_hot_utility_duty
    resid = abs(lhs - rhs)
    tol = tol_stream * max(1, len(case.streams))
    report.checks.append(CheckResult("energy_conservation", resid <= tol, resid, tol, ""))

    return report


def compare_tac(design: HenDesign, flag_above_pct: float = 1.5) -> tuple[float, bool]:
    """Percent gap between the MILP objective and the exact recomputation."""
    if design.tac_exact == 0.0:
        if abs(design.tac_milp) > 1e-9:
            raise ValueError("exact TAC is zero but the MILP objective is not")
        return 0.0, False
    gap_pct = 100.0 * abs(design.tac_milp - design.tac_exact) / design.tac_exact
    return gap_pct, gap_pct > flag_above_pct
