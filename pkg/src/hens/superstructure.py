"""Stage-wise superstructure with utility streams: variables and relations.

Index layout: temperatures sit at positions ``k = 1 .. n_stages + 2`` and
matches occupy spans ``k = 1 .. n_stages + 1``.  The first span is reserved
for hot-utility duty (conventional or utility-stream matches), the last for
cold-utility duty; interior spans carry stream-to-stream exchange.

The model built here is symbolic: linear relations are emitted as rows over
catalog symbols, while every product of free variables, every log-mean
temperature difference and every exchanger-area term is emitted as a tagged
nonlinearity for the encoder to lower against a fitted surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .case import CaseStudy, ConventionalUtility, Side, StreamSpec
from .pwl.sampling import utility_duty_range


@dataclass(frozen=True)
class VarDecl:
    name: str
    lb: float
    ub: float
    binary: bool = False

    @property
    def is_fixed(self) -> bool:
        return self.lb == self.ub


@dataclass(frozen=True)
class Row:
    """Linear relation  sum(coef * symbol)  sense  rhs."""

    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", ">=", "=="
    rhs: float


@dataclass(frozen=True)
class BilinearTag:
    """duty_terms == F * (t_hi - t_lo); needs a product surrogate."""

    name: str
    stream_id: str
    duty_terms: tuple[tuple[str, float], ...]
    flow_symbol: str
    t_hi: str
    t_lo: str
    dt_domain: tuple[float, float]
    kind: str  # "stage" or "stream"


@dataclass(frozen=True)
class LmtdTag:
    """lmtd == LMTD(dt1, dt2) over a square approach-temperature domain."""

    name: str
    hot_id: str
    cold_id: str
    stage: int
    dt1: str
    dt2: str
    lmtd: str
    dt_domain: tuple[float, float]


@dataclass(frozen=True)
class StreamAreaTag:
    """ared >= (q / (U * lmtd))^beta, gated by the match binary."""

    name: str
    hot_id: str
    cold_id: str
    stage: int
    lmtd: str
    q: str
    ared: str
    gate: str
    q_max: float
    dt_domain: tuple[float, float]


@dataclass(frozen=True)
class UtilityAreaTag:
    """ared >= one-variable reduced utility area of q, gated by z."""

    name: str
    stream_id: str
    utility_id: str
    q: str
    ared: str
    gate: str
    q_range: tuple[float, float]


@dataclass
class VariableCatalog:
    decls: dict[str, VarDecl] = field(default_factory=dict)

    def add(self, name: str, lb: float, ub: float, binary: bool = False) -> str:
        if name in self.decls:
            raise ValueError(f"duplicate symbol {name}")
        self.decls[name] = VarDecl(name, float(lb), float(ub), binary)
        return name

    def fix(self, name: str, value: float):
        d = self.decls[name]
        self.decls[name] = VarDecl(name, float(value), float(value), d.binary)

    def __contains__(self, name: str) -> bool:
        return name in self.decls

    def __getitem__(self, name: str) -> VarDecl:
        return self.decls[name]

    @property
    def binaries(self) -> list[str]:
        return [n for n, d in self.decls.items() if d.binary]


@dataclass
class SymbolicModel:
    case: CaseStudy
    catalog: VariableCatalog
    rows: list[Row]
    bilinear_tags: list[BilinearTag]
    lmtd_tags: list[LmtdTag]
    stream_area_tags: list[StreamAreaTag]
    utility_area_tags: list[UtilityAreaTag]
    allowed_pairs: list[tuple[str, str]]
    usable_cold_utilities: list[tuple[str, str]]  # (hot stream, utility)
    usable_hot_utilities: list[tuple[str, str]]   # (cold stream, utility)

    def row(self, name: str) -> Row:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def has_row(self, name: str) -> bool:
        return any(r.name == name for r in self.rows)


# naming helpers (this layout is the contract with the encoder and parser)

def sym_t(s: str, k: int) -> str:
    return f"T[{s},{k}]"


def sym_f(s: str) -> str:
    return f"F[{s}]"


def sym_q(i: str, j: str, k: int) -> str:
    return f"q[{i},{j},{k}]"


def sym_z(i: str, j: str, k: int) -> str:
    return f"z[{i},{j},{k}]"


def sym_dt(i: str, j: str, k: int) -> str:
    return f"dt[{i},{j},{k}]"


def sym_lmtd(i: str, j: str, k: int) -> str:
    return f"lmtd[{i},{j},{k}]"


def sym_ared(i: str, j: str, k: int) -> str:
    return f"ared[{i},{j},{k}]"


def stage_allows_match(case: CaseStudy, hot: StreamSpec, cold: StreamSpec, k: int) -> bool:
    """End-stage blocking: the extra end stages are reserved for utility streams."""
    if k == 1 and not hot.is_utility_stream:
        return False
    if k == case.n_match_stages and not cold.is_utility_stream:
        return False
    return True


def build_symbolic_model(case: CaseStudy) -> SymbolicModel:
    k_stages = case.n_match_stages          # spans 1 .. K
    k_temps = case.n_temperatures           # positions 1 .. K+1 == spans + 1
    cat = VariableCatalog()
    rows: list[Row] = []
    bil: list[BilinearTag] = []
    lm: list[LmtdTag] = []
    sa: list[StreamAreaTag] = []
    ua: list[UtilityAreaTag] = []
    omega = case.omega

    hot_streams = case.hot_streams
    cold_streams = case.cold_streams

    # ---- temperatures and flow capacities ------------------------------------
    for s in case.streams:
        t_lo, t_hi = s.t_min, s.t_max
        for k in range(1, k_temps + 1):
            cat.add(sym_t(s.id, k), t_lo, t_hi)
        # inlet/outlet fixing or range restriction at the end positions
        inlet_pos = 1 if s.side is Side.HOT else k_temps
        outlet_pos = k_temps if s.side is Side.HOT else 1
        cat.decls[sym_t(s.id, inlet_pos)] = VarDecl(sym_t(s.id, inlet_pos), s.t_in.lo, s.t_in.hi)
        cat.decls[sym_t(s.id, outlet_pos)] = VarDecl(sym_t(s.id, outlet_pos), s.t_out.lo, s.t_out.hi)
        if s.has_variable_flow:
            cat.add(sym_f(s.id), s.flow_capacity.lo, s.flow_capacity.hi)

    # ---- match variables ------------------------------------------------------
    allowed_pairs: list[tuple[str, str]] = []
    pair_ok: dict[tuple[str, str], bool] = {}
    for i in hot_streams:
        for j in cold_streams:
            ok = case.pair_is_possible(i, j)
            pair_ok[(i.id, j.id)] = ok
            if ok:
                allowed_pairs.append((i.id, j.id))
            q_cap = case.pair_max_duty(i, j) if ok else 0.0
            q_cap = min(q_cap, omega.Omega_s)
            for k in range(1, k_stages + 1):
                blocked = not ok or not stage_allows_match(case, i, j, k)
                cat.add(sym_z(i.id, j.id, k), 0.0, 0.0 if blocked else 1.0, binary=True)
                if ok:
                    cat.add(sym_q(i.id, j.id, k), 0.0, q_cap)
            if ok:
                dt_hi = case.pair_dt_max(i, j)
                for k in range(1, k_temps + 1):
                    cat.add(sym_dt(i.id, j.id, k), case.dt_min, dt_hi)
                for k in range(1, k_stages + 1):
                    cat.add(sym_lmtd(i.id, j.id, k), case.dt_min, dt_hi)
                    cat.add(sym_ared(i.id, j.id, k), 0.0, float("inf"))

    # ---- conventional utility variables ---------------------------------------
    usable_cu: list[tuple[str, str]] = []
    usable_hu: list[tuple[str, str]] = []
    cu_range: dict[tuple[str, str], tuple[float, float]] = {}
    hu_range: dict[tuple[str, str], tuple[float, float]] = {}
    for i in hot_streams:
        for u in case.cold_utilities:
            q_lo, q_hi = _usable_range(case, i, u)
            disabled = i.is_utility_stream or q_hi <= 0
            cat.add(f"zcu[{i.id},{u.id}]", 0.0, 0.0 if disabled else 1.0, binary=True)
            cat.add(f"qcu[{i.id},{u.id}]", 0.0, 0.0 if disabled else min(q_hi, omega.Omega_cu))
            if not disabled:
                usable_cu.append((i.id, u.id))
                cu_range[(i.id, u.id)] = (q_lo, min(q_hi, omega.Omega_cu))
                cat.add(f"dtcu1[{i.id},{u.id}]", case.dt_min, max(case.dt_min, i.t_in.hi - u.t_out))
                cat.add(f"dtcu2[{i.id},{u.id}]", case.dt_min, max(case.dt_min, i.t_out.hi - u.t_in))
                cat.add(f"aredcu[{i.id},{u.id}]", 0.0, float("inf"))
    for j in cold_streams:
        for u in case.hot_utilities:
            q_lo, q_hi = _usable_range(case, j, u)
            disabled = j.is_utility_stream or q_hi <= 0
            cat.add(f"zhu[{j.id},{u.id}]", 0.0, 0.0 if disabled else 1.0, binary=True)
            cat.add(f"qhu[{j.id},{u.id}]", 0.0, 0.0 if disabled else min(q_hi, omega.Omega_hu))
            if not disabled:
                usable_hu.append((j.id, u.id))
                hu_range[(j.id, u.id)] = (q_lo, min(q_hi, omega.Omega_hu))
                cat.add(f"dthu1[{j.id},{u.id}]", case.dt_min, max(case.dt_min, u.t_out - j.t_in.lo))
                cat.add(f"dthu2[{j.id},{u.id}]", case.dt_min, max(case.dt_min, u.t_in - j.t_out.lo))
                cat.add(f"aredhu[{j.id},{u.id}]", 0.0, float("inf"))

    # ---- energy balances -------------------------------------------------------
    for s in case.streams:
        opposite = cold_streams if s.side is Side.HOT else hot_streams
        for k in range(1, k_stages + 1):
            duty = []
            for o in opposite:
                i, j = (s, o) if s.side is Side.HOT else (o, s)
                if pair_ok[(i.id, j.id)] and stage_allows_match(case, i, j, k):
                    duty.append((sym_q(i.id, j.id, k), 1.0))
            if s.side is Side.HOT and k == k_stages:
                duty += [(f"qcu[{s.id},{u.id}]", 1.0) for u in case.cold_utilities if (s.id, u.id) in cu_range]
            if s.side is Side.COLD and k == 1:
                duty += [(f"qhu[{s.id},{u.id}]", 1.0) for u in case.hot_utilities if (s.id, u.id) in hu_range]
            _emit_span_balance(case, cat, rows, bil, s, k, duty)
        # stream-wise balance over all spans
        duty = []
        for o in opposite:
            i, j = (s, o) if s.side is Side.HOT else (o, s)
            if pair_ok[(i.id, j.id)]:
                duty += [(sym_q(i.id, j.id, k), 1.0) for k in range(1, k_stages + 1)]
        if s.side is Side.HOT:
            duty += [(f"qcu[{s.id},{u.id}]", 1.0) for u in case.cold_utilities if (s.id, u.id) in cu_range]
        else:
            duty += [(f"qhu[{s.id},{u.id}]", 1.0) for u in case.hot_utilities if (s.id, u.id) in hu_range]
        _emit_stream_balance(case, cat, rows, bil, s, duty)

    # ---- monotonic temperature decrease ----------------------------------------
    for s in case.streams:
        for k in range(1, k_temps):
            rows.append(Row(
                name=f"mono[{s.id},{k}]",
                terms=((sym_t(s.id, k), 1.0), (sym_t(s.id, k + 1), -1.0)),
                sense=">=",
                rhs=0.0,
            ))

    # ---- heat-load bounds --------------------------------------------------------
    for (i_id, j_id) in allowed_pairs:
        i, j = case.stream(i_id), case.stream(j_id)
        q_cap = min(case.pair_max_duty(i, j), omega.Omega_s)
        for k in range(1, k_stages + 1):
            q, z = sym_q(i_id, j_id, k), sym_z(i_id, j_id, k)
            rows.append(Row(f"qlb[{i_id},{j_id},{k}]", ((q, 1.0), (z, -omega.omega_s)), ">=", 0.0))
            rows.append(Row(f"qub[{i_id},{j_id},{k}]", ((q, 1.0), (z, -q_cap)), "<=", 0.0))
    for (i_id, u_id) in usable_cu:
        q, z = f"qcu[{i_id},{u_id}]", f"zcu[{i_id},{u_id}]"
        rows.append(Row(f"qculb[{i_id},{u_id}]", ((q, 1.0), (z, -omega.omega_cu)), ">=", 0.0))
        rows.append(Row(f"qcuub[{i_id},{u_id}]", ((q, 1.0), (z, -cu_range[(i_id, u_id)][1])), "<=", 0.0))
    for (j_id, u_id) in usable_hu:
        q, z = f"qhu[{j_id},{u_id}]", f"zhu[{j_id},{u_id}]"
        rows.append(Row(f"qhulb[{j_id},{u_id}]", ((q, 1.0), (z, -omega.omega_hu)), ">=", 0.0))
        rows.append(Row(f"qhuub[{j_id},{u_id}]", ((q, 1.0), (z, -hu_range[(j_id, u_id)][1])), "<=", 0.0))

    # ---- approach-temperature bounds ---------------------------------------------
    gamma = case.gamma
    for (i_id, j_id) in allowed_pairs:
        for k in range(1, k_stages + 1):
            z = sym_z(i_id, j_id, k)
            for face, pos in ((1, k), (2, k + 1)):
                rows.append(Row(
                    name=f"dtgam[{i_id},{j_id},{k},{face}]",
                    terms=((sym_dt(i_id, j_id, pos), 1.0), (sym_t(i_id, pos), -1.0),
                           (sym_t(j_id, pos), 1.0), (z, gamma)),
                    sense="<=",
                    rhs=gamma,
                ))
    for (i_id, u_id) in usable_cu:
        u = case.utility(u_id)
        z = f"zcu[{i_id},{u_id}]"
        rows.append(Row(
            name=f"dtcugam1[{i_id},{u_id}]",
            terms=((f"dtcu1[{i_id},{u_id}]", 1.0), (sym_t(i_id, k_temps - 1), -1.0), (z, gamma)),
            sense="<=", rhs=gamma - u.t_out,
        ))
        rows.append(Row(
            name=f"dtcugam2[{i_id},{u_id}]",
            terms=((f"dtcu2[{i_id},{u_id}]", 1.0), (sym_t(i_id, k_temps), -1.0), (z, gamma)),
            sense="<=", rhs=gamma - u.t_in,
        ))
    for (j_id, u_id) in usable_hu:
        u = case.utility(u_id)
        z = f"zhu[{j_id},{u_id}]"
        rows.append(Row(
            name=f"dthugam1[{j_id},{u_id}]",
            terms=((f"dthu1[{j_id},{u_id}]", 1.0), (sym_t(j_id, 2), 1.0), (z, gamma)),
            sense="<=", rhs=gamma + u.t_out,
        ))
        rows.append(Row(
            name=f"dthugam2[{j_id},{u_id}]",
            terms=((f"dthu2[{j_id},{u_id}]", 1.0), (sym_t(j_id, 1), 1.0), (z, gamma)),
            sense="<=", rhs=gamma + u.t_in,
        ))

    # ---- nonlinear tags: LMTD and areas ---------------------------------------------
    for (i_id, j_id) in allowed_pairs:
        i, j = case.stream(i_id), case.stream(j_id)
        dt_hi = case.pair_dt_max(i, j)
        q_cap = min(case.pair_max_duty(i, j), omega.Omega_s)
        for k in range(1, k_stages + 1):
            lm.append(LmtdTag(
                name=f"enc:lmtd[{i_id},{j_id},{k}]",
                hot_id=i_id, cold_id=j_id, stage=k,
                dt1=sym_dt(i_id, j_id, k), dt2=sym_dt(i_id, j_id, k + 1),
                lmtd=sym_lmtd(i_id, j_id, k),
                dt_domain=(case.dt_min, dt_hi),
            ))
            sa.append(StreamAreaTag(
                name=f"enc:area[{i_id},{j_id},{k}]",
                hot_id=i_id, cold_id=j_id, stage=k,
                lmtd=sym_lmtd(i_id, j_id, k), q=sym_q(i_id, j_id, k),
                ared=sym_ared(i_id, j_id, k), gate=sym_z(i_id, j_id, k),
                q_max=q_cap, dt_domain=(case.dt_min, dt_hi),
            ))
    for (i_id, u_id) in usable_cu:
        ua.append(UtilityAreaTag(
            name=f"enc:acu[{i_id},{u_id}]",
            stream_id=i_id, utility_id=u_id,
            q=f"qcu[{i_id},{u_id}]", ared=f"aredcu[{i_id},{u_id}]", gate=f"zcu[{i_id},{u_id}]",
            q_range=cu_range[(i_id, u_id)],
        ))
    for (j_id, u_id) in usable_hu:
        ua.append(UtilityAreaTag(
            name=f"enc:ahu[{j_id},{u_id}]",
            stream_id=j_id, utility_id=u_id,
            q=f"qhu[{j_id},{u_id}]", ared=f"aredhu[{j_id},{u_id}]", gate=f"zhu[{j_id},{u_id}]",
            q_range=hu_range[(j_id, u_id)],
        ))

    return SymbolicModel(
        case=case,
        catalog=cat,
        rows=rows,
        bilinear_tags=bil,
        lmtd_tags=lm,
        stream_area_tags=sa,
        utility_area_tags=ua,
        allowed_pairs=allowed_pairs,
        usable_cold_utilities=usable_cu,
        usable_hot_utilities=usable_hu,
    )


def _usable_range(case: CaseStudy, stream: StreamSpec, utility: ConventionalUtility) -> tuple[float, float]:
    if stream.is_utility_stream:
        return 0.0, 0.0
    if not stream.flow_capacity.is_fixed or not stream.t_out.is_fixed:
        raise NotImplementedError(
            f"stream {stream.id}: conventional utilities on streams with variable flow or outlet "
            "temperature are not supported; model the utility as a utility stream instead"
        )
    return utility_duty_range(stream, utility, case.dt_min)


def _emit_span_balance(case, cat, rows, bil, s: StreamSpec, k: int, duty: list[tuple[str, float]]):
    t_hi, t_lo = sym_t(s.id, k), sym_t(s.id, k + 1)
    name = f"ebstage[{s.id},{k}]"
    if not s.has_variable_flow:
        f = s.flow_capacity.value
        rows.append(Row(name, tuple(duty) + ((t_hi, -f), (t_lo, f)), "==", 0.0))
    elif not duty:
        # nothing can exchange on this span and F > 0, so the span is isothermal
        rows.append(Row(f"tflat[{s.id},{k}]", ((t_hi, 1.0), (t_lo, -1.0)), "==", 0.0))
    else:
        bil.append(BilinearTag(
            name=f"enc:ebstage[{s.id},{k}]",
            stream_id=s.id, duty_terms=tuple(duty),
            flow_symbol=sym_f(s.id), t_hi=t_hi, t_lo=t_lo,
            dt_domain=(0.0, s.span_max), kind="stage",
        ))


def _emit_stream_balance(case, cat, rows, bil, s: StreamSpec, duty: list[tuple[str, float]]):
    t_hi, t_lo = sym_t(s.id, 1), sym_t(s.id, case.n_temperatures)
    name = f"ebstream[{s.id}]"
    if not s.has_variable_flow:
        f = s.flow_capacity.value
        rows.append(Row(name, tuple(duty) + ((t_hi, -f), (t_lo, f)), "==", 0.0))
    elif s.t_in.is_fixed and s.t_out.is_fixed:
        span = s.span_max  # == span_min: both ends pinned
        rows.append(Row(name, tuple(duty) + ((sym_f(s.id), -span),), "==", 0.0))
    else:
        bil.append(BilinearTag(
            name=f"enc:ebstream[{s.id}]",
            stream_id=s.id, duty_terms=tuple(duty),
            flow_symbol=sym_f(s.id), t_hi=t_hi, t_lo=t_lo,
            dt_domain=(max(s.span_min, 0.0), s.span_max), kind="stream",
        ))
