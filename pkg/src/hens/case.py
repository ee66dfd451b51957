"""Problem definition: streams, utilities, costs and case-file loading.

A case is a TOML document with top-level keys (``name``, ``n_stages``,
``dt_min``, ...), a ``[costs]`` table, an optional ``[solver]`` table and
repeated ``[[stream]]`` / ``[[utility]]`` tables.  Numeric stream fields
accept either a scalar (fixed value) or a two-element array (admissible
range).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class HensError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(HensError):
    """A case document is missing a field or a field has the wrong type."""


class UnitError(HensError):
    """A physical quantity is outside its admissible sign/range."""


class InfeasibleCaseError(HensError):
    """Stream temperature data admits no feasible heat exchange."""


class Side(enum.Enum):
    HOT = "hot"
    COLD = "cold"


_DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class Bounded:
    """A quantity that is either fixed or restricted to a closed range.

    ``lo == hi`` means fixed.  Ranges require ``lo < hi``; open lower
    interval ends are replaced by a small epsilon at load time.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise UnitError(f"non-finite bound ({self.lo}, {self.hi})")
        if self.lo > self.hi:
            raise SchemaError(f"range lower bound {self.lo} exceeds upper bound {self.hi}")

    @classmethod
    def fixed(cls, value: float) -> "Bounded":
        return cls(float(value), float(value))

    @classmethod
    def range(cls, lo: float, hi: float) -> "Bounded":
        if not lo < hi:
            raise SchemaError(f"range requires lo < hi, got [{lo}, {hi}]")
        return cls(float(lo), float(hi))

    @property
    def is_fixed(self) -> bool:
        return self.lo == self.hi

    @property
    def value(self) -> float:
        if not self.is_fixed:
            raise ValueError(f"range quantity [{self.lo}, {self.hi}] has no single value")
        return self.lo

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class StreamSpec:
    """A hot or cold stream; utility streams carry a positive unit cost."""

    id: str
    side: Side
    t_in: Bounded
    t_out: Bounded
    flow_capacity: Bounded
    h: float
    utility_cost: float = 0.0

    def __post_init__(self):
        if self.h <= 0:
            raise UnitError(f"stream {self.id}: heat transfer coefficient must be positive, got {self.h}")
        if self.flow_capacity.lo <= 0:
            raise UnitError(f"stream {self.id}: flow capacity must be positive, got lo={self.flow_capacity.lo}")
        if self.utility_cost < 0:
            raise UnitError(f"stream {self.id}: utility cost must be non-negative")
        self._check_temperatures()

    def _check_temperatures(self):
        # Every admissible inlet must sit on the correct side of every
        # admissible outlet, and at least one combination must allow a
        # strictly positive duty.
        if self.side is Side.HOT:
            if self.t_in.lo < self.t_out.hi:
                raise InfeasibleCaseError(
                    f"hot stream {self.id}: inlet range [{self.t_in.lo}, {self.t_in.hi}] overlaps "
                    f"outlet range [{self.t_out.lo}, {self.t_out.hi}] in the forbidden direction"
                )
            if not self.t_in.hi > self.t_out.lo:
                raise InfeasibleCaseError(f"hot stream {self.id}: no admissible temperature decrease")
        else:
            if self.t_in.hi > self.t_out.lo:
                raise InfeasibleCaseError(
                    f"cold stream {self.id}: inlet range [{self.t_in.lo}, {self.t_in.hi}] overlaps "
                    f"outlet range [{self.t_out.lo}, {self.t_out.hi}] in the forbidden direction"
                )
            if not self.t_out.hi > self.t_in.lo:
                raise InfeasibleCaseError(f"cold stream {self.id}: no admissible temperature increase")

    @property
    def is_utility_stream(self) -> bool:
        return self.utility_cost > 0

    @property
    def has_variable_flow(self) -> bool:
        return not self.flow_capacity.is_fixed

    @property
    def has_variable_t_in(self) -> bool:
        return not self.t_in.is_fixed

    @property
    def has_variable_t_out(self) -> bool:
        return not self.t_out.is_fixed

    @property
    def t_min(self) -> float:
        """Lowest admissible temperature anywhere on the stream."""
        return min(self.t_in.lo, self.t_out.lo)

    @property
    def t_max(self) -> float:
        return max(self.t_in.hi, self.t_out.hi)

    @property
    def span_max(self) -> float:
        """Largest admissible inlet/outlet temperature difference."""
        if self.side is Side.HOT:
            return self.t_in.hi - self.t_out.lo
        return self.t_out.hi - self.t_in.lo

    @property
    def span_min(self) -> float:
        if self.side is Side.HOT:
            return self.t_in.lo - self.t_out.hi
        return self.t_out.lo - self.t_in.hi

    @property
    def max_duty(self) -> float:
        """Largest enthalpy change the stream can undergo, kW."""
        return self.flow_capacity.hi * self.span_max


@dataclass(frozen=True)
class ConventionalUtility:
    """End-of-stream utility with fixed inlet and outlet temperatures.

    Equal inlet and outlet on a hot utility models condensing steam.
    """

    id: str
    side: Side
    t_in: float
    t_out: float
    h: float
    cost: float

    def __post_init__(self):
        if self.h <= 0:
            raise UnitError(f"utility {self.id}: heat transfer coefficient must be positive")
        if self.cost < 0:
            raise UnitError(f"utility {self.id}: cost must be non-negative")
        if self.side is Side.HOT and self.t_in < self.t_out:
            raise InfeasibleCaseError(f"hot utility {self.id}: inlet {self.t_in} below outlet {self.t_out}")
        if self.side is Side.COLD and self.t_in > self.t_out:
            raise InfeasibleCaseError(f"cold utility {self.id}: inlet {self.t_in} above outlet {self.t_out}")

    @property
    def t_min(self) -> float:
        return min(self.t_in, self.t_out)

    @property
    def t_max(self) -> float:
        return max(self.t_in, self.t_out)


@dataclass(frozen=True)
class CostParams:
    """Cost model: TAC = utility cost + c_f per unit + c_v * (area)^beta."""

    c_f: float
    c_v: float
    beta: float
    currency_label: str = "$"

    def __post_init__(self):
        if self.c_f < 0:
            raise UnitError(f"fixed HEX cost must be non-negative, got {self.c_f}")
        if self.c_v <= 0:
            raise UnitError(f"variable HEX cost must be positive, got {self.c_v}")
        if not 0 < self.beta <= 1:
            raise UnitError(f"cost exponent must be in (0, 1], got {self.beta}")


@dataclass(frozen=True)
class HeatLoadBounds:
    """Global lower/upper bounds for match and utility heat loads, kW."""

    omega_s: float = 0.0
    omega_cu: float = 0.0
    omega_hu: float = 0.0
    Omega_s: float | None = None
    Omega_cu: float | None = None
    Omega_hu: float | None = None


@dataclass(frozen=True)
class SolverOptions:
    """Solver and fitting knobs carried by the case document."""

    adapter: str = "auto"
    executable: str | None = None
    rel_gap: float = 1e-4
    time_limit: float | None = None
    threads: int = 0
    seed: int = 0
    repeats: int = 1
    # piecewise-linear fitting
    simplex_w: int = 4
    n_area_samples: int = 2048
    n_balance_samples: int = 900
    n_utility_samples: int = 32
    area_rmse_target: float = 1.0
    utility_rmse_target: float = 0.5
    max_planes: int = 22

    def __post_init__(self):
        if not 0 < self.rel_gap < 1:
            raise SchemaError(f"rel_gap must be in (0, 1), got {self.rel_gap}")
        if self.simplex_w < 1 or self.simplex_w & (self.simplex_w - 1):
            raise SchemaError(f"simplex grid width must be a power of two, got {self.simplex_w}")


@dataclass(frozen=True)
class CaseStudy:
    """A full problem instance, validated and with derived sets populated."""

    name: str
    streams: tuple[StreamSpec, ...]
    utilities: tuple[ConventionalUtility, ...]
    costs: CostParams
    n_stages: int
    dt_min: float
    gamma: float
    epsilon: float = _DEFAULT_EPSILON
    heat_load_bounds: HeatLoadBounds = field(default_factory=HeatLoadBounds)
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.n_stages < 1:
            raise SchemaError(f"n_stages must be >= 1, got {self.n_stages}")
        if self.dt_min <= 0:
            raise UnitError(f"dt_min must be positive, got {self.dt_min}")
        ids = [s.id for s in self.streams] + [u.id for u in self.utilities]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise SchemaError(f"duplicate stream/utility ids: {sorted(dupes)}")
        if not self.hot_streams or not self.cold_streams:
            raise SchemaError("case needs at least one hot and one cold stream")

    # ---- derived stream sets -------------------------------------------------

    @property
    def hot_streams(self) -> tuple[StreamSpec, ...]:
        return tuple(s for s in self.streams if s.side is Side.HOT)

    @property
    def cold_streams(self) -> tuple[StreamSpec, ...]:
        return tuple(s for s in self.streams if s.side is Side.COLD)

    @property
    def hot_utilities(self) -> tuple[ConventionalUtility, ...]:
        return tuple(u for u in self.utilities if u.side is Side.HOT)

    @property
    def cold_utilities(self) -> tuple[ConventionalUtility, ...]:
        return tuple(u for u in self.utilities if u.side is Side.COLD)

    @property
    def h_f(self) -> frozenset[str]:
        """Hot utility streams with variable flow capacity."""
        return frozenset(s.id for s in self.hot_streams if s.is_utility_stream and s.has_variable_flow)

    @property
    def c_f_set(self) -> frozenset[str]:
        """Cold utility streams with variable flow capacity."""
        return frozenset(s.id for s in self.cold_streams if s.is_utility_stream and s.has_variable_flow)

    @property
    def h_tin(self) -> frozenset[str]:
        return frozenset(s.id for s in self.hot_streams if s.is_utility_stream and s.has_variable_t_in)

    @property
    def h_tout(self) -> frozenset[str]:
        return frozenset(s.id for s in self.hot_streams if s.is_utility_stream and s.has_variable_t_out)

    @property
    def c_tin(self) -> frozenset[str]:
        return frozenset(s.id for s in self.cold_streams if s.is_utility_stream and s.has_variable_t_in)

    @property
    def c_tout(self) -> frozenset[str]:
        return frozenset(s.id for s in self.cold_streams if s.is_utility_stream and s.has_variable_t_out)

    def stream(self, stream_id: str) -> StreamSpec:
        for s in self.streams:
            if s.id == stream_id:
                return s
        raise KeyError(stream_id)

    def utility(self, utility_id: str) -> ConventionalUtility:
        for u in self.utilities:
            if u.id == utility_id:
                return u
        raise KeyError(utility_id)

    # ---- index ranges --------------------------------------------------------

    @property
    def n_match_stages(self) -> int:
        """Match stages k = 1 .. n_stages + 1 (one extra end stage)."""
        return self.n_stages + 1

    @property
    def n_temperatures(self) -> int:
        """Temperature positions k = 1 .. n_stages + 2."""
        return self.n_stages + 2

    # ---- derived defaults ----------------------------------------------------

    def cost_vector(self, stream: StreamSpec) -> float:
        """Utility-cost coefficient attached to a stream's matches."""
        return stream.utility_cost if stream.is_utility_stream else 0.0

    def pair_max_duty(self, hot: StreamSpec, cold: StreamSpec) -> float:
        return min(hot.max_duty, cold.max_duty)

    def pair_is_possible(self, hot: StreamSpec, cold: StreamSpec) -> bool:
        """Whether some admissible temperatures permit any heat exchange."""
        return hot.t_in.hi >= cold.t_in.lo + self.dt_min and self.pair_max_duty(hot, cold) > 0

    def pair_dt_max(self, hot: StreamSpec, cold: StreamSpec) -> float:
        """Largest approach temperature the pair can ever see."""
        return hot.t_max - cold.t_min

    @property
    def omega(self) -> HeatLoadBounds:
        """Heat-load bounds with data-driven defaults filled in."""
        b = self.heat_load_bounds
        hot_total = sum(s.max_duty for s in self.hot_streams)
        cold_total = sum(s.max_duty for s in self.cold_streams)
        return HeatLoadBounds(
            omega_s=b.omega_s,
            omega_cu=b.omega_cu,
            omega_hu=b.omega_hu,
            Omega_s=b.Omega_s if b.Omega_s is not None else min(hot_total, cold_total),
            Omega_cu=b.Omega_cu if b.Omega_cu is not None else max((s.max_duty for s in self.hot_streams), default=0.0),
            Omega_hu=b.Omega_hu if b.Omega_hu is not None else max((s.max_duty for s in self.cold_streams), default=0.0),
        )


def default_gamma(streams, utilities, dt_min: float) -> float:
    """Largest admissible temperature range plus dt_min.

    Big enough that a relaxed approach-temperature row can never cut a
    feasible solution, even when the coldest hot and hottest cold
    temperatures coincide with the global extremes.
    """
    t_max = max([s.t_max for s in streams] + [u.t_max for u in utilities], default=0.0)
    t_min = min([s.t_min for s in streams] + [u.t_min for u in utilities], default=0.0)
    return (t_max - t_min) + dt_min


# ---- TOML loading ---------------------------------------------------------


def _as_bounded(value, *, what: str, epsilon: float, open_low: bool = False) -> Bounded:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Bounded.fixed(float(value))
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        lo, hi = sorted(float(v) for v in value)
        if lo == hi:
            return Bounded.fixed(lo)
        if open_low and lo <= 0.0:
            lo = epsilon
        return Bounded.range(lo, hi)
    raise SchemaError(f"{what}: expected a number or a two-element array, got {value!r}")


def _req(table: dict, key: str, what: str):
    if key not in table:
        raise SchemaError(f"{what}: missing required field '{key}'")
    return table[key]


def _float(table: dict, key: str, what: str, default=None) -> float:
    if key not in table:
        if default is None:
            raise SchemaError(f"{what}: missing required field '{key}'")
        return float(default)
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{what}: field '{key}' must be a number, got {v!r}")
    return float(v)


def _side(raw, what: str) -> Side:
    try:
        return Side(str(raw).lower())
    except ValueError:
        raise SchemaError(f"{what}: side must be 'hot' or 'cold', got {raw!r}") from None


def _check_id(sid: str, what: str) -> str:
    if not sid or not all(c.isalnum() or c == "_" for c in sid):
        raise SchemaError(f"{what}: id must be alphanumeric/underscore, got {sid!r}")
    return sid


def _parse_stream(table: dict, epsilon: float) -> StreamSpec:
    sid = _check_id(str(_req(table, "id", "stream")), "stream")
    what = f"stream {sid}"
    return StreamSpec(
        id=sid,
        side=_side(_req(table, "side", what), what),
        t_in=_as_bounded(_req(table, "t_in", what), what=f"{what}.t_in", epsilon=epsilon),
        t_out=_as_bounded(_req(table, "t_out", what), what=f"{what}.t_out", epsilon=epsilon),
        flow_capacity=_as_bounded(
            _req(table, "flow_capacity", what), what=f"{what}.flow_capacity", epsilon=epsilon, open_low=True
        ),
        h=_float(table, "h", what),
        utility_cost=_float(table, "utility_cost", what, default=0.0),
    )


def _parse_utility(table: dict) -> ConventionalUtility:
    uid = _check_id(str(_req(table, "id", "utility")), "utility")
    what = f"utility {uid}"
    return ConventionalUtility(
        id=uid,
        side=_side(_req(table, "side", what), what),
        t_in=_float(table, "t_in", what),
        t_out=_float(table, "t_out", what),
        h=_float(table, "h", what),
        cost=_float(table, "cost", what),
    )


_SOLVER_KEYS = {
    "adapter": str,
    "executable": str,
    "rel_gap": float,
    "time_limit": float,
    "threads": int,
    "seed": int,
    "repeats": int,
    "simplex_w": int,
    "n_area_samples": int,
    "n_balance_samples": int,
    "n_utility_samples": int,
    "area_rmse_target": float,
    "utility_rmse_target": float,
    "max_planes": int,
}


def _parse_solver(table: dict) -> SolverOptions:
    kwargs = {}
    for key, value in table.items():
        if key not in _SOLVER_KEYS:
            raise SchemaError(f"[solver]: unknown field '{key}'")
        kwargs[key] = _SOLVER_KEYS[key](value)
    return SolverOptions(**kwargs)


def load_case(source: str | Path) -> CaseStudy:
    """Parse and validate a case document.

    ``source`` is a path to a ``.case`` file or the document text itself.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".case")):
        text = Path(source).read_text()
        fallback_name = Path(source).stem
    else:
        text = source
        fallback_name = "case"
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"case document does not parse: {exc}") from exc

    epsilon = _float(doc, "epsilon", "case", default=_DEFAULT_EPSILON)
    streams = tuple(_parse_stream(t, epsilon) for t in doc.get("stream", []))
    utilities = tuple(_parse_utility(t) for t in doc.get("utility", []))
    if "costs" not in doc:
        raise SchemaError("case: missing [costs] section")
    costs_tbl = doc["costs"]
    costs = CostParams(
        c_f=_float(costs_tbl, "fixed", "[costs]"),
        c_v=_float(costs_tbl, "variable", "[costs]"),
        beta=_float(costs_tbl, "beta", "[costs]"),
        currency_label=str(costs_tbl.get("currency", "$")),
    )
    dt_min = _float(doc, "dt_min", "case")
    n_stages = doc.get("n_stages")
    if not isinstance(n_stages, int) or isinstance(n_stages, bool):
        raise SchemaError(f"case: n_stages must be an integer, got {n_stages!r}")
    gamma = _float(doc, "gamma", "case", default=default_gamma(streams, utilities, dt_min))
    hlb_tbl = doc.get("heat_load_bounds", {})
    bounds = HeatLoadBounds(
        omega_s=_float(hlb_tbl, "omega_stream", "[heat_load_bounds]", default=0.0),
        omega_cu=_float(hlb_tbl, "omega_cu", "[heat_load_bounds]", default=0.0),
        omega_hu=_float(hlb_tbl, "omega_hu", "[heat_load_bounds]", default=0.0),
        Omega_s=(_float(hlb_tbl, "Omega_stream", "[heat_load_bounds]") if "Omega_stream" in hlb_tbl else None),
        Omega_cu=(_float(hlb_tbl, "Omega_cu", "[heat_load_bounds]") if "Omega_cu" in hlb_tbl else None),
        Omega_hu=(_float(hlb_tbl, "Omega_hu", "[heat_load_bounds]") if "Omega_hu" in hlb_tbl else None),
    )
    solver = _parse_solver(doc.get("solver", {}))
    return CaseStudy(
        name=str(doc.get("name", fallback_name)),
        streams=streams,
        utilities=utilities,
        costs=costs,
        n_stages=n_stages,
        dt_min=dt_min,
        gamma=gamma,
        epsilon=epsilon,
        heat_load_bounds=bounds,
        solver=solver,
    )


def with_solver_overrides(case: CaseStudy, **overrides) -> CaseStudy:
    """Return a copy of the case with some solver options replaced."""
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    if not cleaned:
        return case
    return replace(case, solver=replace(case.solver, **cleaned))


def fixture_path(name: str) -> Path:
    """Path of a bundled case fixture, e.g. ``cs1_base``."""
    p = Path(__file__).parent / "fixtures" / f"{name}.case"
    if not p.exists():
        raise FileNotFoundError(p)
    return p
