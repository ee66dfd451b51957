"""Physical formulas and sample generation for the surrogate fits.

Utility heat exchanger areas follow the closed one-variable forms obtained
by substituting the end-stage energy balance into the counterflow area
equation.  On the hot-utility side the published form carries a sign slip
in the denominator; the expressions here are re-derived so that both sides
evaluate to ``q / (U * LMTD)`` exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ..case import ConventionalUtility, CostParams, Side, StreamSpec
from .grids import EmptyDomainError, SampleGrid

LMTD_SINGULAR_TOL = 1e-9


def u_coefficient(h_a: float, h_b: float) -> float:
    """Overall heat transfer coefficient of a match, kW/m2K."""
    return 1.0 / (1.0 / h_a + 1.0 / h_b)


def lmtd(dt1: float, dt2: float) -> float:
    """Log-mean of two positive approach temperatures, continuous at dt1=dt2."""
    if dt1 <= 0 or dt2 <= 0:
        raise ValueError(f"approach temperatures must be positive, got ({dt1}, {dt2})")
    if abs(dt1 - dt2) < LMTD_SINGULAR_TOL:
        return 0.5 * (dt1 + dt2)
    return (dt1 - dt2) / math.log(dt1 / dt2)


def reduced_area(q: float, u: float, lmtd_value: float, beta: float) -> float:
    """(q / (U * LMTD))^beta; zero duty needs zero area."""
    if q <= 0:
        return 0.0
    return (q / (u * lmtd_value)) ** beta


def hot_utility_area(q: float, stream: StreamSpec, utility: ConventionalUtility, beta: float) -> float:
    """Reduced area of a hot-utility exchanger at the cold stream's hot end."""
    f = stream.flow_capacity.value
    t_out = stream.t_out.value
    dt1 = utility.t_out - t_out + q / f
    dt2 = utility.t_in - t_out
    u = u_coefficient(utility.h, stream.h)
    return reduced_area(q, u, lmtd(dt1, dt2), beta)


def cold_utility_area(q: float, stream: StreamSpec, utility: ConventionalUtility, beta: float) -> float:
    """Reduced area of a cold-utility exchanger at the hot stream's cold end."""
    f = stream.flow_capacity.value
    t_out = stream.t_out.value
    dt1 = t_out + q / f - utility.t_out
    dt2 = t_out - utility.t_in
    u = u_coefficient(utility.h, stream.h)
    return reduced_area(q, u, lmtd(dt1, dt2), beta)


def _grid_shape(n_points: int) -> tuple[int, int]:
    n_rows = max(2, int(round(math.sqrt(n_points))))
    n_cols = max(2, n_points // n_rows)
    return n_rows, n_cols


def sample_stream_area(
    hot: StreamSpec,
    cold: StreamSpec,
    costs: CostParams,
    n_points: int = 2048,
    dt_min: float = 1.0,
) -> SampleGrid:
    """Sample the reduced match area over the feasible (LMTD, q) region.

    The region is the bounding rectangle [dt_min, D] x [0, Omega] with two
    physical cuts: above the LMTD a counterflow exchanger can still reach
    at that duty, and below the LMTD implied by the stage-interface
    temperature drops (at duty q those approach temperatures must differ
    by at least q * |1/F_hot - 1/F_cold|).
    """
    omega = min(hot.max_duty, cold.max_duty)
    if omega <= 0:
        raise EmptyDomainError(f"pair {hot.id}/{cold.id}: no transferable duty")
    d = hot.t_in.hi - cold.t_in.lo
    if d < dt_min:
        raise EmptyDomainError(f"pair {hot.id}/{cold.id}: approach below dt_min over the whole domain")
    u = u_coefficient(hot.h, cold.h)
    f_hot = hot.flow_capacity.hi
    f_cold = cold.flow_capacity.hi
    # smallest admissible approach-temperature spread per unit duty; zero
    # when the flow-capacity ranges overlap and the two sides can balance
    if max(hot.flow_capacity.lo, cold.flow_capacity.lo) <= min(f_hot, f_cold):
        spread = 0.0
    else:
        spread = min(
            abs(1.0 / fi - 1.0 / fj)
            for fi in (hot.flow_capacity.lo, f_hot)
            for fj in (cold.flow_capacity.lo, f_cold)
        )

    n_l, n_q = _grid_shape(n_points)
    l_values = np.linspace(dt_min, d, n_l)
    q_values = np.linspace(0.0, omega, n_q)
    ll, qq = np.meshgrid(l_values, q_values)
    x = np.column_stack([ll.ravel(), qq.ravel()])

    dt_a = d - x[:, 1] / f_cold
    dt_b = d - x[:, 1] / f_hot
    l_cap = np.full(x.shape[0], -np.inf)
    ok = (dt_a > 0) & (dt_b > 0)
    l_cap[ok] = [lmtd(a, b) for a, b in zip(dt_a[ok], dt_b[ok])]
    l_floor = np.array([lmtd(dt_min, dt_min + spread * qi) if qi > 0 else dt_min for qi in x[:, 1]])
    mask = (x[:, 0] <= l_cap + 1e-12) & (x[:, 0] >= l_floor - 1e-12)

    f = np.zeros(x.shape[0])
    nz = x[:, 1] > 0
    f[nz] = (x[nz, 1] / (u * x[nz, 0])) ** costs.beta
    grid = SampleGrid(
        dims=2,
        x=x,
        f=f,
        domain=[(dt_min, d), (0.0, omega)],
        feasible_mask=mask,
    )
    if grid.n_feasible == 0:
        raise EmptyDomainError(f"pair {hot.id}/{cold.id}: empty feasible area domain")
    return grid


def sample_stream_area_box(
    hot: StreamSpec,
    cold: StreamSpec,
    costs: CostParams,
    n_points: int = 2048,
    dt_min: float = 1.0,
) -> SampleGrid:
    """Reduced-area samples over the full (LMTD, q) bounding rectangle.

    Interpolating surrogates need values everywhere the model variables can
    wander, including points outside the single-exchanger feasible cuts.
    """
    omega = min(hot.max_duty, cold.max_duty)
    if omega <= 0:
        raise EmptyDomainError(f"pair {hot.id}/{cold.id}: no transferable duty")
    d = hot.t_in.hi - cold.t_in.lo
    if d < dt_min:
        raise EmptyDomainError(f"pair {hot.id}/{cold.id}: approach below dt_min over the whole domain")
    u = u_coefficient(hot.h, cold.h)
    n_l, n_q = _grid_shape(n_points)
    l_values = np.linspace(dt_min, d, n_l)
    q_values = np.linspace(0.0, omega, n_q)
    ll, qq = np.meshgrid(l_values, q_values)
    x = np.column_stack([ll.ravel(), qq.ravel()])
    f = np.zeros(x.shape[0])
    nz = x[:, 1] > 0
    f[nz] = (x[nz, 1] / (u * x[nz, 0])) ** costs.beta
    return SampleGrid(
        dims=2,
        x=x,
        f=f,
        domain=[(dt_min, d), (0.0, omega)],
        feasible_mask=np.ones(x.shape[0], dtype=bool),
    )


def utility_duty_range(
    stream: StreamSpec,
    utility: ConventionalUtility,
    dt_min: float,
) -> tuple[float, float]:
    """Feasible duty interval (q_lo, q_hi) of a conventional-utility match.

    Returns (0, 0) when no positive duty keeps both approach temperatures
    at or above dt_min.
    """
    f = stream.flow_capacity.value
    t_out = stream.t_out.value
    if stream.side is Side.HOT:
        if utility.side is not Side.COLD:
            raise ValueError("hot streams take a cold utility")
        dt2 = t_out - utility.t_in
        q_lo = f * (utility.t_out + dt_min - t_out)
    else:
        if utility.side is not Side.HOT:
            raise ValueError("cold streams take a hot utility")
        dt2 = utility.t_in - t_out
        q_lo = f * (dt_min - utility.t_out + t_out)
    q_hi = stream.max_duty
    if dt2 < dt_min:
        return 0.0, 0.0
    q_lo = max(q_lo, 0.0)
    if q_lo >= q_hi:
        return 0.0, 0.0
    return q_lo, q_hi


def sample_utility_area(
    stream: StreamSpec,
    utility: ConventionalUtility,
    costs: CostParams,
    n_points: int = 32,
    dt_min: float = 1.0,
) -> SampleGrid:
    """1-D reduced-area samples of a conventional-utility exchanger."""
    if not stream.flow_capacity.is_fixed or not stream.t_out.is_fixed:
        raise ValueError(f"stream {stream.id}: conventional-utility area needs fixed flow and outlet")
    q_lo, q_hi = utility_duty_range(stream, utility, dt_min)
    if q_hi <= 0:
        raise EmptyDomainError(f"{stream.id}/{utility.id}: dt_min unreachable at any duty")
    if q_lo == 0.0:
        q_lo = 1e-9 * q_hi  # open lower end: include the q -> 0+ limit
    q = np.linspace(q_lo, q_hi, n_points)
    if stream.side is Side.HOT:
        f = np.array([cold_utility_area(qi, stream, utility, costs.beta) for qi in q])
    else:
        f = np.array([hot_utility_area(qi, stream, utility, costs.beta) for qi in q])
    return SampleGrid(
        dims=1,
        x=q.reshape(-1, 1),
        f=f,
        domain=[(float(q[0]), float(q[-1]))],
        feasible_mask=np.ones(n_points, dtype=bool),
    )


def sample_balance(
    f_range: tuple[float, float],
    dt_range: tuple[float, float],
    n_points: int = 900,
) -> SampleGrid:
    """Samples of duty = flow capacity * temperature difference."""
    if f_range[1] <= f_range[0] or dt_range[1] < dt_range[0]:
        raise EmptyDomainError(f"degenerate balance domain F={f_range}, dT={dt_range}")
    n_f, n_dt = _grid_shape(n_points)
    fv = np.linspace(f_range[0], f_range[1], n_f)
    dv = np.linspace(dt_range[0], dt_range[1], n_dt)
    ff, dd = np.meshgrid(fv, dv)
    x = np.column_stack([ff.ravel(), dd.ravel()])
    f = x[:, 0] * x[:, 1]
    return SampleGrid(
        dims=2,
        x=x,
        f=f,
        domain=[tuple(map(float, f_range)), tuple(map(float, dt_range))],
        feasible_mask=np.ones(x.shape[0], dtype=bool),
    )


def sample_lmtd(
    dt1_range: tuple[float, float],
    dt2_range: tuple[float, float] | None = None,
    n_points: int = 900,
) -> SampleGrid:
    """Samples of the log-mean temperature difference over a dt box."""
    if dt2_range is None:
        dt2_range = dt1_range
    if dt1_range[0] <= 0 or dt2_range[0] <= 0:
        raise EmptyDomainError("LMTD domain must have positive approach temperatures")
    n_a, n_b = _grid_shape(n_points)
    av = np.linspace(dt1_range[0], dt1_range[1], n_a)
    bv = np.linspace(dt2_range[0], dt2_range[1], n_b)
    aa, bb = np.meshgrid(av, bv)
    x = np.column_stack([aa.ravel(), bb.ravel()])
    f = np.array([lmtd(a, b) for a, b in x])
    return SampleGrid(
        dims=2,
        x=x,
        f=f,
        domain=[tuple(map(float, dt1_range)), tuple(map(float, dt2_range))],
        feasible_mask=np.ones(x.shape[0], dtype=bool),
    )
