"""Least-squares fitting of simplex surrogates.

Node values are linear in the model, so for fixed breakpoints they come
from one sparse least-squares solve over the barycentric design matrix.
Free breakpoints are optimized one at a time by bounded scalar search,
refitting node values at every trial position.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .grids import (
    FitReport,
    SampleGrid,
    SimplexModel,
    UnderdeterminedFitError,
    relative_rmse,
)

STEP_TOL = 1e-6
_MIN_CELL_FRACTION = 1e-3


def _design_matrix(model: SimplexModel, x: np.ndarray) -> np.ndarray:
    nodes, weights = model.membership(x)
    a = np.zeros((len(x), model.n_nodes))
    rows = np.repeat(np.arange(len(x)), nodes.shape[1])
    np.add.at(a, (rows, nodes.ravel()), weights.ravel())
    return a


def _fit_node_values(
    model: SimplexModel,
    x: np.ndarray,
    f: np.ndarray,
    pinned: dict[int, float] | None = None,
    w: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """LSQ node values for the current breakpoints; returns (values, sse)."""
    a = _design_matrix(model, x)
    rhs = f.astype(float).copy()
    values = np.zeros(model.n_nodes)
    free = np.ones(model.n_nodes, dtype=bool)
    if pinned:
        for node, val in pinned.items():
            values[node] = val
            free[node] = False
        rhs = rhs - a[:, ~free] @ values[~free]
    a_free = a[:, free]
    if w is not None:
        a_free = a_free * w[:, None]
        rhs = rhs * w
    # nodes without sample support would be silently arbitrary; damp them to 0
    support = (a_free != 0).any(axis=0)
    sol = np.zeros(a_free.shape[1])
    if support.any():
        coef, *_ = np.linalg.lstsq(a_free[:, support], rhs, rcond=None)
        sol[support] = coef
    values[free] = sol
    resid = a @ values - f
    if w is not None:
        resid = resid * w
    return values, float(np.sum(resid**2))


def _refit(model: SimplexModel, grid: SampleGrid, pinned, w=None) -> float:
    values, sse = _fit_node_values(model, grid.x_in, grid.f_in, pinned, w)
    model.node_values = values
    return sse


def _optimize_breakpoints(
    model: SimplexModel,
    grid: SampleGrid,
    pinned,
    w=None,
    max_sweeps: int = 6,
) -> int:
    """Coordinate descent over interior breakpoints; returns sweep count."""
    sse = _refit(model, grid, pinned, w)
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        improved = False
        for dim in range(model.dims):
            bp = model.breakpoints[dim]
            span = bp[-1] - bp[0]
            for j in range(1, model.w):
                lo = bp[j - 1] + _MIN_CELL_FRACTION * span
                hi = bp[j + 1] - _MIN_CELL_FRACTION * span
                if lo >= hi:
                    continue
                current = bp[j]

                def sse_at(pos: float) -> float:
                    bp[j] = pos
                    _, trial = _fit_node_values(model, grid.x_in, grid.f_in, pinned, w)
                    return trial

                res = minimize_scalar(
                    sse_at, bounds=(lo, hi), method="bounded",
                    options={"xatol": max(STEP_TOL, 1e-4) * span, "maxiter": 40},
                )
                if res.fun < sse - STEP_TOL * (1.0 + sse):
                    bp[j] = float(res.x)
                    sse = float(res.fun)
                    improved = True
                else:
                    bp[j] = current
        _refit(model, grid, pinned, w)
        if not improved:
            break
    return sweeps


def _report(model: SimplexModel, grid: SampleGrid, iterations: int, target: float | None) -> FitReport:
    fit_vals = model.eval_many(grid.x_in)
    resid = fit_vals - grid.f_in
    rmse_rel = relative_rmse(resid, grid.f_range)
    return FitReport(
        rmse_rel=rmse_rel,
        max_abs_err=float(np.abs(resid).max()) if resid.size else 0.0,
        n_pieces=model.simplex_count,
        iterations=iterations,
        converged=target is None or rmse_rel <= target,
    )


def _pinned_nodes(model: SimplexModel, pin_zero_axis: int | None) -> dict[int, float] | None:
    """Pin node values to 0 where the given coordinate is 0 (duty = 0 line)."""
    if pin_zero_axis is None:
        return None
    coords = model.node_coords()
    pinned = {i: 0.0 for i in range(model.n_nodes) if coords[i, pin_zero_axis] == 0.0}
    return pinned or None


def fit_simplices_j1(
    samples: SampleGrid,
    w: int = 4,
    free_breakpoints: bool = True,
    pin_zero_axis: int | None = None,
    target_rmse_rel: float | None = None,
    weighting: str = "uniform",
) -> tuple[SimplexModel, FitReport]:
    """Fit a union-jack simplex surrogate to 2-D samples."""
    if samples.dims != 2:
        raise ValueError("fit_simplices_j1 needs 2-D samples")
    model = _skeleton(samples, w)
    if samples.n_feasible < model.n_nodes:
        raise UnderdeterminedFitError(
            f"{samples.n_feasible} samples cannot determine {model.n_nodes} node values"
        )
    pinned = _pinned_nodes(model, pin_zero_axis)
    wts = _weights(samples, weighting)
    sweeps = 1
    if free_breakpoints:
        sweeps = _optimize_breakpoints(model, samples, pinned, wts)
    else:
        _refit(model, samples, pinned, wts)
    report = _report(model, samples, sweeps, target_rmse_rel)
    model.report = report
    return model, report


def _weights(samples: SampleGrid, weighting: str):
    if weighting == "uniform":
        return None
    if weighting == "relative":
        from .hyperplane import relative_weights

        return relative_weights(samples.f_in)
    raise ValueError(f"unknown weighting {weighting!r}")


def fit_segments_1d(
    samples: SampleGrid,
    target_rmse_rel: float = 0.5,
    max_segments: int = 4,
    free_breakpoints: bool = True,
) -> tuple[SimplexModel, FitReport]:
    """Continuous piecewise-linear fit in one variable.

    Starts at the default width and doubles the segment count until the
    RMSE target is met or max_segments is reached.
    """
    if samples.dims != 1:
        raise ValueError("fit_segments_1d needs 1-D samples")
    w = min(4, max_segments)
    best: tuple[SimplexModel, FitReport] | None = None
    while True:
        model = _skeleton(samples, w)
        if samples.n_feasible < model.n_nodes:
            raise UnderdeterminedFitError(
                f"{samples.n_feasible} samples cannot determine {model.n_nodes} node values"
            )
        sweeps = 1
        if free_breakpoints:
            sweeps = _optimize_breakpoints(model, samples, None)
        else:
            _refit(model, samples, None)
        report = _report(model, samples, sweeps, target_rmse_rel)
        model.report = report
        if best is None or report.rmse_rel < best[1].rmse_rel:
            best = (model, report)
        if report.rmse_rel <= target_rmse_rel or 2 * w > max_segments:
            return best
        w *= 2


def _skeleton(samples: SampleGrid, w: int) -> SimplexModel:
    bps = [np.linspace(lo, hi, w + 1) for lo, hi in samples.domain]
    return SimplexModel(dims=samples.dims, w=w, breakpoints=bps, node_values=np.zeros((w + 1) ** samples.dims))


def eval_pwl(model, x) -> float:
    """Evaluate a fitted surrogate (hyperplane or simplex) at a point."""
    return model.eval(x)
