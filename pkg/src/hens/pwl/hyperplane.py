"""Max-affine (hyperplane) surrogates fitted by alternating least squares.

A model is the pointwise max (convex side) or min (concave side) of a set
of affine functions.  Fitting alternates between assigning each sample to
its active plane and refitting every plane on its assigned samples,
starting from planes fitted on k-means clusters of the sample sites.
Planes are added until the relative RMSE target is met.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .grids import FitReport, SampleGrid, relative_rmse

STEP_TOL = 1e-6


class PlaneSense(enum.Enum):
    MAX_OF_PLANES = "max"
    MIN_OF_PLANES = "min"


@dataclass
class HyperplaneModel:
    """Pointwise max/min of affine pieces; coefficients are (a0, a1..an)."""

    planes: np.ndarray  # (n_planes, n_dims + 1)
    sense: PlaneSense
    rmse_rel: float = 0.0
    report: FitReport | None = field(default=None, compare=False)

    def __post_init__(self):
        self.planes = np.atleast_2d(np.asarray(self.planes, dtype=float))

    @property
    def n_planes(self) -> int:
        return self.planes.shape[0]

    @property
    def dims(self) -> int:
        return self.planes.shape[1] - 1

    def plane_values(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.planes[:, 0][None, :] + x @ self.planes[:, 1:].T

    def eval(self, x) -> float:
        vals = self.plane_values(np.atleast_2d(x))
        agg = vals.max(axis=1) if self.sense is PlaneSense.MAX_OF_PLANES else vals.min(axis=1)
        return float(agg[0])

    def eval_many(self, x: np.ndarray) -> np.ndarray:
        vals = self.plane_values(x)
        return vals.max(axis=1) if self.sense is PlaneSense.MAX_OF_PLANES else vals.min(axis=1)

    def corner_max(self, domain: list[tuple[float, float]]) -> float:
        """Largest plane value over the domain corners (affine => corner max)."""
        corners = _corners(domain)
        return float(self.plane_values(corners).max())

    def to_dict(self) -> dict:
        return {
            "type": "hyperplane",
            "sense": self.sense.value,
            "planes": self.planes.tolist(),
            "rmse_rel": self.rmse_rel,
            "report": None if self.report is None else vars(self.report),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HyperplaneModel":
        rep = d.get("report")
        return cls(
            planes=np.asarray(d["planes"]),
            sense=PlaneSense(d["sense"]),
            rmse_rel=d["rmse_rel"],
            report=FitReport(**rep) if rep else None,
        )


def _corners(domain: list[tuple[float, float]]) -> np.ndarray:
    corners = [[]]
    for lo, hi in domain:
        corners = [c + [v] for c in corners for v in (lo, hi)]
    return np.asarray(corners, dtype=float)


def _lstsq_plane(x: np.ndarray, f: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    a = np.column_stack([np.ones(len(x)), x])
    if w is not None:
        a = a * w[:, None]
        f = f * w
    coef, *_ = np.linalg.lstsq(a, f, rcond=None)
    return coef


def relative_weights(f: np.ndarray, floor_fraction: float = 0.05) -> np.ndarray:
    """Weights that turn the squared loss into an approximate relative error."""
    scale = float(np.abs(f).max())
    if scale == 0.0:
        return np.ones_like(f)
    return 1.0 / np.maximum(np.abs(f), floor_fraction * scale)


def _kmeans_labels(x: np.ndarray, k: int, rng: np.random.Generator, iters: int = 25) -> np.ndarray:
    # plain Lloyd iterations with distinct random sample sites as seeds
    idx = rng.choice(len(x), size=k, replace=False)
    centers = x[idx].copy()
    labels = np.zeros(len(x), dtype=int)
    for _ in range(iters):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            sel = labels == j
            if sel.any():
                centers[j] = x[sel].mean(axis=0)
            else:
                centers[j] = x[rng.integers(len(x))]
    return labels


def _alternating_fit(
    x: np.ndarray,
    f: np.ndarray,
    planes: np.ndarray,
    w: np.ndarray | None = None,
    max_iters: int = 120,
) -> tuple[np.ndarray, float, int]:
    """Assign/refit loop; returns (planes, weighted sse, iterations)."""
    n_planes = planes.shape[0]
    sq_w = np.ones(len(f)) if w is None else w**2
    prev_sse = np.inf
    assign = None
    for it in range(1, max_iters + 1):
        vals = planes[:, 0][None, :] + x @ planes[:, 1:].T
        new_assign = vals.argmax(axis=1)
        fit = vals.max(axis=1)
        sse = float(np.sum(sq_w * (fit - f) ** 2))
        if assign is not None and np.array_equal(new_assign, assign):
            return planes, sse, it
        if prev_sse - sse < STEP_TOL * (1.0 + sse) and it > 1:
            return planes, sse, it
        assign = new_assign
        prev_sse = sse
        for j in range(n_planes):
            sel = assign == j
            if sel.sum() >= x.shape[1] + 1:
                planes[j] = _lstsq_plane(x[sel], f[sel], None if w is None else w[sel])
    return planes, prev_sse, max_iters


def _initial_planes(
    x: np.ndarray, f: np.ndarray, k: int, rng: np.random.Generator, w: np.ndarray | None = None
) -> np.ndarray:
    labels = _kmeans_labels(x, k, rng)
    planes = np.zeros((k, x.shape[1] + 1))
    global_plane = _lstsq_plane(x, f, w)
    for j in range(k):
        sel = labels == j
        planes[j] = (
            _lstsq_plane(x[sel], f[sel], None if w is None else w[sel])
            if sel.sum() >= x.shape[1] + 1
            else global_plane
        )
    return planes


def fit_hyperplanes(
    samples: SampleGrid,
    target_rmse_rel: float = 1.0,
    max_planes: int = 22,
    sense: PlaneSense = PlaneSense.MAX_OF_PLANES,
    seed: int = 0,
    n_restarts: int = 3,
    weighting: str = "uniform",
) -> tuple[HyperplaneModel, FitReport]:
    """Fit a max-affine model, adding planes until the RMSE target is met.

    Concave targets are fitted through min(y) = -max(-y).  With
    ``weighting="relative"`` the squared loss is scaled by 1/|f| so the
    fit stays accurate near small function values; the reported RMSE is
    always the unweighted range-relative one.
    """
    if samples.n_feasible == 0:
        raise ValueError("no feasible samples to fit")
    if target_rmse_rel <= 0:
        raise ValueError("target_rmse_rel must be positive")
    x = samples.x_in
    f = samples.f_in.copy()
    if sense is PlaneSense.MIN_OF_PLANES:
        f = -f
    f_range = samples.f_range

    if f_range == 0.0:
        planes = np.zeros((1, x.shape[1] + 1))
        planes[0, 0] = f[0]
        report = FitReport(rmse_rel=0.0, max_abs_err=0.0, n_pieces=1, iterations=0, converged=True)
        sign = -1.0 if sense is PlaneSense.MIN_OF_PLANES else 1.0
        return HyperplaneModel(planes=sign * planes, sense=sense, rmse_rel=0.0, report=report), report

    if weighting == "relative":
        w = relative_weights(f)
    elif weighting == "uniform":
        w = None
    else:
        raise ValueError(f"unknown weighting {weighting!r}")

    rng = np.random.default_rng(seed)
    best_planes = _lstsq_plane(x, f, w).reshape(1, -1)
    sq_w = np.ones(len(f)) if w is None else w**2

    def weighted_sse(planes: np.ndarray) -> float:
        fit = (planes[:, 0][None, :] + x @ planes[:, 1:].T).max(axis=1)
        return float(np.sum(sq_w * (fit - f) ** 2))

    def unweighted_rel(planes: np.ndarray) -> float:
        fit = (planes[:, 0][None, :] + x @ planes[:, 1:].T).max(axis=1)
        return relative_rmse(fit - f, f_range)

    best_sse = weighted_sse(best_planes)
    total_iters = 0

    n_planes = 1
    while unweighted_rel(best_planes) > target_rmse_rel and n_planes < max_planes:
        n_planes += 1
        candidates = []
        # warm start: previous solution plus a plane through the worst sample
        vals = best_planes[:, 0][None, :] + x @ best_planes[:, 1:].T
        resid = np.abs(vals.max(axis=1) - f)
        worst = int(resid.argmax())
        warm = np.vstack([best_planes, _lstsq_plane(x, f, w)])
        warm[-1, 0] = f[worst] - x[worst] @ warm[-1, 1:]
        candidates.append(warm)
        for _ in range(n_restarts):
            candidates.append(_initial_planes(x, f, n_planes, rng, w))
        trial_best = None
        for cand in candidates:
            planes, sse, iters = _alternating_fit(x, f, cand.copy(), w)
            total_iters += iters
            if trial_best is None or sse < trial_best[1]:
                trial_best = (planes, sse)
        # adding a plane keeps the previous model reachable, so never regress
        if trial_best[1] <= best_sse:
            best_planes, best_sse = trial_best

    fit_vals = (best_planes[:, 0][None, :] + x @ best_planes[:, 1:].T).max(axis=1)
    resid = fit_vals - f
    rmse_rel = relative_rmse(resid, f_range)
    report = FitReport(
        rmse_rel=rmse_rel,
        max_abs_err=float(np.abs(resid).max()),
        n_pieces=best_planes.shape[0],
        iterations=total_iters,
        converged=rmse_rel <= target_rmse_rel,
    )
    planes_out = -best_planes if sense is PlaneSense.MIN_OF_PLANES else best_planes
    model = HyperplaneModel(planes=planes_out, sense=sense, rmse_rel=rmse_rel, report=report)
    return model, report
