"""Sample grids, simplex surrogates and their evaluation.

Two-dimensional surrogates live on a rectilinear grid with ``w`` cells per
dimension (``w`` a power of two).  Each cell is split into two triangles by
one diagonal; diagonal directions alternate so that every diagonal connects
the two cell corners whose index sum is even (the union-jack pattern).
That parity structure is what makes the logarithmic MILP encoding work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..case import HensError


class EmptyDomainError(HensError):
    """The physically feasible sampling region is empty."""


class UnderdeterminedFitError(HensError):
    """Fewer samples than surrogate degrees of freedom."""


@dataclass
class SampleGrid:
    """Sampled function values over a (masked) rectangular domain."""

    dims: int
    x: np.ndarray          # (N, dims)
    f: np.ndarray          # (N,)
    domain: list[tuple[float, float]]
    feasible_mask: np.ndarray  # (N,) bool

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if self.x.shape[1] != self.dims:
            self.x = self.x.reshape(-1, self.dims)
        self.f = np.asarray(self.f, dtype=float)
        self.feasible_mask = np.asarray(self.feasible_mask, dtype=bool)
        if not np.all(np.isfinite(self.f[self.feasible_mask])):
            raise EmptyDomainError("non-finite sample values inside the feasible region")

    @property
    def n_feasible(self) -> int:
        return int(self.feasible_mask.sum())

    @property
    def x_in(self) -> np.ndarray:
        return self.x[self.feasible_mask]

    @property
    def f_in(self) -> np.ndarray:
        return self.f[self.feasible_mask]

    @property
    def f_range(self) -> float:
        f = self.f_in
        return float(f.max() - f.min()) if f.size else 0.0


@dataclass(frozen=True)
class FitReport:
    """Fit diagnostics; rmse_rel is percent of the sampled value range."""

    rmse_rel: float
    max_abs_err: float
    n_pieces: int
    iterations: int
    converged: bool


def relative_rmse(residuals: np.ndarray, f_range: float) -> float:
    rmse = float(np.sqrt(np.mean(np.square(residuals)))) if residuals.size else 0.0
    if f_range <= 0:
        return 0.0
    return 100.0 * rmse / f_range


def _is_power_of_two(w: int) -> bool:
    return w >= 1 and (w & (w - 1)) == 0


@dataclass
class SimplexModel:
    """Continuous piecewise-linear interpolant on a union-jack grid.

    ``breakpoints`` holds one strictly increasing array per dimension with
    ``w + 1`` entries.  ``node_values`` is flat over grid nodes; in 2-D the
    node ``(a, b)`` (x index ``a``, y index ``b``) sits at ``b*(w+1) + a``.
    """

    dims: int
    w: int
    breakpoints: list[np.ndarray]
    node_values: np.ndarray
    report: FitReport | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError(f"only 1-D and 2-D surrogates are supported, got dims={self.dims}")
        if not _is_power_of_two(self.w):
            raise ValueError(f"grid width must be a power of two, got {self.w}")
        self.breakpoints = [np.asarray(bp, dtype=float) for bp in self.breakpoints]
        for bp in self.breakpoints:
            if bp.shape != (self.w + 1,):
                raise ValueError(f"expected {self.w + 1} breakpoints per dimension, got {bp.shape}")
            if np.any(np.diff(bp) <= 0):
                raise ValueError("breakpoints must be strictly increasing")
        self.node_values = np.asarray(self.node_values, dtype=float)
        if self.node_values.shape != (self.n_nodes,):
            raise ValueError(f"expected {self.n_nodes} node values, got {self.node_values.shape}")

    @property
    def n_nodes(self) -> int:
        return (self.w + 1) ** self.dims

    @property
    def simplex_count(self) -> int:
        return self.w ** self.dims * math.factorial(self.dims)

    @property
    def domain(self) -> list[tuple[float, float]]:
        return [(float(bp[0]), float(bp[-1])) for bp in self.breakpoints]

    def node_coords(self) -> np.ndarray:
        """(n_nodes, dims) array of node coordinates in flat node order."""
        if self.dims == 1:
            return self.breakpoints[0].reshape(-1, 1)
        xs, ys = self.breakpoints
        gx, gy = np.meshgrid(xs, ys)  # row b, column a
        return np.column_stack([gx.ravel(), gy.ravel()])

    def node_flat(self, a: int, b: int = 0) -> int:
        return b * (self.w + 1) + a

    def simplices(self) -> list[tuple[int, ...]]:
        """Vertex (flat node) tuples of every simplex, deterministic order."""
        if self.dims == 1:
            return [(a, a + 1) for a in range(self.w)]
        out = []
        for q in range(self.w):
            for p in range(self.w):
                out.extend(self.cell_triangles(p, q))
        return out

    def cell_triangles(self, p: int, q: int) -> list[tuple[int, int, int]]:
        """The two triangles of cell (p, q): (below diagonal, above diagonal)."""
        n = self.node_flat
        if (p + q) % 2 == 0:
            # diagonal (p,q)-(p+1,q+1)
            below = (n(p, q), n(p + 1, q), n(p + 1, q + 1))
            above = (n(p, q), n(p, q + 1), n(p + 1, q + 1))
        else:
            # diagonal (p+1,q)-(p,q+1)
            below = (n(p, q), n(p + 1, q), n(p, q + 1))
            above = (n(p + 1, q), n(p + 1, q + 1), n(p, q + 1))
        return [below, above]

    # ---- evaluation ----------------------------------------------------------

    def _locate(self, bp: np.ndarray, v: float) -> int:
        if v < bp[0] - 1e-9 or v > bp[-1] + 1e-9:
            raise ValueError(f"value {v} outside surrogate domain [{bp[0]}, {bp[-1]}]")
        i = int(np.searchsorted(bp, v, side="right") - 1)
        return min(max(i, 0), self.w - 1)

    def eval(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.dims == 1:
            bp = self.breakpoints[0]
            p = self._locate(bp, x[0])
            t = (x[0] - bp[p]) / (bp[p + 1] - bp[p])
            return float((1 - t) * self.node_values[p] + t * self.node_values[p + 1])
        xs, ys = self.breakpoints
        p = self._locate(xs, x[0])
        q = self._locate(ys, x[1])
        u = (x[0] - xs[p]) / (xs[p + 1] - xs[p])
        v = (x[1] - ys[q]) / (ys[q + 1] - ys[q])
        below, above = self.cell_triangles(p, q)
        if (p + q) % 2 == 0:
            tri = below if u >= v else above
        else:
            tri = below if u + v <= 1.0 else above
        lam = self.barycentric(tri, x)
        return float(sum(l * self.node_values[i] for l, i in zip(lam, tri)))

    def barycentric(self, tri: tuple[int, ...], x) -> np.ndarray:
        """Barycentric coordinates of x in the given simplex."""
        coords = self.node_coords()[list(tri)]
        if self.dims == 1:
            a, b = coords[:, 0]
            t = (x[0] - a) / (b - a)
            return np.array([1 - t, t])
        m = np.vstack([coords.T, np.ones(3)])
        rhs = np.array([x[0], x[1], 1.0])
        return np.linalg.solve(m, rhs)

    def design_row(self, x) -> tuple[tuple[int, ...], np.ndarray]:
        """Containing simplex and barycentric weights for one sample point."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.dims == 1:
            bp = self.breakpoints[0]
            p = self._locate(bp, x[0])
            tri = (p, p + 1)
            return tri, self.barycentric(tri, x)
        xs, ys = self.breakpoints
        p = self._locate(xs, x[0])
        q = self._locate(ys, x[1])
        u = (x[0] - xs[p]) / (xs[p + 1] - xs[p])
        v = (x[1] - ys[q]) / (ys[q + 1] - ys[q])
        below, above = self.cell_triangles(p, q)
        if (p + q) % 2 == 0:
            tri = below if u >= v else above
        else:
            tri = below if u + v <= 1.0 else above
        return tri, self.barycentric(tri, x)

    def membership(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized simplex membership for a batch of points.

        Returns (nodes, weights), both (N, dims+1): the flat node indices
        of each point's containing simplex and its barycentric weights.
        Weights follow closed forms for the axis-aligned right triangles.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = len(x)
        if self.dims == 1:
            bp = self.breakpoints[0]
            p = np.clip(np.searchsorted(bp, x[:, 0], side="right") - 1, 0, self.w - 1)
            t = (x[:, 0] - bp[p]) / (bp[p + 1] - bp[p])
            nodes = np.column_stack([p, p + 1])
            weights = np.column_stack([1 - t, t])
            return nodes, weights
        xs, ys = self.breakpoints
        p = np.clip(np.searchsorted(xs, x[:, 0], side="right") - 1, 0, self.w - 1)
        q = np.clip(np.searchsorted(ys, x[:, 1], side="right") - 1, 0, self.w - 1)
        u = (x[:, 0] - xs[p]) / (xs[p + 1] - xs[p])
        v = (x[:, 1] - ys[q]) / (ys[q + 1] - ys[q])
        stride = self.w + 1
        n00 = q * stride + p
        n10 = n00 + 1
        n01 = n00 + stride
        n11 = n01 + 1
        nodes = np.zeros((n, 3), dtype=int)
        weights = np.zeros((n, 3))
        even = (p + q) % 2 == 0
        sel = even & (u >= v)          # below main diagonal
        nodes[sel] = np.column_stack([n00[sel], n10[sel], n11[sel]])
        weights[sel] = np.column_stack([1 - u[sel], u[sel] - v[sel], v[sel]])
        sel = even & (u < v)           # above main diagonal
        nodes[sel] = np.column_stack([n00[sel], n01[sel], n11[sel]])
        weights[sel] = np.column_stack([1 - v[sel], v[sel] - u[sel], u[sel]])
        odd = ~even
        sel = odd & (u + v <= 1.0)     # below anti-diagonal
        nodes[sel] = np.column_stack([n00[sel], n10[sel], n01[sel]])
        weights[sel] = np.column_stack([1 - u[sel] - v[sel], u[sel], v[sel]])
        sel = odd & (u + v > 1.0)      # above anti-diagonal
        nodes[sel] = np.column_stack([n10[sel], n11[sel], n01[sel]])
        weights[sel] = np.column_stack([1 - v[sel], u[sel] + v[sel] - 1, 1 - u[sel]])
        return nodes, weights

    def eval_many(self, x: np.ndarray) -> np.ndarray:
        nodes, weights = self.membership(x)
        return (self.node_values[nodes] * weights).sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "type": "simplex",
            "dims": self.dims,
            "w": self.w,
            "breakpoints": [bp.tolist() for bp in self.breakpoints],
            "node_values": self.node_values.tolist(),
            "report": None if self.report is None else vars(self.report),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimplexModel":
        rep = d.get("report")
        return cls(
            dims=d["dims"],
            w=d["w"],
            breakpoints=[np.asarray(bp) for bp in d["breakpoints"]],
            node_values=np.asarray(d["node_values"]),
            report=FitReport(**rep) if rep else None,
        )


def equidistant_model(dims: int, w: int, domain: list[tuple[float, float]]) -> SimplexModel:
    """Zero-valued surrogate skeleton on an equidistant grid."""
    bps = [np.linspace(lo, hi, w + 1) for lo, hi in domain]
    return SimplexModel(dims=dims, w=w, breakpoints=bps, node_values=np.zeros((w + 1) ** dims))
