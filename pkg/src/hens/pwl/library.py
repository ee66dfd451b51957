"""Per-case fit orchestration and the versioned fit artifact.

One surrogate per match pair (area and LMTD), per usable conventional
utility and per variable-flow stream balance.  The artifact is a JSON
document keyed by surrogate role so a build can run without re-fitting;
it is deterministic given the case document and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..case import CaseStudy, Side
from .grids import SimplexModel
from .hyperplane import HyperplaneModel, fit_hyperplanes
from .sampling import (
    sample_balance,
    sample_lmtd,
    sample_stream_area,
    sample_stream_area_box,
    sample_utility_area,
)
from .simplexfit import fit_segments_1d, fit_simplices_j1

ARTIFACT_VERSION = 1

# a max-affine surrogate that undershoots the true area by more than this
# (relative, over the feasible samples) hands the minimizer phantom-cheap
# exchangers; such pairs switch to the two-sided simplex interpolant
AREA_UNDERSHOOT_LIMIT = 0.04


class MissingFitError(KeyError):
    pass


@dataclass
class FitLibrary:
    case_name: str
    seed: int
    entries: dict[str, HyperplaneModel | SimplexModel] = field(default_factory=dict)

    def _get(self, key: str):
        if key not in self.entries:
            raise MissingFitError(key)
        return self.entries[key]

    def lmtd(self, hot_id: str, cold_id: str) -> SimplexModel:
        return self._get(f"lmtd:{hot_id}:{cold_id}")

    def stream_area(self, hot_id: str, cold_id: str) -> HyperplaneModel:
        return self._get(f"area:{hot_id}:{cold_id}")

    def stream_area_simplex(self, hot_id: str, cold_id: str) -> SimplexModel | None:
        return self.entries.get(f"areaspx:{hot_id}:{cold_id}")

    def utility_area(self, stream_id: str, utility_id: str) -> SimplexModel:
        return self._get(f"uarea:{stream_id}:{utility_id}")

    def balance(self, stream_id: str, kind: str) -> SimplexModel:
        return self._get(f"eb{kind}:{stream_id}")

    def reports(self) -> dict[str, dict]:
        return {k: vars(m.report) for k, m in self.entries.items() if m.report is not None}

    def worst_rmse_rel(self) -> float:
        reps = self.reports()
        return max((r["rmse_rel"] for r in reps.values()), default=0.0)

    # ---- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "version": ARTIFACT_VERSION,
            "case_name": self.case_name,
            "seed": self.seed,
            "fits": {k: m.to_dict() for k, m in self.entries.items()},
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    @classmethod
    def from_json(cls, text: str) -> "FitLibrary":
        doc = json.loads(text)
        if doc.get("version") != ARTIFACT_VERSION:
            raise ValueError(f"unsupported fit artifact version {doc.get('version')!r}")
        lib = cls(case_name=doc["case_name"], seed=doc["seed"])
        for key, d in doc["fits"].items():
            if d["type"] == "hyperplane":
                lib.entries[key] = HyperplaneModel.from_dict(d)
            else:
                lib.entries[key] = SimplexModel.from_dict(d)
        return lib

    @classmethod
    def load(cls, path: str | Path) -> "FitLibrary":
        return cls.from_json(Path(path).read_text())


def _max_relative_undershoot(model: HyperplaneModel, grid) -> float:
    import numpy as np

    f = grid.f_in
    fit = model.eval_many(grid.x_in)
    floor = 0.05 * float(np.abs(f).max()) if f.size else 1.0
    under = (f - fit) / np.maximum(np.abs(f), floor)
    return float(under.max()) if under.size else 0.0


def fit_case(case: CaseStudy, symbolic=None, seed: int | None = None, log=None) -> FitLibrary:
    """Fit every surrogate the symbolic model needs."""
    from ..superstructure import build_symbolic_model

    if symbolic is None:
        symbolic = build_symbolic_model(case)
    opts = case.solver
    seed = opts.seed if seed is None else seed
    lib = FitLibrary(case_name=case.name, seed=seed)

    def note(msg):
        if log:
            log(msg)

    done_pairs = set()
    for tag in symbolic.stream_area_tags:
        pair = (tag.hot_id, tag.cold_id)
        if pair in done_pairs:
            continue
        done_pairs.add(pair)
        hot, cold = case.stream(tag.hot_id), case.stream(tag.cold_id)
        grid = sample_stream_area(hot, cold, case.costs, n_points=opts.n_area_samples, dt_min=case.dt_min)
        model, report = fit_hyperplanes(
            grid, target_rmse_rel=opts.area_rmse_target, max_planes=opts.max_planes, seed=seed,
        )
        lib.entries[f"area:{tag.hot_id}:{tag.cold_id}"] = model
        note(f"area {tag.hot_id}/{tag.cold_id}: {report.n_pieces} planes, rmse {report.rmse_rel:.2f}%")
        undershoot = _max_relative_undershoot(model, grid)
        if undershoot > AREA_UNDERSHOOT_LIMIT:
            box = sample_stream_area_box(hot, cold, case.costs, n_points=opts.n_area_samples, dt_min=case.dt_min)
            smodel, sreport = fit_simplices_j1(
                box, w=opts.simplex_w, free_breakpoints=True, pin_zero_axis=1, weighting="relative",
            )
            smodel.node_values = smodel.node_values.clip(min=0.0)  # areas are nonnegative
            lib.entries[f"areaspx:{tag.hot_id}:{tag.cold_id}"] = smodel
            note(
                f"area {tag.hot_id}/{tag.cold_id}: max-affine undershoots {100 * undershoot:.1f}%,"
                f" added simplex surrogate (rmse {sreport.rmse_rel:.2f}%)"
            )

        lgrid = sample_lmtd(tag.dt_domain, n_points=opts.n_balance_samples)
        lmodel, lreport = fit_simplices_j1(
            lgrid, w=opts.simplex_w, free_breakpoints=True, weighting="relative",
        )
        lib.entries[f"lmtd:{tag.hot_id}:{tag.cold_id}"] = lmodel
        note(f"lmtd {tag.hot_id}/{tag.cold_id}: rmse {lreport.rmse_rel:.2f}%")

    for tag in symbolic.utility_area_tags:
        stream, utility = case.stream(tag.stream_id), case.utility(tag.utility_id)
        grid = sample_utility_area(stream, utility, case.costs, n_points=opts.n_utility_samples, dt_min=case.dt_min)
        model, report = fit_segments_1d(
            grid, target_rmse_rel=opts.utility_rmse_target, max_segments=opts.simplex_w,
        )
        lib.entries[f"uarea:{tag.stream_id}:{tag.utility_id}"] = model
        note(f"uarea {tag.stream_id}/{tag.utility_id}: rmse {report.rmse_rel:.2f}%")

    done_bal = set()
    for tag in symbolic.bilinear_tags:
        key = f"eb{tag.kind}:{tag.stream_id}"
        if key in done_bal:
            continue
        done_bal.add(key)
        stream = case.stream(tag.stream_id)
        grid = sample_balance(
            (stream.flow_capacity.lo, stream.flow_capacity.hi),
            tag.dt_domain,
            n_points=opts.n_balance_samples,
        )
        pin = 1 if tag.dt_domain[0] == 0.0 else None
        model, report = fit_simplices_j1(grid, w=opts.simplex_w, free_breakpoints=False, pin_zero_axis=pin)
        lib.entries[key] = model
        note(f"{key}: rmse {report.rmse_rel:.2f}%")

    return lib
