"""FastAPI service exposing the synthesis pipeline.

Fast operations (validate, fit, build) answer synchronously; solves and
full runs are jobs polled via /jobs/{id} since they can run for hours.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..case import HensError, InfeasibleCaseError, SchemaError, load_case, with_solver_overrides
from ..milp.encode import lower_case_to_milp
from ..network import HenDesign, validate
from ..pipeline import design_plots, model_text, run_case, tac_table
from ..pwl.library import FitLibrary, fit_case
from ..solve.adapter import ConvergenceTrace
from ..superstructure import build_symbolic_model
from .jobs import JobRegistry
from .schemas import (
    BuildRequest,
    BuildResponse,
    CaseRequest,
    CaseSummary,
    FitRequest,
    FitResponse,
    JobInfo,
    ReportRequest,
    ReportResponse,
    RunRequest,
    RunResultResponse,
    SolutionInfo,
)


def _load_or_422(case_text: str):
    try:
        return load_case(case_text)
    except (SchemaError, InfeasibleCaseError, HensError) as exc:
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}") from exc


def _clean(x: float | None):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def create_app() -> FastAPI:
    app = FastAPI(title="hens", version=__version__,
                  description="Heat exchanger network synthesis as a service")
    jobs = JobRegistry()
    app.state.jobs = jobs

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/case/validate", response_model=CaseSummary)
    def validate_case(req: CaseRequest) -> CaseSummary:
        case = _load_or_422(req.case_text)
        return CaseSummary(
            name=case.name,
            n_hot_streams=len(case.hot_streams),
            n_cold_streams=len(case.cold_streams),
            n_utilities=len(case.utilities),
            n_stages=case.n_stages,
            dt_min=case.dt_min,
            gamma=case.gamma,
            utility_streams=[s.id for s in case.streams if s.is_utility_stream],
        )

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest) -> FitResponse:
        case = _load_or_422(req.case_text)
        lib = fit_case(case, seed=req.seed)
        return FitResponse(
            case=case.name,
            artifact=lib.to_json(),
            reports=lib.reports(),
            worst_rmse_rel=lib.worst_rmse_rel(),
        )

    @app.post("/build", response_model=BuildResponse)
    def build(req: BuildRequest) -> BuildResponse:
        case = _load_or_422(req.case_text)
        symbolic = build_symbolic_model(case)
        lib = FitLibrary.from_json(req.fit_artifact) if req.fit_artifact else fit_case(case, symbolic)
        model = lower_case_to_milp(case, symbolic, lib)
        return BuildResponse(
            case=case.name,
            format=req.format,
            model_text=model_text(model, req.format),
            variables=model.n_variables,
            binaries=model.n_binaries,
            rows=len(model.rows),
            binary_ledger=model.metadata.get("binary_ledger", {}),
            fingerprint=model.fingerprint(),
        )

    def _submit_run(req: RunRequest, kind: str) -> JobInfo:
        case = _load_or_422(req.case_text)
        case = with_solver_overrides(case, **req.overrides.as_kwargs())
        fits = FitLibrary.from_json(req.fit_artifact) if req.fit_artifact else None

        def work():
            return run_case(case, fits=fits)

        job = jobs.submit(kind, work)
        return JobInfo(job_id=job.job_id, kind=job.kind, state=job.state)

    @app.post("/report", response_model=ReportResponse)
    def report(req: ReportRequest) -> ReportResponse:
        case = _load_or_422(req.case_text)
        design = HenDesign.from_dict(req.design)
        trace = ConvergenceTrace.from_csv(req.trace_csv) if req.trace_csv else ConvergenceTrace()
        plots = design_plots(case, design, trace)
        return ReportResponse(
            case=case.name,
            result_document=design.to_dict(),
            tac_table=tac_table(case, design),
            validation=validate(case, design).to_dict(),
            stream_plot_svg=plots["stream_plot.svg"],
            convergence_svg=plots.get("convergence.svg"),
        )

    @app.post("/solve", response_model=JobInfo, status_code=202)
    def solve_endpoint(req: RunRequest) -> JobInfo:
        return _submit_run(req, "solve")

    @app.post("/run", response_model=JobInfo, status_code=202)
    def run_endpoint(req: RunRequest) -> JobInfo:
        return _submit_run(req, "run")

    @app.get("/jobs/{job_id}", response_model=JobInfo)
    def job_status(job_id: str) -> JobInfo:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return JobInfo(job_id=job.job_id, kind=job.kind, state=job.state, detail=job.detail)

    @app.get("/jobs/{job_id}/result", response_model=RunResultResponse)
    def job_result(job_id: str) -> RunResultResponse:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        if job.state == "error":
            raise HTTPException(status_code=500, detail=job.detail)
        if job.state != "done":
            raise HTTPException(status_code=409, detail=f"job is {job.state}")
        res = job.result
        sol = res.solution
        plots = {}
        if res.design is not None:
            plots = design_plots(res.case, res.design, res.trace)
        return RunResultResponse(
            job_id=job.job_id,
            case=res.case.name,
            solution=SolutionInfo(
                status=sol.status.value,
                objective=_clean(sol.objective),
                best_bound=_clean(sol.best_bound),
                rel_gap=_clean(sol.rel_gap),
                wall_time_s=sol.wall_time,
            ),
            summary=_jsonsafe(res.summary()),
            design=res.design.to_dict() if res.design else None,
            validation=res.validation.to_dict() if res.validation else None,
            trace_csv=res.trace.to_csv(),
            stream_plot_svg=plots.get("stream_plot.svg"),
            convergence_svg=plots.get("convergence.svg"),
            fit_reports=res.fit_reports,
        )

    @app.delete("/jobs/{job_id}", response_model=JobInfo)
    def cancel_job(job_id: str) -> JobInfo:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        jobs.cancel(job_id)
        return JobInfo(job_id=job.job_id, kind=job.kind, state=job.state, detail=job.detail)

    return app


def _jsonsafe(obj):
    if isinstance(obj, dict):
        return {k: _jsonsafe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


app = create_app()
