"""Pydantic request/response models for the optimization service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class CaseRequest(BaseModel):
    case_text: str = Field(..., description="case document (TOML)")


class SolverOverrides(BaseModel):
    adapter: Optional[str] = None
    executable: Optional[str] = None
    rel_gap: Optional[float] = None
    time_limit: Optional[float] = None
    threads: Optional[int] = None
    seed: Optional[int] = None
    repeats: Optional[int] = None
    simplex_w: Optional[int] = None

    def as_kwargs(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class CaseSummary(BaseModel):
    name: str
    n_hot_streams: int
    n_cold_streams: int
    n_utilities: int
    n_stages: int
    dt_min: float
    gamma: float
    utility_streams: list[str]


class FitRequest(CaseRequest):
    seed: Optional[int] = None


class FitResponse(BaseModel):
    case: str
    artifact: str = Field(..., description="fit library JSON artifact")
    reports: dict[str, Any]
    worst_rmse_rel: float


class BuildRequest(CaseRequest):
    format: str = Field("lp", pattern="^(lp|mps)$")
    fit_artifact: Optional[str] = None


class BuildResponse(BaseModel):
    case: str
    format: str
    model_text: str
    variables: int
    binaries: int
    rows: int
    binary_ledger: dict[str, int]
    fingerprint: str


class RunRequest(CaseRequest):
    overrides: SolverOverrides = Field(default_factory=SolverOverrides)
    fit_artifact: Optional[str] = None


class ReportRequest(CaseRequest):
    design: dict[str, Any]
    trace_csv: Optional[str] = None


class ReportResponse(BaseModel):
    case: str
    result_document: dict[str, Any]
    tac_table: str
    validation: dict[str, Any]
    stream_plot_svg: str
    convergence_svg: Optional[str] = None


class JobInfo(BaseModel):
    job_id: str
    kind: str
    state: str
    detail: str = ""


class SolutionInfo(BaseModel):
    status: str
    objective: Optional[float] = None
    best_bound: Optional[float] = None
    rel_gap: Optional[float] = None
    wall_time_s: float


class RunResultResponse(BaseModel):
    job_id: str
    case: str
    solution: SolutionInfo
    summary: dict[str, Any]
    design: Optional[dict[str, Any]] = None
    validation: Optional[dict[str, Any]] = None
    trace_csv: str = ""
    stream_plot_svg: Optional[str] = None
    convergence_svg: Optional[str] = None
    fit_reports: dict[str, Any] = Field(default_factory=dict)
