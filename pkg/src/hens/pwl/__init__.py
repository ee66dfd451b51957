from .grids import EmptyDomainError, FitReport, SampleGrid, SimplexModel, UnderdeterminedFitError
from .hyperplane import HyperplaneModel, PlaneSense, fit_hyperplanes
from .sampling import (
    cold_utility_area,
    hot_utility_area,
    lmtd,
    reduced_area,
    sample_balance,
    sample_lmtd,
    sample_stream_area,
    sample_utility_area,
    u_coefficient,
    utility_duty_range,
)
from .simplexfit import eval_pwl, fit_segments_1d, fit_simplices_j1

__all__ = [
    "EmptyDomainError",
    "FitReport",
    "HyperplaneModel",
    "PlaneSense",
    "SampleGrid",
    "SimplexModel",
    "UnderdeterminedFitError",
    "cold_utility_area",
    "eval_pwl",
    "fit_hyperplanes",
    "fit_segments_1d",
    "fit_simplices_j1",
    "hot_utility_area",
    "lmtd",
    "reduced_area",
    "sample_balance",
    "sample_lmtd",
    "sample_stream_area",
    "sample_utility_area",
    "u_coefficient",
    "utility_duty_range",
]
