"""Heat exchanger network synthesis by piecewise-linear MILP optimization."""

__version__ = "0.1.0"

from .case import (
    Bounded,
    CaseStudy,
    ConventionalUtility,
    CostParams,
    HensError,
    InfeasibleCaseError,
    SchemaError,
    Side,
    StreamSpec,
    UnitError,
    fixture_path,
    load_case,
)

__all__ = [
    "Bounded",
    "CaseStudy",
    "ConventionalUtility",
    "CostParams",
    "HensError",
    "InfeasibleCaseError",
    "SchemaError",
    "Side",
    "StreamSpec",
    "UnitError",
    "fixture_path",
    "load_case",
    "__version__",
]
