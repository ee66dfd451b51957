from .adapter import (
    Adapter,
    BundledAdapter,
    CbcAdapter,
    ConvergenceTrace,
    HighsAdapter,
    Solution,
    SolveStatus,
    SolverError,
    TracePoint,
    compute_rel_gap,
    pick_adapter,
    solve,
    solve_once,
)
from .lpread import parse_lp, parse_lp_file
from .lpwrite import NameCollisionError, lp_text, parse_names, sanitize_names, write_lp
from .mpswrite import mps_text, parse_mps_names, write_mps

__all__ = [
    "Adapter",
    "BundledAdapter",
    "CbcAdapter",
    "ConvergenceTrace",
    "HighsAdapter",
    "NameCollisionError",
    "Solution",
    "SolveStatus",
    "SolverError",
    "TracePoint",
    "compute_rel_gap",
    "lp_text",
    "mps_text",
    "parse_lp",
    "parse_lp_file",
    "parse_mps_names",
    "parse_names",
    "pick_adapter",
    "sanitize_names",
    "solve",
    "solve_once",
    "write_lp",
    "write_mps",
]
