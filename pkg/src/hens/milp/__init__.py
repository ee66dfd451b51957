from .encode import encode_hyperplane_area, encode_log_simplices, lower_case_to_milp
from .logenc import LogSimplexEncoding, branching_node_sets, expected_binary_count, gray_code, sos2_branching_sets
from .model import MilpModel, MilpRow, MilpVar

__all__ = [
    "LogSimplexEncoding",
    "MilpModel",
    "MilpRow",
    "MilpVar",
    "branching_node_sets",
    "encode_hyperplane_area",
    "encode_log_simplices",
    "expected_binary_count",
    "gray_code",
    "lower_case_to_milp",
    "sos2_branching_sets",
]
