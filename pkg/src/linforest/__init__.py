"""Decompose graphs into linear forests (forests whose components are paths)."""
from .errors import (
    ContractError,
    InfeasibleError,
    LinforestError,
    NibbleFailure,
    ParameterError,
    ResampleBudgetExceeded,
    RetryableError,
)
from .graph import (
    ForestDecomposition,
    Graph,
    VerificationReport,
    is_linear_forest,
    la_lower_bound,
    read_edge_list,
    regularize,
    verify_decomposition,
    write_edge_list,
)
from .oracle import exact_la
from .pipeline import PipelineConfig, choose_t, decompose

__all__ = [
    "ContractError",
    "ForestDecomposition",
    "Graph",
    "InfeasibleError",
    "LinforestError",
    "NibbleFailure",
    "ParameterError",
    "PipelineConfig",
    "ResampleBudgetExceeded",
    "RetryableError",
    "VerificationReport",
    "choose_t",
    "decompose",
    "exact_la",
    "is_linear_forest",
    "la_lower_bound",
    "read_edge_list",
    "regularize",
    "verify_decomposition",
    "write_edge_list",
]
__version__ = "0.1.0"
