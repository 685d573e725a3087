"""Coordinate-descent solvers for composite objectives with a concave part.

The library minimizes F(x) = f(x) + phi(x) - h(x) where f is a block-smooth
data-backed loss, phi a separable convex penalty with a cheap proximal map,
and h a convex continuous term entering with a minus sign.  It provides
randomized and permuted block descent, accelerated inner solvers, inexact
proximal-point outer loops, matching optimality measures, and a benchmark
harness with deterministic traces.
"""

from .blocks import (
    BlockPartition,
    dual_weighted_norm,
    t_s,
    uniform_partition,
    weighted_norm,
)
from .data import (
    SyntheticSpec,
    binarize_labels,
    gen_synthetic,
    normalize_binary_labels,
    read_sparse_dataset,
    rescale_targets,
    write_sparse_dataset,
)
from .errors import (
    BudgetExceededError,
    CacheInvalidError,
    ConfigError,
    DatasetFormatError,
    EmptyDatasetError,
    InvalidParameterError,
    InvalidStepError,
    LipschitzViolationError,
    NcdError,
    NumericOverflowError,
    PartitionError,
    ShapeError,
    TrackerDesyncError,
)
from .measures import (
    OptimalityReport,
    composite_subgradient,
    concave_norm_bound,
    criticality_gap,
    prox_point_measure,
    prox_residual_norm,
    subgradient_measure_sq,
)
from .oracles import (
    DataMatrix,
    SmoothOracle,
    huber,
    least_squares,
    logistic,
)
from .penalties import (
    ConcaveH,
    SeparablePhi,
    h_largest_k,
    h_quadratic,
    h_scad,
    h_subgrad,
    h_value,
    h_zero,
    phi_elastic_net,
    phi_l1,
    phi_zero,
    prox_block,
    soft_threshold,
)
from .problem import CompositeProblem
from .solvers import (
    ALGORITHMS,
    SolverConfig,
    StationarityReport,
    Trace,
    TraceRecord,
    acpdc,
    acpdc_default_t,
    acpp,
    acpp_default_t,
    acpp_smooth,
    acpp_smooth_default_t,
    apcg,
    apcg_certified,
    dca,
    pdca,
    pdca_e,
    rcsd,
    rpcd,
    solve,
)
from .topk import TopKTracker, topk_indices

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BlockPartition",
    "BudgetExceededError",
    "CacheInvalidError",
    "CompositeProblem",
    "ConcaveH",
    "ConfigError",
    "DataMatrix",
    "DatasetFormatError",
    "EmptyDatasetError",
    "InvalidParameterError",
    "InvalidStepError",
    "LipschitzViolationError",
    "NcdError",
    "NumericOverflowError",
    "OptimalityReport",
    "PartitionError",
    "SeparablePhi",
    "ShapeError",
    "SmoothOracle",
    "SolverConfig",
    "StationarityReport",
    "SyntheticSpec",
    "TopKTracker",
    "Trace",
    "TraceRecord",
    "TrackerDesyncError",
    "acpdc",
    "acpdc_default_t",
    "acpp",
    "acpp_default_t",
    "acpp_smooth",
    "acpp_smooth_default_t",
    "apcg",
    "apcg_certified",
    "binarize_labels",
    "composite_subgradient",
    "concave_norm_bound",
    "criticality_gap",
    "dca",
    "dual_weighted_norm",
    "gen_synthetic",
    "h_largest_k",
    "h_quadratic",
    "h_scad",
    "h_subgrad",
    "h_value",
    "h_zero",
    "huber",
    "least_squares",
    "logistic",
    "normalize_binary_labels",
    "pdca",
    "pdca_e",
    "phi_elastic_net",
    "phi_l1",
    "phi_zero",
    "prox_block",
    "prox_point_measure",
    "prox_residual_norm",
    "rcsd",
    "read_sparse_dataset",
    "rescale_targets",
    "rpcd",
    "soft_threshold",
    "solve",
    "subgradient_measure_sq",
    "t_s",
    "topk_indices",
    "uniform_partition",
    "weighted_norm",
    "write_sparse_dataset",
]
