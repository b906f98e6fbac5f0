"""manifit: fit smooth low-dimensional manifolds to noisy point clouds.

The library estimates local normal-space projectors by weighted local PCA,
defines a bias field whose zero set is the fitted manifold, and projects
query points onto that zero set by backtracking descent. Two published
baseline constructions (a net-based successive-projection field and a
tangent-plane square-distance ridge) share the same machinery, and a
reproducible synthetic benchmark harness compares all three.
"""
from ._version import __version__
from .errors import (
    AllWeightsZero,
    ConfigError,
    DataError,
    DegenerateSpectrum,
    DimensionError,
    EmptyNeighborhood,
    EmptySetError,
    InvalidInput,
    ManifoldFitError,
    NumericalError,
    RankDeficientNeighborhood,
    StencilEscape,
    TubeExceedsReach,
)
from .fields import (
    FieldKind,
    FittedField,
    asdf_km17,
    bump,
    epsilon_net,
    field_cf18,
    field_ours,
    km17_ridge_direction,
    ridge_direction,
)
from .geometry import (
    NeighborIndex,
    NeighborSet,
    PointCloud,
    WeightProfile,
    compute_weights,
    radius_neighbors,
)
from .manifolds import (
    ManifoldKind,
    ManifoldSpec,
    NoiseSpec,
    add_gaussian_noise,
    analytic_distance,
    analytic_distances,
    sample_manifold,
    sample_tube,
)
from .metrics import (
    DirectedResult,
    HausdorffReport,
    directed_hausdorff,
    hausdorff,
    hausdorff_to_manifold,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    load_config,
    run_experiment,
    trial_seeds,
)
from .rng import derive_seed, make_rng
from .solver import (
    GradientMode,
    ProjectionTrace,
    SolverOptions,
    Status,
    StepRecord,
    project_batch,
    project_point,
    scgd_minimize,
    scgd_project,
)
from .tangent import (
    NormalProjector,
    averaged_normal_projector,
    local_normal_projector,
)

__all__ = [
    "__version__",
    # errors
    "AllWeightsZero", "ConfigError", "DataError", "DegenerateSpectrum",
    "DimensionError", "EmptyNeighborhood", "EmptySetError", "InvalidInput",
    "ManifoldFitError", "NumericalError", "RankDeficientNeighborhood",
    "StencilEscape", "TubeExceedsReach",
    # geometry
    "PointCloud", "NeighborSet", "NeighborIndex", "WeightProfile",
    "radius_neighbors", "compute_weights",
    # tangent estimation
    "NormalProjector", "local_normal_projector", "averaged_normal_projector",
    # fields
    "FieldKind", "FittedField", "bump", "epsilon_net",
    "field_ours", "field_cf18", "asdf_km17", "km17_ridge_direction",
    "ridge_direction",
    # solver
    "Status", "GradientMode", "SolverOptions", "StepRecord", "ProjectionTrace",
    "project_point", "scgd_project", "scgd_minimize", "project_batch",
    # synthetic manifolds
    "ManifoldKind", "ManifoldSpec", "NoiseSpec", "sample_manifold",
    "add_gaussian_noise", "sample_tube", "analytic_distance",
    "analytic_distances",
    # metrics
    "DirectedResult", "HausdorffReport", "directed_hausdorff", "hausdorff",
    "hausdorff_to_manifold",
    # experiments
    "ExperimentConfig", "ExperimentReport", "load_config", "run_experiment",
    "trial_seeds",
    # rng
    "derive_seed", "make_rng",
]
