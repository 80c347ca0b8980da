"""Bayesian dynamic fields: continuous 3D velocity maps with uncertainty.

Positions are featurized against a lattice of fixed points through a
squared-exponential kernel with per-axis bandwidths; three conjugate
Bayesian linear models (one per velocity axis) over those features give
closed-form training, constant-memory online updates, and calibrated
predictive variance that separates measurement noise from missing data.
"""

from .datasets import (
    Dataset,
    NormalizerTransform,
    concatenate,
    denormalize,
    derive_velocities,
    generate_blobs,
    generate_chunks,
    load_trajectories,
    normalize,
    save_trajectories,
    split,
)
from .evaluation import (
    BenchRow,
    EvalReport,
    compare_with_full_gp,
    evaluate_field,
    full_gp_fit_predict,
    msll,
    rmse,
    scaling_benchmark,
)
from .exceptions import (
    BdfError,
    CapacityError,
    DataError,
    FieldIOError,
    InvalidArgumentError,
    NumericalError,
)
from .field import (
    FieldConfig,
    VelocityEstimate,
    VelocityField,
    axis_gap_statistic,
    filter_by_confidence,
    load_field,
    qmc_augment,
    query_field,
    query_field_arrays,
    save_field,
    train_field,
    update_field,
)
from .inference import (
    GaussianState,
    NoiseModel,
    batch_statistics,
    brute_force_posterior,
    make_prior,
    posterior_covariance,
    posterior_mean,
    posterior_update,
    predict,
    rescale_check,
)
from .kernels import (
    FeatureBasis,
    GridMeta,
    KernelSpec,
    build_grid,
    featurize,
    featurize_sparse,
    kernel_matrix,
    lattice_axis,
    se_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "BdfError",
    "BenchRow",
    "CapacityError",
    "DataError",
    "Dataset",
    "EvalReport",
    "FeatureBasis",
    "FieldConfig",
    "FieldIOError",
    "GaussianState",
    "GridMeta",
    "InvalidArgumentError",
    "KernelSpec",
    "NoiseModel",
    "NormalizerTransform",
    "NumericalError",
    "VelocityEstimate",
    "VelocityField",
    "axis_gap_statistic",
    "batch_statistics",
    "brute_force_posterior",
    "build_grid",
    "compare_with_full_gp",
    "concatenate",
    "denormalize",
    "derive_velocities",
    "evaluate_field",
    "featurize",
    "featurize_sparse",
    "filter_by_confidence",
    "full_gp_fit_predict",
    "generate_blobs",
    "generate_chunks",
    "kernel_matrix",
    "lattice_axis",
    "load_field",
    "load_trajectories",
    "make_prior",
    "msll",
    "normalize",
    "posterior_covariance",
    "posterior_mean",
    "posterior_update",
    "predict",
    "qmc_augment",
    "query_field",
    "query_field_arrays",
    "rescale_check",
    "rmse",
    "save_field",
    "save_trajectories",
    "scaling_benchmark",
    "se_kernel",
    "split",
    "train_field",
    "update_field",
]
