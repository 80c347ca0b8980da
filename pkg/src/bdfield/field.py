"""The queryable 3D velocity map.

A VelocityField bundles one shared kernel feature basis with three
independent weight posteriors, one per velocity axis.  All three models
see the same feature matrix, so training featurizes once and reuses the
Gram product; only the per-axis info vectors differ.  Because the three
precision matrices then stay numerically identical, the field shares a
single Cholesky factorization across axes when predicting.

Queries run row by row (one dot product and one triangular solve per
query point), which makes a point's estimate independent of how it was
batched: querying one position alone gives bitwise the same numbers as
querying it inside a larger batch.

Free-space augmentation seeds empty regions with low-discrepancy
zero-velocity samples (Sobol by default, generalized Halton with bases
2, 3, 5 as the alternative) and discards any synthetic sample closer
than ``removal_radius`` to a real measurement, so real data always wins
near observed space.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
import zipfile
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.sparse
from scipy.linalg import solve_triangular
from scipy.spatial import cKDTree
from scipy.stats import qmc

from . import inference
from .datasets import TAG_SYNTHETIC, Dataset, NormalizerTransform, concatenate
from .exceptions import DataError, FieldIOError, InvalidArgumentError
from .inference import GaussianState, NoiseModel, cholesky_factor
from .kernels import FeatureBasis, KernelSpec, build_grid, featurize, featurize_sparse

logger = logging.getLogger(__name__)

FIELD_FORMAT_VERSION = 1

DEFAULT_BOUNDS = ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))
DEFAULT_SPACING = 0.2
_AUTO_CUBE_LIMIT = 1.5

NORMALIZE_MODES = ("none", "fit", "auto")


@dataclass(frozen=True)
class FieldConfig:
    """Everything needed to train a field from a raw dataset.

    ``bounds``/``spacing`` place the fixed-point lattice in model
    coordinates.  ``normalize`` controls the world-to-model map: "none"
    is the identity, "fit" rescales the training bounding box to
    [-1,1]^3, and "auto" (default) fits only when the data strays
    outside 1.5x the unit cube, so data generated in model units is
    left untouched.  ``feature_threshold`` switches featurization to the
    windowed sparse path with that truncation threshold; None keeps
    dense features.
    """

    bounds: tuple = DEFAULT_BOUNDS
    spacing: float = DEFAULT_SPACING
    kernel: KernelSpec = dataclass_field(default_factory=lambda: KernelSpec.isotropic(10.0))
    noise: NoiseModel = dataclass_field(default_factory=NoiseModel)
    normalize: str = "auto"
    feature_threshold: float | None = None
    scale_velocities: bool = False

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != 3:
            raise InvalidArgumentError(f"bounds must have 3 (lo, hi) pairs, got {len(bounds)}")
        object.__setattr__(self, "bounds", bounds)
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise InvalidArgumentError(f"spacing must be finite and > 0, got {self.spacing}")
        if self.normalize not in NORMALIZE_MODES:
            raise InvalidArgumentError(
                f"normalize must be one of {NORMALIZE_MODES}, got {self.normalize!r}"
            )
        if self.feature_threshold is not None:
            t = float(self.feature_threshold)
            if not (0.0 < t < 1.0):
                raise InvalidArgumentError(
                    f"feature_threshold must be in (0, 1), got {self.feature_threshold}"
                )
            object.__setattr__(self, "feature_threshold", t)


@dataclass(frozen=True)
class VelocityEstimate:
    """Predictive velocity distribution at one world position.

    ``mean`` and ``variance`` are per-axis in world velocity units;
    ``sigma_max`` is the largest of the three standard deviations, the
    scalar used for confidence filtering.
    """

    position: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    sigma_max: float


@dataclass(frozen=True)
class VelocityField:
    """Immutable snapshot: shared basis, three per-axis posteriors.

    Updates return new snapshots; queries never mutate, so concurrent
    readers of one snapshot are safe.
    """

    basis: FeatureBasis
    components: tuple
    noise: NoiseModel
    normalizer: NormalizerTransform
    feature_threshold: float | None = None

    def __post_init__(self):
        if len(self.components) != 3:
            raise InvalidArgumentError(f"need 3 components, got {len(self.components)}")
        m = self.basis.m_features
        for axis, state in enumerate(self.components):
            if state.dim != m:
                raise InvalidArgumentError(
                    f"component {axis} has dimension {state.dim}, basis has {m}"
                )
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def m_features(self) -> int:
        return self.basis.m_features


def _featurize(field_or_config, basis: FeatureBasis, positions: np.ndarray):
    threshold = field_or_config.feature_threshold
    if threshold is None:
        return featurize(positions, basis)
    return featurize_sparse(positions, basis, threshold)


def _resolve_normalizer(dataset: Dataset, config: FieldConfig) -> NormalizerTransform:
    if config.normalize == "none":
        return NormalizerTransform.identity()
    if config.normalize == "fit":
        return NormalizerTransform.fit(
            dataset.positions, dataset.velocities, scale_velocities=config.scale_velocities
        )
    if np.abs(dataset.positions).max(initial=0.0) <= _AUTO_CUBE_LIMIT:
        return NormalizerTransform.identity()
    return NormalizerTransform.fit(
        dataset.positions, dataset.velocities, scale_velocities=config.scale_velocities
    )


def train_field(dataset: Dataset, config: FieldConfig) -> VelocityField:
    """Train a velocity field from scratch on one dataset.

    Positions are featurized once; the three per-axis posteriors share
    the resulting Gram matrix, so the added cost of the second and third
    axis is one matrix-vector product each.
    """
    if dataset.n == 0:
        raise DataError("cannot train on an empty dataset")
    normalizer = _resolve_normalizer(dataset, config)
    basis = build_grid(config.bounds, config.spacing, config.kernel)
    model_positions = normalizer.apply_positions(dataset.positions)
    model_velocities = normalizer.apply_velocities(dataset.velocities)
    feats = _featurize(config, basis, model_positions)
    beta = config.noise.beta
    d_gram, d_moment = inference.batch_statistics(feats, model_velocities, beta)
    m = basis.m_features
    precision = d_gram
    precision[np.diag_indices(m)] += config.noise.alpha
    components = tuple(
        GaussianState(precision, np.ascontiguousarray(d_moment[:, axis]))
        for axis in range(3)
    )
    field = VelocityField(
        basis=basis,
        components=components,
        noise=config.noise,
        normalizer=normalizer,
        feature_threshold=config.feature_threshold,
    )
    _materialize(field)
    return field


def update_field(field: VelocityField, batch: Dataset) -> VelocityField:
    """Absorb a new batch of measurements; returns a new field snapshot.

    Chaining updates over batches matches a single training run on the
    concatenated data.  The stored normalizer is reused, never refit, so
    the equivalence holds across any batch order.  An empty batch
    returns the field unchanged.
    """
    if batch.n == 0:
        return field
    model_positions = field.normalizer.apply_positions(batch.positions)
    model_velocities = field.normalizer.apply_velocities(batch.velocities)
    feats = _featurize(field, field.basis, model_positions)
    beta = field.noise.beta
    d_gram, d_moment = inference.batch_statistics(feats, model_velocities, beta)
    # The three axes share one precision whenever they did before; keep
    # that sharing so prediction still needs a single factorization.
    new_precision_by_id = {}
    components = []
    for axis, state in enumerate(field.components):
        key = id(state.precision)
        if key not in new_precision_by_id:
            new_precision_by_id[key] = state.precision + d_gram
        components.append(
            GaussianState(
                new_precision_by_id[key],
                state.info + np.ascontiguousarray(d_moment[:, axis]),
            )
        )
    updated = VelocityField(
        basis=field.basis,
        components=tuple(components),
        noise=field.noise,
        normalizer=field.normalizer,
        feature_threshold=field.feature_threshold,
    )
    _materialize(updated)
    return updated


def _materialize(field: VelocityField) -> None:
    """Factorize and solve for the per-axis means, making the field
    query-ready.

    Training is "compute the posterior", so the O(M^3) factorization is
    deliberately part of train/update rather than deferred to the first
    query; an indefinite precision matrix therefore fails loudly here.
    """
    _component_factors(field)
    for state in field.components:
        inference.posterior_mean(state)


def _component_factors(field: VelocityField):
    """Cholesky factor per component, computed once per distinct precision."""
    factors = {}
    out = []
    for state in field.components:
        key = id(state.precision)
        if key not in factors:
            factors[key] = cholesky_factor(state)
        elif state._chol is None:
            state._chol = factors[key]  # share the cache across axes
        out.append(factors[key])
    return out


def _count_outside(meta, model_positions: np.ndarray) -> int:
    lows = np.asarray(meta.lows)
    highs = np.asarray(meta.highs)
    outside = (model_positions < lows) | (model_positions > highs)
    return int(outside.any(axis=1).sum())


def query_field(field: VelocityField, positions) -> list:
    """Predict velocity mean/variance at world positions.

    Returns one VelocityEstimate per row.  Estimates are computed row by
    row, so each is bitwise independent of the batch it arrived in.
    Positions outside the trained cube are allowed (the kernel decays
    toward the prior); their count is reported through the module
    logger.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim == 1:
        positions = positions[None, :]
    if positions.ndim != 2 or positions.shape[1] != 3 or positions.shape[0] < 1:
        raise InvalidArgumentError(f"positions must have shape (Q, 3), got {positions.shape}")
    if not np.isfinite(positions).all():
        raise InvalidArgumentError("non-finite query positions")

    model_positions = field.normalizer.apply_positions(positions)
    n_outside = _count_outside(field.basis.grid_meta, model_positions)
    if n_outside:
        logger.warning(
            "%d of %d query points fall outside the trained cube; "
            "estimates there revert toward the prior",
            n_outside,
            model_positions.shape[0],
        )

    feats = _featurize(field, field.basis, model_positions)
    factors = _component_factors(field)
    means = [inference.posterior_mean(state) for state in field.components]
    floor = 1.0 / field.noise.beta
    vscale = field.normalizer.velocity_scale

    estimates = []
    sparse_feats = scipy.sparse.issparse(feats)
    for q in range(model_positions.shape[0]):
        phi = feats[q].toarray().ravel() if sparse_feats else feats[q]
        mean_model = np.array([float(phi @ mu) for mu in means])
        variance_model = np.empty(3)
        epistemic_by_id = {}
        for axis in range(3):
            key = id(factors[axis])
            if key not in epistemic_by_id:
                z = solve_triangular(factors[axis], phi, lower=True, check_finite=False)
                epistemic_by_id[key] = float(z @ z)
            variance_model[axis] = floor + epistemic_by_id[key]
        mean_world = mean_model / vscale
        variance_world = variance_model / (vscale * vscale)
        estimates.append(
            VelocityEstimate(
                position=positions[q].copy(),
                mean=mean_world,
                variance=variance_world,
                sigma_max=float(np.sqrt(variance_world).max()),
            )
        )
    return estimates


def query_field_arrays(field: VelocityField, positions):
    """query_field, returning (means, variances) as (Q, 3) arrays."""
    estimates = query_field(field, positions)
    means = np.stack([e.mean for e in estimates])
    variances = np.stack([e.variance for e in estimates])
    return means, variances


def filter_by_confidence(estimates, sigma_threshold: float) -> list:
    """Keep estimates with sigma_max <= threshold, preserving order."""
    if not (sigma_threshold > 0):
        raise InvalidArgumentError(
            f"sigma_threshold must be > 0, got {sigma_threshold}"
        )
    return [e for e in estimates if e.sigma_max <= sigma_threshold]


def _qmc_sampler(sequence: str, seed):
    if sequence == "sobol":
        return qmc.Sobol(d=3, scramble=False, seed=seed)
    if sequence == "halton":
        return qmc.Halton(d=3, scramble=False, seed=seed)
    raise InvalidArgumentError(f"sequence must be 'sobol' or 'halton', got {sequence!r}")


def qmc_augment(
    dataset: Dataset,
    bounds=DEFAULT_BOUNDS,
    count: int = 0,
    removal_radius: float = DEFAULT_SPACING / 2,
    sequence: str = "sobol",
    seed: int = 0,
) -> Dataset:
    """Seed free space with low-discrepancy zero-velocity samples.

    Generates ``count`` points of the chosen sequence inside ``bounds``,
    drops every generated point whose Euclidean distance to a real data
    point is below ``removal_radius``, and returns the real data with
    the survivors appended and tagged "qmc-synthetic".  The default
    radius is half the default grid spacing.
    """
    if count < 0:
        raise InvalidArgumentError(f"count must be >= 0, got {count}")
    if not (removal_radius > 0):
        raise InvalidArgumentError(f"removal_radius must be > 0, got {removal_radius}")
    if count == 0:
        return dataset
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    if len(bounds) != 3 or any(hi <= lo for lo, hi in bounds):
        raise InvalidArgumentError(f"bounds must be 3 pairs with hi > lo, got {bounds}")
    sampler = _qmc_sampler(sequence, seed)
    with warnings.catch_warnings():
        # Sobol emits a balance warning for counts that are not powers
        # of two; arbitrary counts are a supported use here.
        warnings.simplefilter("ignore", UserWarning)
        unit = sampler.random(count)
    lows = [lo for lo, _ in bounds]
    highs = [hi for _, hi in bounds]
    candidates = qmc.scale(unit, lows, highs)
    if dataset.n > 0:
        distances, _ = cKDTree(dataset.positions).query(candidates)
        candidates = candidates[distances >= removal_radius]
    synthetic = Dataset(
        candidates,
        np.zeros_like(candidates),
        source_tags=np.full(candidates.shape[0], TAG_SYNTHETIC, dtype=object),
    )
    if dataset.n == 0:
        return synthetic
    return concatenate([dataset, synthetic])


def axis_gap_statistic(points) -> float:
    """Largest gap between consecutive sorted coordinates, over all axes.

    A cheap star-discrepancy proxy: low-discrepancy sets leave smaller
    maximal per-axis gaps than uniform random sets of the same size.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 points with shape (N, D)")
    worst = 0.0
    for axis in range(points.shape[1]):
        gaps = np.diff(np.sort(points[:, axis]))
        worst = max(worst, float(gaps.max()))
    return worst


def save_field(field: VelocityField, path, config_echo: dict | None = None) -> None:
    """Write a field snapshot as a versioned npz container.

    Layout (version 1): grid lows/highs/spacing/counts, kernel gammas,
    alpha, beta, per-axis info vectors, the precision matrix (stored
    once when all axes share it, else per axis), the normalizer, the
    feature threshold (NaN when dense), and an optional JSON config echo
    for provenance.
    """
    shared = all(state.precision is field.components[0].precision for state in field.components)
    payload = {
        "format_version": np.array(FIELD_FORMAT_VERSION, dtype=np.int64),
        "grid_lows": np.asarray(field.basis.grid_meta.lows),
        "grid_highs": np.asarray(field.basis.grid_meta.highs),
        "grid_spacing": np.array(field.basis.grid_meta.spacing),
        "grid_counts": np.asarray(field.basis.grid_meta.counts, dtype=np.int64),
        "gammas": np.asarray(field.basis.kernel.gammas),
        "alpha": np.array(field.noise.alpha),
        "beta": np.array(field.noise.beta),
        "shared_precision": np.array(shared),
        "normalizer_offsets": np.asarray(field.normalizer.offsets),
        "normalizer_scales": np.asarray(field.normalizer.scales),
        "velocity_scale": np.array(field.normalizer.velocity_scale),
        "feature_threshold": np.array(
            np.nan if field.feature_threshold is None else field.feature_threshold
        ),
        "config_echo": np.array(json.dumps(config_echo or {}, sort_keys=True)),
    }
    if shared:
        payload["precision"] = field.components[0].precision
    else:
        for axis, state in enumerate(field.components):
            payload[f"precision_{axis}"] = state.precision
    for axis, state in enumerate(field.components):
        payload[f"info_{axis}"] = state.info
    with open(path, "wb") as handle:
        np.savez(handle, **payload)


def load_field(path) -> VelocityField:
    """Load a field written by save_field; validates version and layout."""
    try:
        with np.load(path, allow_pickle=False) as archive:
            data = {key: archive[key] for key in archive.files}
    except FileNotFoundError as exc:
        raise FieldIOError(f"cannot read field file {path}: {exc}") from exc
    except (OSError, ValueError, EOFError, zipfile.BadZipFile) as exc:
        raise FieldIOError(f"corrupt field file {path}: {exc}") from exc

    if "format_version" not in data:
        raise FieldIOError(f"{path}: missing format_version, not a field file")
    version = int(data["format_version"])
    if version > FIELD_FORMAT_VERSION:
        raise FieldIOError(
            f"{path}: file has format version {version}, this build reads "
            f"up to version {FIELD_FORMAT_VERSION}"
        )
    try:
        bounds = tuple(
            (float(lo), float(hi))
            for lo, hi in zip(data["grid_lows"], data["grid_highs"])
        )
        spec = KernelSpec(tuple(float(g) for g in data["gammas"]))
        spacing = tuple(float(s) for s in np.atleast_1d(data["grid_spacing"]))
        if len(spacing) == 1:
            spacing = spacing * 3
        basis = build_grid(bounds, spacing, spec)
        if tuple(int(c) for c in data["grid_counts"]) != basis.grid_meta.counts:
            raise FieldIOError(f"{path}: stored grid counts do not match rebuilt lattice")
        noise = NoiseModel(beta=float(data["beta"]), alpha=float(data["alpha"]))
        normalizer = NormalizerTransform(
            tuple(float(v) for v in data["normalizer_offsets"]),
            tuple(float(v) for v in data["normalizer_scales"]),
            float(data["velocity_scale"]),
        )
        threshold_raw = float(data["feature_threshold"])
        threshold = None if math.isnan(threshold_raw) else threshold_raw
        if bool(data["shared_precision"]):
            precision = np.ascontiguousarray(data["precision"])
            precisions = [precision, precision, precision]
        else:
            precisions = [np.ascontiguousarray(data[f"precision_{a}"]) for a in range(3)]
        components = tuple(
            GaussianState(precisions[axis], np.ascontiguousarray(data[f"info_{axis}"]))
            for axis in range(3)
        )
    except KeyError as exc:
        raise FieldIOError(f"{path}: missing field {exc} in container") from exc
    return VelocityField(
        basis=basis,
        components=components,
        noise=noise,
        normalizer=normalizer,
        feature_threshold=threshold,
    )
