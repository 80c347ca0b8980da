"""Datasets: containers, synthetic generators, CSV ingestion, normalization.

Two synthetic environments mirror the library's test geometry:

* Chunks: points uniform in the [-1,1]^3 cube, x-velocity piecewise
  constant over three slabs along x (boundaries at +-1/3).  Sharp
  variation along one axis only, which is what per-axis bandwidths
  are meant to exploit.
* Blobs: three separated Gaussian position clusters, each moving with
  its own constant velocity.  Smooth local structure with large empty
  regions in between, useful for inspecting epistemic variance.

The slab labels, cluster centers/velocities, and noise level are fixed
documented constants so generated data is reproducible; generators take
keyword overrides.  All randomness flows through ``numpy.random.default_rng``
seeded explicitly.

CSV schema (the single ingestion format): header ``x,y,z,vx,vy,vz`` with
an optional trailing ``t`` column, comma-separated, ``#`` lines are
comments.  Values are written with ``repr`` so a save/load round trip is
bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DataError, InvalidArgumentError

CHUNK_SLAB_EDGES = (-1.0 / 3.0, 1.0 / 3.0)
CHUNK_SLAB_LABELS = (-2.0, 0.0, 2.0)
BLOB_CENTERS = ((-0.6, -0.6, -0.6), (0.0, 0.0, 0.0), (0.6, 0.6, 0.6))
BLOB_VELOCITIES = ((2.0, 0.0, 0.0), (0.0, 2.0, 0.0), (0.0, 0.0, 2.0))
BLOB_POSITION_SIGMA = 0.15
LABEL_NOISE_SIGMA = 0.1

TAG_REAL = "real"
TAG_SYNTHETIC = "qmc-synthetic"

CSV_COLUMNS = ("x", "y", "z", "vx", "vy", "vz")
_MAX_REPORTED_BAD_ROWS = 10


def _as_points(arr, name: str) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise InvalidArgumentError(f"{name} must have shape (N, 3), got {out.shape}")
    if not np.isfinite(out).all():
        raise InvalidArgumentError(f"non-finite entries in {name}")
    return out


@dataclass(frozen=True)
class Dataset:
    """N records of 3D position and 3-vector velocity label.

    ``timestamps`` (seconds) and per-point ``source_tags`` ("real" or
    "qmc-synthetic") are optional; absent tags mean all-real.
    """

    positions: np.ndarray
    velocities: np.ndarray
    timestamps: np.ndarray | None = None
    source_tags: np.ndarray | None = None

    def __post_init__(self):
        positions = _as_points(self.positions, "positions")
        velocities = _as_points(self.velocities, "velocities")
        n = positions.shape[0]
        if velocities.shape[0] != n:
            raise InvalidArgumentError(
                f"{n} positions but {velocities.shape[0]} velocities"
            )
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "velocities", velocities)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.float64)
            if ts.shape != (n,):
                raise InvalidArgumentError(f"timestamps shape {ts.shape}, expected ({n},)")
            if not np.isfinite(ts).all():
                raise InvalidArgumentError("non-finite timestamps")
            object.__setattr__(self, "timestamps", ts)
        if self.source_tags is not None:
            tags = np.asarray(self.source_tags, dtype=object)
            if tags.shape != (n,):
                raise InvalidArgumentError(f"source_tags shape {tags.shape}, expected ({n},)")
            bad = set(tags) - {TAG_REAL, TAG_SYNTHETIC}
            if bad:
                raise InvalidArgumentError(f"unknown source tags: {sorted(map(str, bad))}")
            object.__setattr__(self, "source_tags", tags)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def tags(self) -> np.ndarray:
        """Per-point provenance, defaulting to all-real."""
        if self.source_tags is not None:
            return self.source_tags
        return np.full(self.n, TAG_REAL, dtype=object)

    def take(self, indices) -> "Dataset":
        """Subset by index array, preserving optional fields."""
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(
            self.positions[indices],
            self.velocities[indices],
            None if self.timestamps is None else self.timestamps[indices],
            None if self.source_tags is None else self.source_tags[indices],
        )


def concatenate(datasets) -> Dataset:
    """Stack datasets; timestamps survive only if every part carries them."""
    datasets = list(datasets)
    if not datasets:
        raise InvalidArgumentError("need at least one dataset to concatenate")
    positions = np.concatenate([d.positions for d in datasets])
    velocities = np.concatenate([d.velocities for d in datasets])
    timestamps = None
    if all(d.timestamps is not None for d in datasets):
        timestamps = np.concatenate([d.timestamps for d in datasets])
    tags = None
    if any(d.source_tags is not None for d in datasets):
        tags = np.concatenate([d.tags() for d in datasets])
    return Dataset(positions, velocities, timestamps, tags)


@dataclass(frozen=True)
class NormalizerTransform:
    """Per-axis affine map from world coordinates into the model cube.

    model = (world - offsets) * scales, chosen so the data bounding box
    fits [-1,1]^3.  Degenerate axes (zero extent) use offset at the data
    and unit scale.  ``velocity_scale`` optionally maps velocity labels
    to model units (1.0 leaves them in native units).
    """

    offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scales: tuple[float, float, float] = (1.0, 1.0, 1.0)
    velocity_scale: float = 1.0

    def __post_init__(self):
        offsets = tuple(float(v) for v in self.offsets)
        scales = tuple(float(v) for v in self.scales)
        if len(offsets) != 3 or len(scales) != 3:
            raise InvalidArgumentError("offsets and scales must each have 3 entries")
        if not all(np.isfinite(offsets)) or not all(np.isfinite(scales)):
            raise InvalidArgumentError("non-finite normalizer parameters")
        if any(s == 0.0 for s in scales):
            raise InvalidArgumentError("normalizer scales must be nonzero")
        if not (np.isfinite(self.velocity_scale) and self.velocity_scale > 0):
            raise InvalidArgumentError(
                f"velocity_scale must be finite and > 0, got {self.velocity_scale}"
            )
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "velocity_scale", float(self.velocity_scale))

    @classmethod
    def identity(cls) -> "NormalizerTransform":
        return cls()

    @property
    def is_identity(self) -> bool:
        return (
            self.offsets == (0.0, 0.0, 0.0)
            and self.scales == (1.0, 1.0, 1.0)
            and self.velocity_scale == 1.0
        )

    @classmethod
    def fit(cls, positions, velocities=None, scale_velocities: bool = False):
        """Fit to a point cloud's bounding box (extremes map to +-1)."""
        positions = _as_points(positions, "positions")
        if positions.shape[0] < 1:
            raise InvalidArgumentError("cannot fit a normalizer to an empty point set")
        lows = positions.min(axis=0)
        highs = positions.max(axis=0)
        offsets = []
        scales = []
        for lo, hi in zip(lows, highs):
            if hi > lo:
                offsets.append(0.5 * (lo + hi))
                scales.append(2.0 / (hi - lo))
            else:
                offsets.append(float(lo))
                scales.append(1.0)
        velocity_scale = 1.0
        if scale_velocities:
            if velocities is None:
                raise InvalidArgumentError("scale_velocities=True requires velocities")
            peak = float(np.abs(np.asarray(velocities, dtype=np.float64)).max())
            if peak > 0:
                velocity_scale = 1.0 / peak
        return cls(tuple(offsets), tuple(scales), velocity_scale)

    def apply_positions(self, positions) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.float64)
        return (positions - np.array(self.offsets)) * np.array(self.scales)

    def invert_positions(self, model_positions) -> np.ndarray:
        model_positions = np.asarray(model_positions, dtype=np.float64)
        return model_positions / np.array(self.scales) + np.array(self.offsets)

    def apply_velocities(self, velocities) -> np.ndarray:
        return np.asarray(velocities, dtype=np.float64) * self.velocity_scale

    def invert_velocities(self, model_velocities) -> np.ndarray:
        return np.asarray(model_velocities, dtype=np.float64) / self.velocity_scale

    def invert_variances(self, model_variances) -> np.ndarray:
        return np.asarray(model_variances, dtype=np.float64) / self.velocity_scale**2


def normalize(dataset: Dataset, scale_velocities: bool = False):
    """Map positions into [-1,1]^3; returns (normalized dataset, transform)."""
    if dataset.n < 1:
        raise InvalidArgumentError("cannot normalize an empty dataset")
    transform = NormalizerTransform.fit(
        dataset.positions, dataset.velocities, scale_velocities=scale_velocities
    )
    mapped = replace(
        dataset,
        positions=transform.apply_positions(dataset.positions),
        velocities=transform.apply_velocities(dataset.velocities),
    )
    return mapped, transform


def denormalize(dataset: Dataset, transform: NormalizerTransform) -> Dataset:
    """Inverse of ``normalize`` under the same transform."""
    return replace(
        dataset,
        positions=transform.invert_positions(dataset.positions),
        velocities=transform.invert_velocities(dataset.velocities),
    )


def generate_chunks(
    n_points: int,
    seed: int,
    noise_sigma: float = LABEL_NOISE_SIGMA,
) -> Dataset:
    """Uniform points in [-1,1]^3 with slab-wise constant x-velocity.

    Slabs along x split at -1/3 and 1/3 carry x-velocity -2, 0, +2; the
    y and z labels are zero.  Gaussian label noise with ``noise_sigma``
    is added to all three components.
    """
    if n_points < 3:
        raise InvalidArgumentError(f"n_points must be >= 3, got {n_points}")
    if noise_sigma < 0 or not np.isfinite(noise_sigma):
        raise InvalidArgumentError(f"noise_sigma must be finite and >= 0, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    positions = rng.uniform(-1.0, 1.0, size=(n_points, 3))
    slab = np.digitize(positions[:, 0], CHUNK_SLAB_EDGES)
    velocities = np.zeros((n_points, 3))
    velocities[:, 0] = np.asarray(CHUNK_SLAB_LABELS)[slab]
    if noise_sigma > 0:
        velocities += rng.normal(0.0, noise_sigma, size=(n_points, 3))
    return Dataset(positions, velocities)


def generate_blobs(
    n_points: int,
    seed: int,
    noise_sigma: float = LABEL_NOISE_SIGMA,
    position_sigma: float = BLOB_POSITION_SIGMA,
) -> Dataset:
    """Three Gaussian position clusters, each with a constant velocity.

    Points are assigned to clusters round-robin, so counts divisible by
    3 put exactly n/3 points in each.
    """
    if n_points < 1:
        raise InvalidArgumentError(f"n_points must be >= 1, got {n_points}")
    if noise_sigma < 0 or position_sigma <= 0:
        raise InvalidArgumentError("noise_sigma must be >= 0 and position_sigma > 0")
    rng = np.random.default_rng(seed)
    cluster = np.arange(n_points) % 3
    centers = np.asarray(BLOB_CENTERS)
    labels = np.asarray(BLOB_VELOCITIES)
    positions = centers[cluster] + rng.normal(0.0, position_sigma, size=(n_points, 3))
    velocities = labels[cluster].astype(np.float64)
    if noise_sigma > 0:
        velocities = velocities + rng.normal(0.0, noise_sigma, size=(n_points, 3))
    return Dataset(positions, velocities)


def derive_velocities(trajectories) -> Dataset:
    """Finite-difference velocities from timestamped position fixes.

    ``trajectories`` is an iterable of (positions (K,3), timestamps (K,))
    pairs with strictly increasing timestamps.  Each consecutive pair
    contributes one record: velocity (p[n+1]-p[n])/(t[n+1]-t[n]) placed
    at the midpoint position and midpoint time (second-order pairing);
    the trailing fix of each trajectory yields no record of its own.
    """
    all_positions = []
    all_velocities = []
    all_times = []
    for index, (positions, timestamps) in enumerate(trajectories):
        positions = _as_points(positions, f"trajectory {index} positions")
        timestamps = np.asarray(timestamps, dtype=np.float64)
        if timestamps.shape != (positions.shape[0],):
            raise InvalidArgumentError(
                f"trajectory {index}: {positions.shape[0]} fixes but "
                f"{timestamps.shape[0]} timestamps"
            )
        if not np.isfinite(timestamps).all():
            raise DataError(f"trajectory {index}: non-finite timestamps")
        if positions.shape[0] < 2:
            continue
        dt = np.diff(timestamps)
        if (dt <= 0).any():
            where = int(np.argmax(dt <= 0))
            raise DataError(
                f"trajectory {index}: timestamps not strictly increasing at fix {where + 1}"
            )
        dp = np.diff(positions, axis=0)
        all_velocities.append(dp / dt[:, None])
        all_positions.append(0.5 * (positions[:-1] + positions[1:]))
        all_times.append(0.5 * (timestamps[:-1] + timestamps[1:]))
    if not all_positions:
        return Dataset(np.empty((0, 3)), np.empty((0, 3)), np.empty(0))
    return Dataset(
        np.concatenate(all_positions),
        np.concatenate(all_velocities),
        np.concatenate(all_times),
    )


def split(dataset: Dataset, test_fraction: float = 0.2, seed: int = 0):
    """Uniform random train/test partition without replacement."""
    if not (0.0 < test_fraction < 1.0):
        raise InvalidArgumentError(
            f"test_fraction must be in (0, 1), got {test_fraction}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(dataset.n)
    n_test = int(round(dataset.n * test_fraction))
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return dataset.take(train_idx), dataset.take(test_idx)


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def save_trajectories(dataset: Dataset, path, comments=()) -> None:
    """Write a dataset as CSV; ``comments`` become leading # lines.

    Source tags have no CSV column and are not round-tripped.
    """
    has_time = dataset.timestamps is not None
    header = ",".join(CSV_COLUMNS + (("t",) if has_time else ()))
    lines = [f"# {c}" for c in comments]
    lines.append(header)
    for i in range(dataset.n):
        row = list(dataset.positions[i]) + list(dataset.velocities[i])
        if has_time:
            row.append(dataset.timestamps[i])
        lines.append(_format_row(row))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def load_trajectories(path, format: str = "csv") -> Dataset:
    """Parse a dataset CSV with header x,y,z,vx,vy,vz and optional t.

    Malformed rows (wrong arity, unparseable or non-finite numbers) are
    collected and reported with their line numbers, first 10 shown.
    """
    if format != "csv":
        raise InvalidArgumentError(f"unsupported format {format!r}, only 'csv'")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw_lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read dataset file {path}: {exc}") from exc

    header = None
    rows = []
    bad: list[str] = []
    n_cols = 0
    for lineno, line in enumerate(raw_lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if header is None:
            names = tuple(part.strip() for part in stripped.split(","))
            if names == CSV_COLUMNS:
                n_cols = 6
            elif names == CSV_COLUMNS + ("t",):
                n_cols = 7
            else:
                raise DataError(
                    f"{path}: line {lineno}: expected header "
                    f"'x,y,z,vx,vy,vz[,t]', got {stripped!r}"
                )
            header = names
            continue
        parts = stripped.split(",")
        if len(parts) != n_cols:
            bad.append(f"line {lineno}: expected {n_cols} fields, got {len(parts)}")
            continue
        try:
            values = [float(part) for part in parts]
        except ValueError:
            bad.append(f"line {lineno}: unparseable number in {stripped!r}")
            continue
        if not all(np.isfinite(values)):
            bad.append(f"line {lineno}: non-finite value in {stripped!r}")
            continue
        rows.append(values)
    if header is None:
        raise DataError(f"{path}: no header line found")
    if bad:
        shown = "; ".join(bad[:_MAX_REPORTED_BAD_ROWS])
        extra = len(bad) - _MAX_REPORTED_BAD_ROWS
        suffix = f" (and {extra} more)" if extra > 0 else ""
        raise DataError(f"{path}: {len(bad)} malformed rows: {shown}{suffix}")
    if not rows:
        return Dataset(np.empty((0, 3)), np.empty((0, 3)))
    table = np.asarray(rows, dtype=np.float64)
    timestamps = table[:, 6] if n_cols == 7 else None
    return Dataset(table[:, 0:3], table[:, 3:6], timestamps)
