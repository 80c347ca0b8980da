"""Squared-exponential kernel features on a regular 3D grid.

The similarity between points ``a`` and ``b`` is

    k(a, b) = exp(-(g_x (a_x-b_x)^2 + g_y (a_y-b_y)^2 + g_z (a_z-b_z)^2))

with strictly positive per-axis inverse bandwidths ``g``.  Equal gammas
give the isotropic kernel exp(-g * ||a-b||^2); unequal gammas sharpen or
smooth each axis independently.  A :class:`FeatureBasis` pins M such
kernels at fixed points on an axis-aligned lattice, and :func:`featurize`
maps a batch of N points to the N x M feature matrix whose entries all
lie in (0, 1].

Feature matrices are plain ``float64`` ndarrays (dense) or CSR matrices
(:func:`featurize_sparse`).  The sparse variant zeroes every entry below
a threshold and is bit-identical to thresholding the dense matrix; it
exists because for sharp kernels most entries are vanishingly small.

Evaluation accumulates the x, y, z terms in that fixed order so that
k(a, b) == k(b, a) holds bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .exceptions import CapacityError, InvalidArgumentError

DEFAULT_MAX_GRID_POINTS = 1_000_000

# Tolerance when counting lattice steps: (hi-lo)/spacing is often a hair
# below an integer in floating point (e.g. 2/0.2 = 9.999...), and the
# upper bound must be included when the extent is an exact multiple.
_LATTICE_EPS = 1e-9

_DENSE_BLOCK_ROWS = 4096


@dataclass(frozen=True)
class KernelSpec:
    """Per-axis inverse bandwidths (units 1/length^2) of the kernel."""

    gammas: tuple[float, float, float]

    def __post_init__(self):
        try:
            g = tuple(float(v) for v in self.gammas)
        except (TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"gammas must be numeric: {self.gammas!r}") from exc
        if len(g) != 3:
            raise InvalidArgumentError(f"expected 3 gammas, got {len(g)}")
        if not all(math.isfinite(v) and v > 0 for v in g):
            raise InvalidArgumentError(f"gammas must be finite and > 0, got {g}")
        object.__setattr__(self, "gammas", g)

    @classmethod
    def isotropic(cls, gamma: float) -> "KernelSpec":
        return cls((gamma, gamma, gamma))

    @property
    def is_isotropic(self) -> bool:
        return self.gammas[0] == self.gammas[1] == self.gammas[2]


@dataclass(frozen=True)
class GridMeta:
    """Axis-aligned lattice description: per-axis lower bound, requested
    upper bound, spacing, and resulting point count.

    Lattice coordinates along axis d are ``lows[d] + i * spacing[d]`` for
    ``i in range(counts[d])``; the last one is the largest lattice value
    not above ``highs[d]`` (the bound itself when the extent is an exact
    multiple of the spacing).
    """

    lows: tuple[float, float, float]
    highs: tuple[float, float, float]
    spacing: tuple[float, float, float]
    counts: tuple[int, int, int]

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.lows[axis] + np.arange(self.counts[axis]) * self.spacing[axis]


@dataclass(frozen=True)
class FeatureBasis:
    """M fixed kernel centers on a regular grid plus the kernel itself."""

    fixed_points: np.ndarray  # (M, 3)
    kernel: KernelSpec
    grid_meta: GridMeta

    @property
    def m_features(self) -> int:
        return self.fixed_points.shape[0]


def se_kernel(a, b, spec: KernelSpec) -> float:
    """Kernel value for a single pair of 3D points, in (0, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (3,) or b.shape != (3,):
        raise InvalidArgumentError(f"expected 3-vectors, got shapes {a.shape} and {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise InvalidArgumentError("non-finite coordinates")
    gx, gy, gz = spec.gammas
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    s = (gx * dx * dx + gy * dy * dy) + gz * dz * dz
    return float(np.exp(-s))


def lattice_count(lo: float, hi: float, spacing: float) -> int:
    """Number of lattice points lo, lo+spacing, ... that do not exceed hi."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidArgumentError(f"non-finite bounds [{lo}, {hi}]")
    if hi < lo:
        raise InvalidArgumentError(f"bounds out of order: [{lo}, {hi}]")
    if not (math.isfinite(spacing) and spacing > 0):
        raise InvalidArgumentError(f"spacing must be finite and > 0, got {spacing}")
    return int(math.floor((hi - lo) / spacing + _LATTICE_EPS)) + 1


def lattice_axis(lo: float, hi: float, spacing: float) -> np.ndarray:
    """Inclusive lattice coordinates for one axis (see lattice_count)."""
    return lo + np.arange(lattice_count(lo, hi, spacing)) * spacing


def build_grid(bounds, spacing, spec: KernelSpec,
               max_points: int = DEFAULT_MAX_GRID_POINTS) -> FeatureBasis:
    """Place fixed kernel centers on a regular 3D grid.

    Parameters
    ----------
    bounds : sequence of 3 (lo, hi) pairs
        Per-axis extents.  ``lo == hi`` degenerates that axis to a single
        layer of points.
    spacing : float or 3-sequence of floats
        Lattice step per axis, > 0.
    spec : KernelSpec
        Kernel attached to every fixed point.
    max_points : int
        Capacity guard; exceeding it raises CapacityError before any
        allocation happens.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if len(bounds) != 3:
        raise InvalidArgumentError(f"expected 3 axis bounds, got {len(bounds)}")
    if np.isscalar(spacing):
        steps = (float(spacing),) * 3
    else:
        steps = tuple(float(s) for s in spacing)
        if len(steps) != 3:
            raise InvalidArgumentError(f"expected 1 or 3 spacing values, got {len(steps)}")

    counts = tuple(lattice_count(lo, hi, s) for (lo, hi), s in zip(bounds, steps))
    m_total = counts[0] * counts[1] * counts[2]
    if m_total > max_points:
        raise CapacityError(
            f"grid of {counts[0]}x{counts[1]}x{counts[2]} = {m_total} points "
            f"exceeds the configured maximum of {max_points}"
        )

    meta = GridMeta(
        lows=tuple(b[0] for b in bounds),
        highs=tuple(b[1] for b in bounds),
        spacing=steps,
        counts=counts,
    )
    axes = [meta.axis_coordinates(d) for d in range(3)]
    # Index (ix, iy, iz) maps to row m = (ix*ny + iy)*nz + iz.
    grids = np.meshgrid(*axes, indexing="ij")
    fixed = np.stack([g.reshape(-1) for g in grids], axis=1)
    return FeatureBasis(fixed_points=fixed, kernel=spec, grid_meta=meta)


def _validate_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1 and pts.shape == (3,):
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InvalidArgumentError(f"expected an (N, 3) point array, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise InvalidArgumentError("empty point set")
    if not np.isfinite(pts).all():
        raise InvalidArgumentError("non-finite coordinates in point set")
    return pts


def kernel_matrix(points_a, points_b, spec: KernelSpec) -> np.ndarray:
    """Dense pairwise kernel matrix of shape (len(a), len(b))."""
    a = _validate_points(points_a)
    b = _validate_points(points_b)
    gx, gy, gz = spec.gammas
    out = np.empty((a.shape[0], b.shape[0]))
    bx, by, bz = b[:, 0], b[:, 1], b[:, 2]
    for start in range(0, a.shape[0], _DENSE_BLOCK_ROWS):
        stop = min(start + _DENSE_BLOCK_ROWS, a.shape[0])
        blk = a[start:stop]
        d = blk[:, 0][:, None] - bx[None, :]
        acc = gx * d * d
        d = blk[:, 1][:, None] - by[None, :]
        acc += gy * d * d
        d = blk[:, 2][:, None] - bz[None, :]
        acc += gz * d * d
        np.negative(acc, out=acc)
        np.exp(acc, out=acc)
        out[start:stop] = acc
    return out


def featurize(points, basis: FeatureBasis) -> np.ndarray:
    """Dense N x M feature matrix: row n holds the kernel values between
    point n and every fixed point of the basis.  Rows keep input order,
    and featurizing concatenated batches equals concatenating the
    per-batch results row for row.
    """
    return kernel_matrix(points, basis.fixed_points, basis.kernel)


def featurize_sparse(points, basis: FeatureBasis, threshold: float) -> sparse.csr_matrix:
    """CSR feature matrix with every entry below ``threshold`` zeroed.

    Exactly equivalent to ``featurize`` followed by zeroing entries
    ``< threshold`` (kept entries are bit-identical); only kernel values
    of lattice points inside the per-axis reach of the threshold are ever
    evaluated, so cost scales with the kernel footprint instead of M.
    """
    pts = _validate_points(points)
    tau = float(threshold)
    if not (0.0 < tau < 1.0) or not math.isfinite(tau):
        raise InvalidArgumentError(f"sparsification threshold must be in (0, 1), got {threshold}")

    meta = basis.grid_meta
    gammas = basis.kernel.gammas
    log_cut = -math.log(tau)
    # Slightly loose candidate cut; the exact value >= tau filter below
    # makes the kept set identical to thresholding the dense matrix.
    loose_cut = log_cut * (1.0 + 1e-12)

    offs, n_axis, reach = [], [], []
    for d in range(3):
        r = math.sqrt(log_cut / gammas[d])
        h = min(int(math.ceil(r / meta.spacing[d])), meta.counts[d] - 1)
        offs.append(np.arange(-h, h + 1))
        n_axis.append(meta.counts[d])
        reach.append(h)
    wx, wy, wz = (2 * reach[0] + 1), (2 * reach[1] + 1), (2 * reach[2] + 1)
    window = wx * wy * wz
    block = max(1, int(4_000_000 // max(1, window)))

    n_pts = pts.shape[0]
    ny, nz = n_axis[1], n_axis[2]
    rows_parts, cols_parts, data_parts = [], [], []
    for start in range(0, n_pts, block):
        stop = min(start + block, n_pts)
        blk = pts[start:stop]
        nb = blk.shape[0]

        idx, ok, q = [], [], []
        for d in range(3):
            lo, s, n = meta.lows[d], meta.spacing[d], n_axis[d]
            center = np.floor((blk[:, d] - lo) / s + 0.5).astype(np.int64)
            cand = center[:, None] + offs[d][None, :]
            valid = (cand >= 0) & (cand < n)
            cand = np.clip(cand, 0, n - 1)
            coord = lo + cand * s
            dd = blk[:, d][:, None] - coord
            idx.append(cand)
            ok.append(valid)
            q.append(gammas[d] * dd * dd)

        sq = (q[0][:, :, None, None] + q[1][:, None, :, None]) + q[2][:, None, None, :]
        valid = ok[0][:, :, None, None] & ok[1][:, None, :, None] & ok[2][:, None, None, :]
        cand_mask = valid & (sq <= loose_cut)
        ri, ai, bi, ci = np.nonzero(cand_mask)
        vals = np.exp(-sq[cand_mask])
        keep = vals >= tau
        ri, ai, bi, ci, vals = ri[keep], ai[keep], bi[keep], ci[keep], vals[keep]

        cols = (idx[0][ri, ai] * ny + idx[1][ri, bi]) * nz + idx[2][ri, ci]
        rows_parts.append(ri + start)
        cols_parts.append(cols)
        data_parts.append(vals)

    rows = np.concatenate(rows_parts) if rows_parts else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols_parts) if cols_parts else np.empty(0, dtype=np.int64)
    data = np.concatenate(data_parts) if data_parts else np.empty(0)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n_pts, basis.m_features))
