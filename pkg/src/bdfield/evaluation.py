"""Metrics, the exact full-GP baseline, and runtime scaling benchmarks.

RMSE is taken over all 3Q velocity components at once.  MSLL is the
mean negative log predictive density minus the same loss under a
trivial Gaussian fitted to the training labels, so 0 means "no better
than predicting the training mean" and negative is improvement.

``full_gp_fit_predict`` is the O(N^3) exact Gaussian process regressor
with the same squared-exponential kernel, used as an accuracy oracle.
It is deliberately capped (default N <= 3000): beyond that the point of
the feature-basis model is precisely that the full GP stops being
practical.

Benchmarks time with a monotonic clock, discard one warm-up run, and
report the median of the timed repeats.  They run single-threaded; on
this design there is no internal parallelism to switch on.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .datasets import Dataset
from .exceptions import CapacityError, InvalidArgumentError
from .field import FieldConfig, VelocityField, query_field_arrays, train_field
from .inference import cholesky_with_jitter
from .kernels import KernelSpec, kernel_matrix

FULL_GP_CAP = 3000


def rmse(predicted, truth) -> float:
    """Root mean squared error over every component of every point."""
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape:
        raise InvalidArgumentError(
            f"shape mismatch: predicted {predicted.shape} vs truth {truth.shape}"
        )
    if predicted.size == 0:
        raise InvalidArgumentError("need at least one prediction")
    return float(np.sqrt(np.mean((predicted - truth) ** 2)))


def _gaussian_loss(mean, var, truth):
    return 0.5 * np.log(2.0 * np.pi * var) + (truth - mean) ** 2 / (2.0 * var)


def msll(pred_mean, pred_var, truth, train_mean, train_var) -> float:
    """Mean standardized log loss against the trivial train-set Gaussian.

    Elementwise loss is 0.5 log(2 pi s^2) + (y - m)^2 / (2 s^2); the
    returned value is the mean over all entries of (model loss - trivial
    loss).  Inputs broadcast, so per-axis trivial parameters of shape
    (3,) apply across (Q, 3) predictions.
    """
    pred_mean = np.asarray(pred_mean, dtype=np.float64)
    pred_var = np.asarray(pred_var, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    train_mean = np.asarray(train_mean, dtype=np.float64)
    train_var = np.asarray(train_var, dtype=np.float64)
    if np.any(pred_var <= 0) or np.any(train_var <= 0):
        raise InvalidArgumentError("variances must be strictly positive")
    model_loss = _gaussian_loss(pred_mean, pred_var, truth)
    trivial_loss = np.broadcast_to(
        _gaussian_loss(train_mean, train_var, truth), model_loss.shape
    )
    return float(np.mean(model_loss - trivial_loss))


@dataclass(frozen=True)
class EvalReport:
    """Accuracy and timing summary for one trained field on one test set."""

    rmse: float
    msll: float
    train_time_s: float
    query_time_s: float
    n_train: int
    n_test: int
    m_features: int
    config: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if self.rmse < 0:
            raise InvalidArgumentError(f"rmse must be >= 0, got {self.rmse}")
        if self.train_time_s < 0 or self.query_time_s < 0:
            raise InvalidArgumentError("times must be >= 0")

    def to_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "msll": self.msll,
            "train_time_s": self.train_time_s,
            "query_time_s": self.query_time_s,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "M": self.m_features,
            "config": dict(self.config),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def train_label_moments(train: Dataset):
    """Per-axis mean and population variance of training velocity labels."""
    mean = train.velocities.mean(axis=0)
    var = train.velocities.var(axis=0)
    return mean, var


def evaluate_field(
    field: VelocityField,
    test: Dataset,
    train: Dataset,
    train_time_s: float = 0.0,
    config_echo: dict | None = None,
) -> EvalReport:
    """Query the field on the test positions and score RMSE and MSLL.

    The MSLL baseline Gaussian comes from ``train`` labels.  Training
    time is not measured here; pass the caller's measurement through
    ``train_time_s`` when available.
    """
    if test.n < 1:
        raise InvalidArgumentError("empty test dataset")
    t0 = time.perf_counter()
    means, variances = query_field_arrays(field, test.positions)
    query_time = time.perf_counter() - t0
    train_mean, train_var = train_label_moments(train)
    return EvalReport(
        rmse=rmse(means, test.velocities),
        msll=msll(means, variances, test.velocities, train_mean, train_var),
        train_time_s=float(train_time_s),
        query_time_s=float(query_time),
        n_train=train.n,
        n_test=test.n,
        m_features=field.m_features,
        config=dict(config_echo or {}),
    )


def full_gp_fit_predict(
    train: Dataset,
    test_positions,
    spec: KernelSpec,
    noise_var: float,
    cap: int = FULL_GP_CAP,
):
    """Exact GP regression per velocity axis with the SE kernel.

    mean = k*^T (K + s^2 I)^-1 y and var = k** - k*^T (K + s^2 I)^-1 k*
    + s^2, solved through one Cholesky factorization of the N x N train
    kernel matrix.  Returns (means (Q,3), variances (Q,3)); the variance
    columns are equal since all axes share K.  Refuses N above ``cap``.
    """
    if not (noise_var > 0 and np.isfinite(noise_var)):
        raise InvalidArgumentError(f"noise_var must be finite and > 0, got {noise_var}")
    n = train.n
    if n < 1:
        raise InvalidArgumentError("empty training dataset")
    if n > cap:
        raise CapacityError(
            f"full GP oracle is O(N^3) and capped at N <= {cap}, got N = {n}"
        )
    test_positions = np.asarray(test_positions, dtype=np.float64)
    if test_positions.ndim == 1:
        test_positions = test_positions[None, :]
    gram = kernel_matrix(train.positions, train.positions, spec)
    gram[np.diag_indices(n)] += noise_var
    factor, _ = cholesky_with_jitter(gram)
    cross = kernel_matrix(test_positions, train.positions, spec)  # (Q, N)
    weights = cho_solve((factor, True), train.velocities)  # (N, 3)
    means = cross @ weights
    half = solve_triangular(factor, cross.T, lower=True, check_finite=False)  # (N, Q)
    # k** = 1 for the SE kernel at zero distance.
    variances = 1.0 - np.einsum("ij,ij->j", half, half) + noise_var
    return means, np.tile(variances[:, None], (1, 3))


@dataclass(frozen=True)
class BenchRow:
    """One scaling measurement: median times and accuracy at size n."""

    n: int
    train_s: float
    query_s: float
    rmse: float
    msll: float


BENCH_CSV_HEADER = "n,train_s,query_s,rmse,msll"


def bench_rows_to_csv(rows, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(BENCH_CSV_HEADER)
    for row in rows:
        lines.append(
            f"{row.n},{repr(float(row.train_s))},{repr(float(row.query_s))},"
            f"{repr(float(row.rmse))},{repr(float(row.msll))}"
        )
    return "\n".join(lines) + "\n"


def _median_time(fn, repeats: int):
    fn()  # warm-up, discarded
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def scaling_benchmark(
    dataset: Dataset,
    sizes,
    config: FieldConfig,
    repeats: int = 3,
    query_count: int = 1000,
    seed: int = 0,
):
    """Train-and-query wall-clock scaling at fixed basis size M.

    For each n in ``sizes`` (strictly increasing), trains on an
    n-point subsample and times training and a ``query_count``-point
    query, reporting medians over ``repeats`` timed runs after one
    warm-up.  Accuracy is scored against a held-out set drawn from the
    same dataset.  Returns a list of BenchRow.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise InvalidArgumentError("sizes must be nonempty")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidArgumentError(f"sizes must be strictly increasing, got {sizes}")
    if sizes[0] < 1:
        raise InvalidArgumentError("sizes must be positive")
    if repeats < 1:
        raise InvalidArgumentError(f"repeats must be >= 1, got {repeats}")
    rng = np.random.default_rng(seed)
    n_test = min(query_count, max(1, dataset.n // 5))
    perm = rng.permutation(dataset.n)
    test = dataset.take(np.sort(perm[:n_test]))
    pool = dataset.take(np.sort(perm[n_test:]))
    if sizes[-1] > pool.n:
        raise InvalidArgumentError(
            f"largest size {sizes[-1]} exceeds available training pool {pool.n}"
        )
    rows = []
    for n in sizes:
        subset = pool.take(np.sort(rng.permutation(pool.n)[:n]))
        train_time, field = _median_time(lambda: train_field(subset, config), repeats)
        query_time, arrays = _median_time(
            lambda: query_field_arrays(field, test.positions), repeats
        )
        means, variances = arrays
        train_mean, train_var = train_label_moments(subset)
        rows.append(
            BenchRow(
                n=n,
                train_s=train_time,
                query_s=query_time,
                rmse=rmse(means, test.velocities),
                msll=msll(means, variances, test.velocities, train_mean, train_var),
            )
        )
    return rows


def compare_with_full_gp(
    train: Dataset,
    test: Dataset,
    config: FieldConfig,
    cap: int = FULL_GP_CAP,
    config_echo: dict | None = None,
) -> dict:
    """Head-to-head BDF versus the exact full-GP oracle, as a JSON-able dict.

    Hyperparameters are matched (same gammas, GP noise variance 1/beta)
    rather than tuned per model, so the comparison isolates the
    representation.  Other sparse-GP baselines are out of scope and the
    report says so.
    """
    t0 = time.perf_counter()
    bdf_field = train_field(train, config)
    bdf_train_time = time.perf_counter() - t0
    bdf_report = evaluate_field(
        bdf_field, test, train, train_time_s=bdf_train_time, config_echo=config_echo
    )

    model_train = Dataset(
        bdf_field.normalizer.apply_positions(train.positions),
        bdf_field.normalizer.apply_velocities(train.velocities),
    )
    model_test_positions = bdf_field.normalizer.apply_positions(test.positions)
    t0 = time.perf_counter()
    gp_means_model, gp_vars_model = full_gp_fit_predict(
        model_train,
        model_test_positions,
        config.kernel,
        noise_var=1.0 / config.noise.beta,
        cap=cap,
    )
    gp_time = time.perf_counter() - t0
    gp_means = bdf_field.normalizer.invert_velocities(gp_means_model)
    gp_vars = bdf_field.normalizer.invert_variances(gp_vars_model)
    train_mean, train_var = train_label_moments(train)
    gp_rmse = rmse(gp_means, test.velocities)
    gp_msll = msll(gp_means, gp_vars, test.velocities, train_mean, train_var)

    return {
        "bdf": bdf_report.to_dict(),
        "fgp": {
            "rmse": gp_rmse,
            "msll": gp_msll,
            "fit_predict_time_s": gp_time,
            "n_train": train.n,
            "n_test": test.n,
        },
        "rmse_ratio_bdf_over_fgp": bdf_report.rmse / gp_rmse if gp_rmse > 0 else float("inf"),
        "notes": "exact full GP only; sparse/approximate GP baselines are out of scope",
    }
