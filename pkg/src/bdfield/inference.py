"""Conjugate Bayesian linear regression over kernel features.

One scalar output component is modeled as v = w . phi(x) + noise with
noise precision beta and Gaussian weight prior N(0, (1/alpha) I).  The
weight posterior stays Gaussian and is stored in precision form:

    precision  Lambda = Sigma^-1          (M x M)
    info       eta    = Lambda mu         (M,)

which makes absorbing a batch of evidence additive,

    Lambda' = Lambda + beta Phi^T Phi,    eta' = eta + beta Phi^T v,

so chaining updates over batches equals one update on the concatenated
batch.  Mean, covariance, and predictions are materialized on demand
through a single Cholesky factorization (with escalating diagonal jitter
as a last resort); predictive variances use triangular solves and never
form the covariance explicitly.

``brute_force_posterior`` is the deliberately naive reference: the same
posterior computed by explicit dense matrix inversion.  It exists as an
independent cross-check and stays free of factorization shortcuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.linalg import cho_solve, solve_triangular

from .exceptions import InvalidArgumentError, NumericalError

DEFAULT_ALPHA = 1e-2
DEFAULT_BETA = 1e2

_BRUTE_FORCE_MAX_DIM = 200
_JITTER_START = 1e-10
_JITTER_CAP = 1e-4
_VARIANCE_BLOCK = 4096


@dataclass(frozen=True)
class NoiseModel:
    """Observation noise precision beta and weight prior precision alpha."""

    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise InvalidArgumentError(f"beta must be finite and > 0, got {self.beta}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidArgumentError(f"alpha must be finite and > 0, got {self.alpha}")

    @property
    def noise_variance(self) -> float:
        return 1.0 / self.beta


class GaussianState:
    """Gaussian weight distribution held as (precision, info).

    Treat instances as immutable snapshots: updates return new states and
    the lazily materialized mean / covariance / Cholesky caches attach to
    the state they were computed from.  Concurrent reads of a state are
    safe once materialized; writers must replace the state wholesale.
    """

    __slots__ = ("precision", "info", "_chol", "_mean", "_cov")

    def __init__(self, precision: np.ndarray, info: np.ndarray):
        precision = np.asarray(precision, dtype=np.float64)
        info = np.asarray(info, dtype=np.float64)
        if precision.ndim != 2 or precision.shape[0] != precision.shape[1]:
            raise InvalidArgumentError(f"precision must be square, got shape {precision.shape}")
        if info.shape != (precision.shape[0],):
            raise InvalidArgumentError(
                f"info length {info.shape} does not match precision {precision.shape}"
            )
        if not np.isfinite(precision).all() or not np.isfinite(info).all():
            raise InvalidArgumentError("non-finite entries in posterior state")
        self.precision = precision
        self.info = info
        self._chol = None
        self._mean = None
        self._cov = None

    @property
    def dim(self) -> int:
        return self.precision.shape[0]

    def validate(self, sym_tol: float = 1e-12, mean_tol: float = 1e-8, cov_tol: float = 1e-6):
        """Check the state invariants, raising on violation."""
        scale = max(np.abs(self.precision).max(), 1.0)
        asym = np.abs(self.precision - self.precision.T).max()
        if asym > sym_tol * scale:
            raise NumericalError(f"precision asymmetry {asym:.3e} exceeds tolerance")
        cholesky_factor(self)  # positive definiteness
        if self._mean is not None:
            resid = np.abs(self.precision @ self._mean - self.info).max()
            if resid > mean_tol * max(1.0, np.abs(self.info).max()):
                raise NumericalError(f"cached mean residual {resid:.3e} exceeds tolerance")
        if self._cov is not None:
            resid = np.abs(self._cov @ self.precision - np.eye(self.dim)).max()
            if resid > cov_tol:
                raise NumericalError(f"cached covariance residual {resid:.3e} exceeds tolerance")


def make_prior(m: int, alpha: float = DEFAULT_ALPHA) -> GaussianState:
    """Nearly uninformative zero-mean prior: precision alpha*I, info 0."""
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"feature count must be a positive integer, got {m}")
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidArgumentError(f"alpha must be finite and > 0, got {alpha}")
    m = int(m)
    return GaussianState(alpha * np.eye(m), np.zeros(m))


def _as_features(features, dim: int | None = None):
    if sparse.issparse(features):
        mat = features.tocsr()
    else:
        mat = np.asarray(features, dtype=np.float64)
        if mat.ndim != 2:
            raise InvalidArgumentError(f"feature matrix must be 2-D, got shape {mat.shape}")
        if not np.isfinite(mat).all():
            raise InvalidArgumentError("non-finite entries in feature matrix")
    if dim is not None and mat.shape[1] != dim:
        raise InvalidArgumentError(
            f"feature matrix has {mat.shape[1]} columns, state expects {dim}"
        )
    return mat


def batch_statistics(features, labels, beta: float):
    """Evidence terms of one batch: (beta Phi^T Phi, beta Phi^T v).

    ``labels`` may be (N,) for one output component or (N, K) to share
    the Gram product across K components observed at the same inputs.
    The Gram term is symmetrized to cancel BLAS rounding asymmetry.
    """
    if not (math.isfinite(beta) and beta > 0):
        raise InvalidArgumentError(f"beta must be finite and > 0, got {beta}")
    mat = _as_features(features)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape[0] != mat.shape[0]:
        raise InvalidArgumentError(
            f"{labels.shape[0]} labels for {mat.shape[0]} feature rows"
        )
    if not np.isfinite(labels).all():
        raise InvalidArgumentError("non-finite labels")
    gram = mat.T @ mat
    if sparse.issparse(gram):
        gram = gram.toarray()
    gram = 0.5 * (gram + gram.T)
    moment = mat.T @ labels
    return beta * gram, beta * moment


def posterior_update(state: GaussianState, features, labels, beta: float) -> GaussianState:
    """Absorb one batch of (features, labels) evidence; returns a new state.

    An empty batch returns ``state`` unchanged.  Positive definiteness of
    the result is checked lazily, at the first factorization; a precision
    matrix that stays indefinite after jitter escalation raises
    NumericalError there.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim != 1:
        raise InvalidArgumentError(f"labels must be a vector, got shape {labels.shape}")
    if labels.shape[0] == 0:
        return state
    mat = _as_features(features, state.dim)
    d_gram, d_moment = batch_statistics(mat, labels, beta)
    return GaussianState(state.precision + d_gram, state.info + d_moment)


def brute_force_posterior(prior_mu, prior_cov, features, labels, beta: float):
    """Posterior (mean, covariance) by explicit dense inversion.

    Independent reference path for testing the factorized update; capped
    at small dimension because it inverts M x M matrices directly.
    """
    prior_mu = np.asarray(prior_mu, dtype=np.float64)
    prior_cov = np.asarray(prior_cov, dtype=np.float64)
    m = prior_mu.shape[0]
    if m > _BRUTE_FORCE_MAX_DIM:
        raise InvalidArgumentError(
            f"brute-force path is limited to M <= {_BRUTE_FORCE_MAX_DIM}, got {m}"
        )
    if prior_cov.shape != (m, m):
        raise InvalidArgumentError(
            f"prior covariance shape {prior_cov.shape} does not match mean length {m}"
        )
    if not (math.isfinite(beta) and beta > 0):
        raise InvalidArgumentError(f"beta must be finite and > 0, got {beta}")
    labels = np.asarray(labels, dtype=np.float64)
    mat = np.asarray(features, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != m:
        raise InvalidArgumentError(f"feature matrix shape {mat.shape} does not match M={m}")
    if mat.shape[0] == 0:
        # No evidence: the posterior is the prior.
        return prior_mu.copy(), prior_cov.copy()
    try:
        prior_precision = np.linalg.inv(prior_cov)
        post_cov = np.linalg.inv(prior_precision + beta * (mat.T @ mat))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular matrix in brute-force posterior: {exc}") from exc
    post_mean = post_cov @ (prior_precision @ prior_mu + beta * (mat.T @ labels))
    return post_mean, post_cov


def cholesky_with_jitter(matrix: np.ndarray):
    """Lower Cholesky factor, adding escalating diagonal jitter on failure.

    Starts at 1e-10 * trace/M and escalates tenfold up to 1e-4 * trace/M
    before giving up.  Returns (L, jitter_used).
    """
    try:
        return np.linalg.cholesky(matrix), 0.0
    except np.linalg.LinAlgError:
        pass
    base = float(np.trace(matrix)) / matrix.shape[0]
    if not (base > 0 and math.isfinite(base)):
        raise NumericalError("matrix is not positive definite and has non-positive trace")
    eye = np.eye(matrix.shape[0])
    jitter = _JITTER_START * base
    cap = _JITTER_CAP * base
    while jitter <= cap * (1 + 1e-12):
        try:
            return np.linalg.cholesky(matrix + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalError(
        f"matrix is not positive definite even with jitter up to {cap:.3e}"
    )


def cholesky_factor(state: GaussianState) -> np.ndarray:
    """Cached lower Cholesky factor of the precision matrix."""
    if state._chol is None:
        factor, _ = cholesky_with_jitter(state.precision)
        state._chol = factor
    return state._chol


def posterior_mean(state: GaussianState) -> np.ndarray:
    if state._mean is None:
        factor = cholesky_factor(state)
        state._mean = cho_solve((factor, True), state.info)
    return state._mean


def posterior_covariance(state: GaussianState) -> np.ndarray:
    if state._cov is None:
        factor = cholesky_factor(state)
        cov = cho_solve((factor, True), np.eye(state.dim))
        state._cov = 0.5 * (cov + cov.T)
    return state._cov


def predictive_variance(factor: np.ndarray, features, beta: float) -> np.ndarray:
    """1/beta + phi^T Sigma phi per feature row, via triangular solves.

    ``factor`` is the lower Cholesky factor of the precision matrix.  A
    zero feature row yields exactly 1/beta.
    """
    mat = _as_features(features, factor.shape[0])
    n_rows = mat.shape[0]
    out = np.empty(n_rows)
    floor = 1.0 / beta
    for start in range(0, n_rows, _VARIANCE_BLOCK):
        stop = min(start + _VARIANCE_BLOCK, n_rows)
        block = mat[start:stop]
        if sparse.issparse(block):
            block = block.toarray()
        z = solve_triangular(factor, block.T, lower=True, check_finite=False)
        out[start:stop] = floor + np.einsum("ij,ij->j", z, z)
    return out


def predict(state: GaussianState, features, beta: float):
    """Predictive means and variances for the given feature rows.

    mean_q = mu . phi_q and var_q = 1/beta + phi_q^T Sigma phi_q, so the
    variance never drops below the aleatoric floor 1/beta.
    """
    if not (math.isfinite(beta) and beta > 0):
        raise InvalidArgumentError(f"beta must be finite and > 0, got {beta}")
    mat = _as_features(features, state.dim)
    if mat.shape[0] == 0:
        raise InvalidArgumentError("empty query feature matrix")
    mean = posterior_mean(state)
    means = np.asarray(mat @ mean)
    variances = predictive_variance(cholesky_factor(state), mat, beta)
    return means, variances


def rescale_check(state: GaussianState, features, c: float):
    """Predict twice: with (phi, mu) and with (c*phi, mu/c).

    Scaling every feature by a constant c while dividing the weights by c
    leaves predictions algebraically unchanged, which is how a kernel
    attenuation factor (e.g. exp(-gamma nu^2) under input noise of
    variance nu^2) is absorbed into the weights.  Returns both mean
    vectors so callers can assert their closeness.
    """
    if not (math.isfinite(c) and c > 0):
        raise InvalidArgumentError(f"scale factor must be finite and > 0, got {c}")
    mat = _as_features(features, state.dim)
    mean = posterior_mean(state)
    means_before = np.asarray(mat @ mean)
    means_after = np.asarray((mat * c) @ (mean / c))
    return means_before, means_after
