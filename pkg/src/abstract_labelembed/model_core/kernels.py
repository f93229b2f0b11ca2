"""Closed-form probability kernels for the vote model.

Votes ``y`` for one instance follow a Dirichlet-Multinomial whose Dirichlet
parameters are ``alpha_k = exp(z_k)``; with two classes it is the
Beta-Binomial. Everything is computed from ``gammaln`` so a J of a few
hundred never overflows, and ``z`` is clamped to ``[-Z_CLAMP, Z_CLAMP]``
before it is exponentiated. Clamps are counted, not raised. Counts go to
the innermost :func:`counting_clamps` scope of the calling context (one per
fit), or to a process-wide fallback read with :func:`clamp_events`.

The batched ``*_rows`` helpers take ``(P, K)`` arrays and reduce over the
class axis column by column, so a row's value never depends on its
neighbours. The sampler relies on that for batch-size-independent chains.
"""
from __future__ import annotations

import logging
import threading
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, NamedTuple, Union

import numpy as np
from scipy.special import gammaln, softmax

from ..imports import Z_CLAMP, DomainError
from .schemas import DirichletMoments, Embedding, GaussianPrior, VoteCounts

logger = logging.getLogger("abstract_labelembed.model_core")

ArrayLike = Union[np.ndarray, list, tuple]


class ClampCounter:
    """Thread-safe tally of clamped embedding rows."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    @property
    def count(self) -> int:
        return self._count

    def add(self, rows: int) -> None:
        with self._lock:
            self._count += rows

    def reset(self) -> int:
        with self._lock:
            held, self._count = self._count, 0
        return held


_PROCESS_COUNTER = ClampCounter()
_ACTIVE_COUNTER: ContextVar[ClampCounter] = ContextVar("clamp_counter", default=_PROCESS_COUNTER)


@contextmanager
def counting_clamps() -> Iterator[ClampCounter]:
    """Route clamp counts in this context to a fresh counter."""
    counter = ClampCounter()
    token = _ACTIVE_COUNTER.set(counter)
    try:
        yield counter
    finally:
        _ACTIVE_COUNTER.reset(token)


def clamp_events() -> int:
    """Clamped rows counted by the active counter since its last reset."""
    return _ACTIVE_COUNTER.get().count


def reset_clamp_events() -> int:
    """Zero the active counter; returns the count it held."""
    return _ACTIVE_COUNTER.get().reset()


def _clamp(z: np.ndarray) -> np.ndarray:
    beyond = np.abs(z) > Z_CLAMP
    if np.any(beyond):
        # counted per row, not per call
        rows = int(np.count_nonzero(beyond.any(axis=-1))) if z.ndim > 1 else 1
        _ACTIVE_COUNTER.get().add(rows)
        logger.debug("clamped embedding entries beyond +/-%s", Z_CLAMP)
        return np.clip(z, -Z_CLAMP, Z_CLAMP)
    return z


def _finite_vector(z, name: str = "z") -> np.ndarray:
    if isinstance(z, Embedding):
        return z.z
    arr = np.asarray(z, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {arr!r}")
    return arr


def _count_vector(y) -> np.ndarray:
    if isinstance(y, VoteCounts):
        return y.as_array()
    arr = np.asarray(y)
    if arr.ndim != 1 or not (np.issubdtype(arr.dtype, np.integer) or np.all(arr == np.round(arr))):
        raise DomainError(f"vote counts must be a vector of integers, got {y!r}")
    arr = arr.astype(np.int64)
    if np.any(arr < 0) or arr.sum() < 1:
        raise DomainError(f"vote counts must be non-negative with J >= 1, got {y!r}")
    return arr


# ---------------------------------------------------------------------------
# Marginal likelihoods
# ---------------------------------------------------------------------------
def log_beta_binomial_marginal(y: int, J: int, z: ArrayLike) -> float:
    """``log P(Y = y | z)`` for ``pi ~ Beta(e^z1, e^z2)``, ``Y | pi ~ Bin(J, pi)``."""
    if int(J) != J or J < 1:
        raise DomainError(f"J must be a positive integer, got {J!r}")
    if int(y) != y or not 0 <= y <= J:
        raise DomainError(f"y must be an integer in [0, {J}], got {y!r}")
    z = _finite_vector(z)
    if z.shape[0] != 2:
        raise DomainError(f"the Beta-Binomial takes a 2-vector z, got {z.shape[0]} entries")
    a, b = np.exp(_clamp(z))
    y, J = int(y), int(J)
    log_choose = gammaln(J + 1) - gammaln(y + 1) - gammaln(J - y + 1)
    log_beta_post = gammaln(a + y) + gammaln(b + J - y) - gammaln(a + b + J)
    log_beta_prior = gammaln(a) + gammaln(b) - gammaln(a + b)
    return float(log_choose + log_beta_post - log_beta_prior)


def log_dirichlet_multinomial_rows(Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Row-wise ``log P(Y_p | Z_p)`` for ``(P, K)`` counts and embeddings."""
    Y = np.asarray(Y, dtype=np.float64)
    alpha = np.exp(_clamp(np.asarray(Z, dtype=np.float64)))
    K = Y.shape[1]
    J = np.zeros(Y.shape[0])
    A = np.zeros(Y.shape[0])
    body = np.zeros(Y.shape[0])
    for k in range(K):
        y_k, a_k = Y[:, k], alpha[:, k]
        J += y_k
        A += a_k
        body += gammaln(a_k + y_k) - gammaln(a_k) - gammaln(y_k + 1.0)
    return gammaln(J + 1.0) + gammaln(A) - gammaln(A + J) + body


def log_dirichlet_multinomial_marginal(y, z) -> float:
    """``log P(Y = y | z)`` for ``pi ~ Dir(exp z)``, ``Y | pi ~ Mult(J, pi)``."""
    counts = _count_vector(y)
    z = _finite_vector(z)
    if counts.shape[0] != z.shape[0]:
        raise DomainError(
            f"dimension mismatch: {counts.shape[0]} vote counts vs {z.shape[0]} embedding entries")
    return float(log_dirichlet_multinomial_rows(counts[None, :], z[None, :])[0])


def log_posterior_rows(Z: np.ndarray, Y: np.ndarray, prior: GaussianPrior) -> np.ndarray:
    return log_dirichlet_multinomial_rows(Y, Z) + prior.log_density_rows(Z)


def log_posterior(z, y, prior: GaussianPrior) -> float:
    """Unnormalised ``log f(z | y)``: the marginal plus the prior log-density."""
    counts = _count_vector(y)
    z = _finite_vector(z)
    if not counts.shape[0] == z.shape[0] == prior.K:
        raise DomainError(
            f"dimension mismatch: votes {counts.shape[0]}, z {z.shape[0]}, prior {prior.K}")
    return float(log_posterior_rows(z[None, :], counts[None, :], prior)[0])


# ---------------------------------------------------------------------------
# Moments of pi given z
# ---------------------------------------------------------------------------
def dirichlet_moments(z) -> DirichletMoments:
    """Mean and covariance of ``pi ~ Dir(exp z)``.

    ``Cov(pi_k, pi_k') = (delta_kk' m_k - m_k m_k') / (1 + alpha_0)``. The
    diagonal is the familiar ``m_k (1 - m_k) / (1 + alpha_0)``; the
    off-diagonal is the standard Dirichlet completion of it.
    """
    z = _finite_vector(z)
    mean = softmax(z)
    alpha_0 = float(np.sum(np.exp(_clamp(z))))
    cov = (np.diag(mean) - np.outer(mean, mean)) / (1.0 + alpha_0)
    return DirichletMoments(mean=mean, cov=cov)


class BetaMoments(NamedTuple):
    mean: float
    variance: float
    log_variance: float


def beta_moments(z) -> BetaMoments:
    """Mean, variance and log-variance of ``pi ~ Beta(e^z1, e^z2)``."""
    z = _finite_vector(z)
    if z.shape[0] != 2:
        raise DomainError(f"beta_moments takes a 2-vector z, got {z.shape[0]} entries")
    z = _clamp(z)
    a, b = np.exp(z)
    s = a + b
    mean = a / s
    variance = a * b / (s * s * (s + 1.0))
    log_s = np.logaddexp(z[0], z[1])
    log_variance = z[0] + z[1] - 2.0 * log_s - np.logaddexp(log_s, 0.0)
    return BetaMoments(float(mean), float(variance), float(log_variance))

