"""Eavesdropper's maximum-likelihood detection of the source symbol and
Monte Carlo symbol-error-rate estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from relaysec.channel import (
    BLOCK_SIZE,
    GaussianMixtureChannel,
    SystemParams,
    complex_noise,
    eavesdropper_channel,
)
from relaysec.info import Estimate

MIN_TRIALS = 1000
# log-likelihoods closer than this are ties (absorbs rounding of coincident points)
TIE_TOL = 1e-9


@dataclass(frozen=True)
class SerResult:
    p_e: Estimate
    theta: float
    snr_db: float
    n: int
    seed: tuple[int, ...]


def _seed_key(seed) -> tuple[int, ...]:
    return tuple(int(s) for s in np.atleast_1d(seed))


def _source_loglik(y: np.ndarray, channel: GaussianMixtureChannel, detector: str) -> np.ndarray:
    """Per-source log-likelihood scores, shape (len(y), M), up to a constant."""
    M = channel.order
    ll = -np.abs(y[:, None] - channel.means[None, :]) ** 2 / channel.noise_variance
    ll = ll.reshape(len(y), M, -1)  # means are source-major
    if detector == "marginal":
        return logsumexp(ll, axis=2)
    if detector == "joint":
        return ll.max(axis=2)
    raise ValueError(f"unknown detector {detector!r}")


def _argmax_lowest(scores: np.ndarray) -> np.ndarray:
    best = scores.max(axis=1, keepdims=True)
    return np.argmax(scores >= best - TIE_TOL, axis=1)


def ml_detect_batch(y, channel: GaussianMixtureChannel, detector: str = "marginal") -> np.ndarray:
    y = np.asarray(y, dtype=complex).ravel()
    if not np.all(np.isfinite(y)):
        raise ValueError("observation must be finite")
    out = np.empty(y.size, dtype=np.int64)
    for i in range(0, y.size, BLOCK_SIZE):
        out[i:i + BLOCK_SIZE] = _argmax_lowest(_source_loglik(y[i:i + BLOCK_SIZE], channel, detector))
    return out


def ml_detect(y: complex, channel: GaussianMixtureChannel, detector: str = "marginal") -> int:
    """Source index maximising the jammer-marginalised likelihood.

    The eavesdropper does not know the jamming symbol, so each source
    hypothesis scores sum_d exp(-|y - mu_{s,d}|^2 / sigma^2). Ties go to the
    smallest index. ``detector="joint"`` instead picks the single most likely
    (s, d) pair and reports its s.
    """
    return int(ml_detect_batch([y], channel, detector)[0])


def ser_on_channel(channel: GaussianMixtureChannel, n: int, seed=0,
                   detector: str = "marginal") -> Estimate:
    if n < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {n}")
    key = _seed_key(seed)
    K = channel.means.size
    errors = 0
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        m = min(BLOCK_SIZE, n - start)
        rng = np.random.default_rng([*key, b])
        k = rng.integers(0, K, m)
        y = channel.means[k] + complex_noise(rng, m, channel.noise_variance)
        s_hat = _argmax_lowest(_source_loglik(y, channel, detector))
        errors += int(np.count_nonzero(s_hat != channel.source_labels[k]))
    p = errors / n
    # keep a nonzero spread when no (or only) errors were seen
    p_se = min(max(p, 0.5 / n), 1 - 0.5 / n)
    return Estimate(p, float(np.sqrt(p_se * (1 - p_se) / n)), n, "monte-carlo")


def estimate_ser(params: SystemParams, n: int = 100_000, seed=0,
                 detector: str = "marginal") -> SerResult:
    p_e = ser_on_channel(eavesdropper_channel(params), n, seed, detector)
    snr_db = 10 * np.log10(params.p1) if params.p1 > 0 else -np.inf
    return SerResult(p_e=p_e, theta=params.theta, snr_db=float(snr_db), n=n, seed=_seed_key(seed))


def ser_phase_profile(params: SystemParams, theta_grid, n: int = 100_000, seed: int = 0,
                      detector: str = "marginal") -> list[SerResult]:
    """One SER estimate per phase; grid point i uses seed ``(seed, i)``."""
    theta_grid = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    if theta_grid.size == 0:
        raise ValueError("theta grid is empty")
    return [
        estimate_ser(params.replace(theta=float(t)), n, (*_seed_key(seed), i), detector)
        for i, t in enumerate(theta_grid)
    ]
