"""Entropy and mutual information of discrete-input complex Gaussian channels.

A channel here is any object with ``means`` (complex, K entries),
``source_labels`` (int, K entries) and ``noise_variance`` (total complex
variance). The output density is the uniform mixture of the K circular
Gaussians; conditioning on the source keeps only the components with that
label. Everything is reported in bits.

Three engines evaluate the expectations:

* ``monte-carlo``: stratified sampling, equal draws per component
* ``quadrature``: tensor Gauss-Hermite per component
* ``grid-oracle``: brute-force rectangle rule on a truncated box, slow and
  only meant as a reference for small M
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp

from relaysec.channel import SystemParams, destination_channel, eavesdropper_channel

LOG2E = 1.0 / np.log(2.0)

ENGINES = ("monte-carlo", "quadrature", "grid-oracle")
ENGINE_ALIASES = {"mc": "monte-carlo", "quad": "quadrature", "oracle": "grid-oracle"}
DEFAULT_PRECISION = {"monte-carlo": 100_000, "quadrature": 24, "grid-oracle": 20}

# grid oracle truncation, in units of the total noise standard deviation
ORACLE_SPAN_SIGMAS = 6.0


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float = 0.0
    n: int = 0
    engine: str = "exact"
    raw: float | None = None  # pre-clamp value, when clamping was applied

    @property
    def unclamped(self) -> float:
        return self.value if self.raw is None else self.raw

    def clamp(self, lo: float, hi: float = np.inf) -> "Estimate":
        raw = self.unclamped
        return replace(self, value=float(min(max(raw, lo), hi)), raw=raw)

    def __sub__(self, other: "Estimate") -> "Estimate":
        return Estimate(
            value=self.unclamped - other.unclamped,
            stderr=float(np.hypot(self.stderr, other.stderr)),
            n=max(self.n, other.n),
            engine=self.engine if self.engine == other.engine else f"{self.engine}/{other.engine}",
        )


def resolve_engine(engine: str) -> str:
    engine = ENGINE_ALIASES.get(engine, engine)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    return engine


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability outside [0, 1]: {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def gaussian_entropy(noise_variance: float) -> float:
    """Differential entropy of a circular complex Gaussian, bits."""
    return float(np.log2(np.pi * np.e * noise_variance))


def _channel_arrays(channel):
    means = np.asarray(channel.means, dtype=complex).ravel()
    labels = np.asarray(channel.source_labels).ravel()
    sigma2 = float(channel.noise_variance)
    if means.size == 0:
        raise ValueError("empty mixture")
    if not sigma2 > 0:
        raise ValueError("noise variance must be positive")
    return means, labels, sigma2


def _neg_log2_densities(y, means, labels, sigma2, own):
    """-log2 p(y) and -log2 p(y | own source) for a batch of outputs.

    ``own`` is the source label each output is conditioned on (scalar or
    array broadcastable to ``y``).
    """
    K = means.size
    ll = -np.abs(y[:, None] - means[None, :]) ** 2 / sigma2
    log_norm = np.log(np.pi * sigma2)
    joint = logsumexp(ll, axis=1) - np.log(K) - log_norm
    mask = labels[None, :] == np.broadcast_to(own, y.shape)[:, None]
    counts = mask.sum(axis=1)
    cond = logsumexp(np.where(mask, ll, -np.inf), axis=1) - np.log(counts) - log_norm
    return -joint * LOG2E, -cond * LOG2E


def _engine_terms(channel, engine: str, precision: int | None, seed: int):
    """Per-node values of -log2 p(y) and -log2 p(y|s) plus the node weights,
    each of shape (K, m); weights of each row sum to 1/K."""
    means, labels, sigma2 = _channel_arrays(channel)
    K = means.size
    sigma = np.sqrt(sigma2)
    if engine == "monte-carlo":
        m = max(2, int(np.ceil(precision / K)))
        offsets = []
        for k in range(K):
            rng = np.random.default_rng([*np.atleast_1d(seed).tolist(), k])
            offsets.append(sigma / np.sqrt(2) * (rng.standard_normal(m) + 1j * rng.standard_normal(m)))
        offsets = np.array(offsets)
        weights = np.full((K, m), 1.0 / (K * m))
    elif engine == "quadrature":
        if precision < 1:
            raise ValueError("quadrature needs at least one node per axis")
        x, w = hermgauss(int(precision))
        z = (x[:, None] + 1j * x[None, :]).ravel()
        wz = (w[:, None] * w[None, :]).ravel() / np.pi
        offsets = np.broadcast_to(sigma * z, (K, z.size))
        weights = np.broadcast_to(wz / K, (K, z.size))
    else:
        raise ValueError(f"engine {engine!r} has no per-node form")
    joint = np.empty(offsets.shape)
    cond = np.empty(offsets.shape)
    for k in range(K):
        joint[k], cond[k] = _neg_log2_densities(means[k] + offsets[k], means, labels, sigma2, labels[k])
    return joint, cond, weights


def _reduce(values, weights, engine, n):
    value = float(np.sum(values * weights))
    if engine != "monte-carlo":
        return Estimate(value, 0.0, n, engine)
    K, m = values.shape
    # stratified estimator: per-component sample variances
    var = values.var(axis=1, ddof=1)
    stderr = float(np.sqrt(np.sum(var / m)) / K)
    return Estimate(value, stderr, K * m, engine)


def _oracle_entropies(channel, points_per_sigma: int):
    """h(Y) and the per-source h(Y | s) by the rectangle rule on a box."""
    means, labels, sigma2 = _channel_arrays(channel)
    sigma = np.sqrt(sigma2)
    half = np.max(np.abs(means)) + ORACLE_SPAN_SIGMAS * sigma
    step = sigma / points_per_sigma
    axis = np.arange(-half, half + step / 2, step)
    dA = step * step
    sources = np.unique(labels)
    log_norm = np.log(np.pi * sigma2)
    K = means.size
    h_joint = 0.0
    h_src = np.zeros(len(sources))
    rows = max(1, 2_000_000 // (axis.size * K))
    for i in range(0, axis.size, rows):
        y = (axis[i:i + rows, None] + 1j * axis[None, :]).ravel()
        ll = -np.abs(y[:, None] - means[None, :]) ** 2 / sigma2
        lp = logsumexp(ll, axis=1) - np.log(K) - log_norm
        h_joint -= np.sum(np.exp(lp) * lp)
        for j, s in enumerate(sources):
            sel = labels == s
            lps = logsumexp(ll[:, sel], axis=1) - np.log(sel.sum()) - log_norm
            h_src[j] -= np.sum(np.exp(lps) * lps)
    n = axis.size ** 2
    return h_joint * dA * LOG2E, h_src * dA * LOG2E, n


def mixture_entropy(channel, conditioning: str = "none", engine: str = "monte-carlo",
                    precision: int | None = None, seed: int = 0) -> Estimate:
    """Differential entropy of the channel output, bits.

    ``conditioning="on-source"`` gives h(Y | X_s), the average over source
    symbols of the entropy of that symbol's sub-mixture.
    """
    engine = resolve_engine(engine)
    if conditioning not in ("none", "on-source"):
        raise ValueError(f"conditioning must be 'none' or 'on-source', got {conditioning!r}")
    precision = DEFAULT_PRECISION[engine] if precision is None else int(precision)
    if engine == "grid-oracle":
        h_joint, h_src, n = _oracle_entropies(channel, precision)
        value = h_joint if conditioning == "none" else float(np.mean(h_src))
        return Estimate(float(value), 0.0, n, engine)
    joint, cond, weights = _engine_terms(channel, engine, precision, seed)
    return _reduce(joint if conditioning == "none" else cond, weights, engine, joint.size)


def mutual_information(channel, engine: str = "monte-carlo", precision: int | None = None,
                       seed: int = 0) -> Estimate:
    """I(X_s; Y) = h(Y) - h(Y | X_s), clamped to [0, log2 M].

    Monte Carlo uses the same draws for both entropies, so the standard
    error is that of the paired difference.
    """
    engine = resolve_engine(engine)
    precision = DEFAULT_PRECISION[engine] if precision is None else int(precision)
    n_sources = len(np.unique(np.asarray(channel.source_labels)))
    if engine == "grid-oracle":
        h_joint, h_src, n = _oracle_entropies(channel, precision)
        est = Estimate(float(h_joint - np.mean(h_src)), 0.0, n, engine)
    else:
        joint, cond, weights = _engine_terms(channel, engine, precision, seed)
        est = _reduce(joint - cond, weights, engine, joint.size)
    return est.clamp(0.0, np.log2(n_sources))


def mi_discrete_awgn(channel, engine: str = "monte-carlo", precision: int | None = None,
                     seed: int = 0) -> Estimate:
    """I(X_s; Y_d) for the destination's single-component-per-symbol channel."""
    return mutual_information(channel, engine, precision, seed)


def mi_destination(params: SystemParams, engine: str = "monte-carlo",
                   precision: int | None = None, seed: int = 0) -> Estimate:
    return mi_discrete_awgn(destination_channel(params), engine, precision, seed)


def mi_eavesdropper(params: SystemParams, engine: str = "monte-carlo",
                    precision: int | None = None, seed: int = 0) -> Estimate:
    return mutual_information(eavesdropper_channel(params), engine, precision, seed)
