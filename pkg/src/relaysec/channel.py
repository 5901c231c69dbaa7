"""Two-hop amplify-and-forward relay with a friendly jammer and an
eavesdropper co-located with the relay.

Multiple-access phase: source and destination (jammer) transmit to the
relay; the eavesdropper overhears. Broadcast phase: the relay forwards
alpha * Y1; destination and eavesdropper both receive it. All four noises
are circularly-symmetric complex Gaussian with total variance 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from relaysec.constellation import SumConstellation, psk_alphabet, superpose

COMBINING_MODES = ("weighted", "mrc")
BLOCK_SIZE = 1 << 16


class InvalidParamsError(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Link parameters. Powers are linear; ``theta`` in radians.

    Exactly one of ``relay_power`` / ``alpha_override`` is active. If both
    are left unset the relay power defaults to ``p1``.

    ``combining`` selects the eavesdropper's two-copy combiner: ``"weighted"``
    uses weights (alpha + 1, alpha), ``"mrc"`` the inverse-noise weights
    (1, alpha / (alpha^2 + 1)).
    """

    p1: float
    p2: float
    theta: float = 0.0
    order: int = 4
    relay_power: float | None = None
    alpha_override: float | None = None
    combining: str = "weighted"

    def __post_init__(self):
        if self.relay_power is None and self.alpha_override is None:
            object.__setattr__(self, "relay_power", float(self.p1))
        if self.relay_power is not None and self.alpha_override is not None:
            raise InvalidParamsError("set exactly one of relay_power and alpha_override")
        if self.p1 < 0 or self.p2 < 0:
            raise InvalidParamsError("powers must be nonnegative")
        if self.relay_power is not None and not self.relay_power > 0:
            raise InvalidParamsError(f"relay power must be positive, got {self.relay_power}")
        if self.alpha_override is not None and not self.alpha_override > 0:
            raise InvalidParamsError(f"alpha must be positive, got {self.alpha_override}")
        if int(self.order) != self.order or self.order < 2:
            raise InvalidParamsError(f"order must be an integer >= 2, got {self.order}")
        if self.combining not in COMBINING_MODES:
            raise InvalidParamsError(f"combining must be one of {COMBINING_MODES}")

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "SystemParams":
        """Equal source and jammer power P with 10*log10(P) = ``snr_db``."""
        p = 10.0 ** (snr_db / 10.0)
        return cls(p1=p, p2=p, **kw)

    def replace(self, **changes) -> "SystemParams":
        kw = dict(
            p1=self.p1, p2=self.p2, theta=self.theta, order=self.order,
            relay_power=self.relay_power, alpha_override=self.alpha_override,
            combining=self.combining,
        )
        if "relay_power" in changes and changes["relay_power"] is not None:
            kw["alpha_override"] = None
        if "alpha_override" in changes and changes["alpha_override"] is not None:
            kw["relay_power"] = None
        kw.update(changes)
        return SystemParams(**kw)


@dataclass(frozen=True)
class GaussianMixtureChannel:
    """Eavesdropper's combined observation: one of the M^2 sum points
    (uniform prior) plus complex Gaussian noise."""

    constellation: SumConstellation
    noise_variance: float

    def __post_init__(self):
        if self.constellation.points.size == 0:
            raise ValueError("empty mixture")
        if not self.noise_variance > 0:
            raise ValueError("noise variance must be positive")

    @property
    def means(self) -> np.ndarray:
        return self.constellation.points

    @property
    def source_labels(self) -> np.ndarray:
        return self.constellation.source_labels

    @property
    def order(self) -> int:
        return self.constellation.order


@dataclass(frozen=True)
class AwgnChannel:
    """Destination's observation after removing its own jamming signal."""

    means: np.ndarray
    noise_variance: float

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise ValueError("noise variance must be positive")

    @property
    def order(self) -> int:
        return len(self.means)

    @property
    def source_labels(self) -> np.ndarray:
        return np.arange(len(self.means))


def amplification_factor(params: SystemParams) -> float:
    """Relay gain alpha; under a power constraint E|alpha*Y1|^2 = Pr."""
    if params.alpha_override is not None:
        return float(params.alpha_override)
    return float(np.sqrt(params.relay_power / (params.p1 + params.p2 + 1.0)))


def weighted_noise_variance(alpha: float) -> float:
    a = alpha
    return (a**4 + 2 * a**2 + 2 * a + 1) / (a**2 + a + 1) ** 2


def mrc_noise_variance(alpha: float) -> float:
    return (alpha**2 + 1) / (2 * alpha**2 + 1)


def combining_weights(alpha: float, mode: str = "weighted") -> tuple[float, float]:
    """Weights on (Ye, Ye'), normalised so the signal gain is 1."""
    if mode == "weighted":
        w_direct, w_relay = alpha + 1.0, alpha
    elif mode == "mrc":
        w_direct, w_relay = 1.0, alpha / (alpha**2 + 1.0)
    else:
        raise InvalidParamsError(f"unknown combining mode {mode!r}")
    norm = w_direct + w_relay * alpha
    return w_direct / norm, w_relay / norm


def eavesdropper_noise_variance(alpha: float, mode: str = "weighted") -> float:
    if mode == "weighted":
        return weighted_noise_variance(alpha)
    if mode == "mrc":
        return mrc_noise_variance(alpha)
    raise InvalidParamsError(f"unknown combining mode {mode!r}")


def eavesdropper_channel(params: SystemParams) -> GaussianMixtureChannel:
    alpha = amplification_factor(params)
    sc = superpose(params.order, params.p1, params.p2, params.theta)
    return GaussianMixtureChannel(sc, eavesdropper_noise_variance(alpha, params.combining))


def destination_channel(params: SystemParams) -> AwgnChannel:
    alpha = amplification_factor(params)
    if alpha <= 0:
        raise InvalidParamsError("alpha must be positive")
    means = np.sqrt(params.p1) * psk_alphabet(params.order).points
    return AwgnChannel(means=means, noise_variance=1.0 + 1.0 / alpha**2)


@dataclass
class TwoPhaseSamples:
    """Per-sample signals of one simulation run (all arrays of length n)."""

    source_index: np.ndarray
    jammer_index: np.ndarray
    xs: np.ndarray
    xd: np.ndarray
    y1: np.ndarray
    ye: np.ndarray
    y1_relay: np.ndarray
    y2: np.ndarray
    ye_relay: np.ndarray
    ye_combined: np.ndarray
    yd: np.ndarray
    noise: np.ndarray = field(repr=False)  # shape (4, n): N1..N4
    alpha: float = 1.0

    def __len__(self) -> int:
        return len(self.xs)


def complex_noise(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def simulate_two_phase(params: SystemParams, n: int, seed: int) -> TwoPhaseSamples:
    """Sample-level simulation of both hops.

    Randomness is drawn per block of ``BLOCK_SIZE`` samples from a stream
    keyed by ``(seed, block)``, so results do not depend on chunking.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha = amplification_factor(params)
    M = params.order
    x = psk_alphabet(M).points
    rot = np.exp(1j * params.theta)

    s_idx = np.empty(n, dtype=np.int64)
    d_idx = np.empty(n, dtype=np.int64)
    noise = np.empty((4, n), dtype=complex)
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(n, start + BLOCK_SIZE)
        rng = np.random.default_rng([seed, b])
        # full blocks are always drawn so a run is a prefix of any longer run
        m = stop - start
        s_idx[start:stop] = rng.integers(0, M, BLOCK_SIZE)[:m]
        d_idx[start:stop] = rng.integers(0, M, BLOCK_SIZE)[:m]
        noise[:, start:stop] = complex_noise(rng, (4, BLOCK_SIZE))[:, :m]
    n1, n2, n3, n4 = noise

    xs = np.sqrt(params.p1) * x[s_idx]
    xd = np.sqrt(params.p2) * rot * x[d_idx]
    y1 = xs + xd + n1
    ye = xs + xd + n2
    y1_relay = alpha * y1
    y2 = y1_relay + n3
    ye_relay = y1_relay + n4
    w_direct, w_relay = combining_weights(alpha, params.combining)
    ye_combined = w_direct * ye + w_relay * ye_relay
    yd = (y2 - alpha * xd) / alpha
    return TwoPhaseSamples(
        source_index=s_idx, jammer_index=d_idx, xs=xs, xd=xd, y1=y1, ye=ye,
        y1_relay=y1_relay, y2=y2, ye_relay=ye_relay, ye_combined=ye_combined,
        yd=yd, noise=noise, alpha=alpha,
    )
