"""M-PSK alphabets, the superposed source+jammer constellation and its
source-distinguishing minimum distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from relaysec.channel import SystemParams

# distances below this are treated as coincident points
COINCIDENT_TOL = 1e-12
# relative tolerance when comparing d_min values across a phase grid
_TIE_TOL = 1e-12
DEFAULT_GRID_STEP = np.pi / 1800


class InvalidOrderError(ValueError):
    pass


@dataclass(frozen=True)
class PskConstellation:
    order: int
    points: np.ndarray

    def __len__(self) -> int:
        return self.order


@dataclass(frozen=True)
class SumConstellation:
    """All M^2 points sqrt(p1)*x_s + sqrt(p2)*exp(i*theta)*x_d.

    ``points[k]`` carries the label ``labels[k] = (s, d)``; ordering is
    source-major, so ``k = s * M + d``.
    """

    points: np.ndarray
    labels: np.ndarray
    theta: float
    p1: float
    p2: float
    order: int

    @property
    def source_labels(self) -> np.ndarray:
        return self.labels[:, 0]

    def as_grid(self) -> np.ndarray:
        """Points reshaped to ``[source, jammer]``."""
        return self.points.reshape(self.order, self.order)


def psk_alphabet(order: int) -> PskConstellation:
    if int(order) != order or order < 2:
        raise InvalidOrderError(f"modulation order must be an integer >= 2, got {order!r}")
    order = int(order)
    phase = 2 * np.pi * np.arange(order) / order
    re, im = np.cos(phase), np.sin(phase)
    # cos(pi/2) etc. come out as ~6e-17; snap so symmetric points coincide exactly
    re[np.abs(re) < 1e-15] = 0.0
    im[np.abs(im) < 1e-15] = 0.0
    return PskConstellation(order=order, points=re + 1j * im)


def _rotation(theta: float) -> complex:
    c, s = np.cos(theta), np.sin(theta)
    c = 0.0 if abs(c) < 1e-15 else c
    s = 0.0 if abs(s) < 1e-15 else s
    return complex(c, s)


def superpose(order: int, p1: float, p2: float, theta: float) -> SumConstellation:
    if p1 < 0 or p2 < 0:
        raise ValueError("powers must be nonnegative")
    x = psk_alphabet(order).points
    grid = np.sqrt(p1) * x[:, None] + np.sqrt(p2) * _rotation(theta) * x[None, :]
    s_idx, d_idx = np.meshgrid(np.arange(order), np.arange(order), indexing="ij")
    labels = np.stack([s_idx.ravel(), d_idx.ravel()], axis=1)
    return SumConstellation(
        points=grid.ravel(), labels=labels, theta=float(theta),
        p1=float(p1), p2=float(p2), order=order,
    )


def sum_constellation(params: SystemParams) -> SumConstellation:
    return superpose(params.order, params.p1, params.p2, params.theta)


def _pairwise_min(points: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Min distance over source-differing pairs; ``points`` may carry leading
    batch dimensions."""
    diff = np.abs(points[..., :, None] - points[..., None, :])
    diff = np.where(sources[:, None] != sources[None, :], diff, np.inf)
    d = diff.min(axis=(-2, -1))
    return np.where(d < COINCIDENT_TOL, 0.0, d)


def min_distance(sc: SumConstellation) -> float:
    """Minimum distance between points carrying different source symbols.

    Pairs that share a source index are ignored: they do not confuse a
    detector of the source symbol. Coincident points give exactly 0.
    """
    return float(_pairwise_min(sc.points, sc.source_labels))


def min_distance_profile(order: int, p1: float, p2: float, thetas) -> np.ndarray:
    """Vectorised ``min_distance`` over an array of phase differences."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    x = psk_alphabet(order).points
    rot = np.array([_rotation(t) for t in thetas])
    grid = (np.sqrt(p1) * x[None, :, None]
            + np.sqrt(p2) * rot[:, None, None] * x[None, None, :])
    sources = np.repeat(np.arange(order), order)
    out = np.empty(len(thetas))
    # chunk so the (T, K, K) distance tensor stays small for large M
    chunk = max(1, 2_000_000 // (order ** 4))
    for i in range(0, len(thetas), chunk):
        out[i:i + chunk] = _pairwise_min(grid[i:i + chunk].reshape(-1, order * order), sources)
    return out


def extremal_phases(params: SystemParams, grid_step: float = DEFAULT_GRID_STEP) -> tuple[float, float]:
    """Grid search of d_min(theta) over one period [0, 2*pi/M).

    Returns ``(theta_h, theta_l)``: the phases minimising and maximising
    d_min. Ties go to the smallest theta.
    """
    if not (0 < grid_step <= np.pi / 180 + 1e-15):
        raise ValueError(f"grid_step must lie in (0, pi/180], got {grid_step!r}")
    thetas = phase_grid(params.order, grid_step)
    d = min_distance_profile(params.order, params.p1, params.p2, thetas)
    scale = max(1.0, float(np.max(d)))
    theta_h = thetas[np.flatnonzero(d <= d.min() + _TIE_TOL * scale)[0]]
    theta_l = thetas[np.flatnonzero(d >= d.max() - _TIE_TOL * scale)[0]]
    return float(theta_h), float(theta_l)


def phase_grid(order: int, grid_step: float) -> np.ndarray:
    period = 2 * np.pi / order
    n = int(np.floor(period / grid_step + 1e-9))
    # drop a final point that lands on the period itself
    thetas = np.arange(n + 1) * grid_step
    return thetas[thetas < period - 1e-12]
