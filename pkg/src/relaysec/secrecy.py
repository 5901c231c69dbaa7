"""Secrecy rate, its Fano upper bound, and the high-SNR extremal-phase check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from relaysec.channel import SystemParams, destination_channel, eavesdropper_channel
from relaysec.constellation import DEFAULT_GRID_STEP, extremal_phases, min_distance, sum_constellation
from relaysec.detection import estimate_ser
from relaysec.info import Estimate, binary_entropy, mutual_information

DEFAULT_ENGINE = "quadrature"
HIGH_SNR_DB = 10.0


@dataclass(frozen=True)
class SecrecyPoint:
    theta: float
    snr_db: float
    i_destination: Estimate
    i_eavesdropper: Estimate
    secrecy_rate: Estimate
    p_e: Estimate
    upper_bound: Estimate
    d_min: float


def _seed(seed, stream: int) -> list[int]:
    return [*np.atleast_1d(seed).tolist(), stream]


def secrecy_rate_from_channels(dest, eve, engine: str = DEFAULT_ENGINE,
                               precision: int | None = None, seed=0) -> Estimate:
    i_d = mutual_information(dest, engine, precision, _seed(seed, 0))
    i_e = mutual_information(eve, engine, precision, _seed(seed, 1))
    return (i_d - i_e).clamp(0.0)


def secrecy_rate(params: SystemParams, engine: str = DEFAULT_ENGINE,
                 precision: int | None = None, seed=0) -> Estimate:
    """max(0, I(X_s; Y_d) - I(X_s; Ybar_e)); ``raw`` keeps the difference."""
    return secrecy_rate_from_channels(
        destination_channel(params), eavesdropper_channel(params), engine, precision, seed
    )


def _fano_term(p: float, order: int) -> float:
    return binary_entropy(p) + p * np.log2(order - 1) if order > 2 else binary_entropy(p)


def fano_upper_bound(params: SystemParams, p_e: Estimate, i_destination: Estimate) -> Estimate:
    """H(p_e) + p_e*log2(M-1) - H(X_s | Y_d), clamped at zero.

    H(X_s | Y_d) = log2 M - I(X_s; Y_d) for the uniform source. The p_e
    uncertainty is propagated with a one-step finite difference (the
    derivative is unbounded at p_e = 0).
    """
    p = p_e.unclamped
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p_e outside [0, 1]: {p}")
    M = params.order
    f = _fano_term(p, M)
    raw = f - (np.log2(M) - i_destination.unclamped)
    se = p_e.stderr
    df = max(abs(_fano_term(min(p + se, 1.0), M) - f), abs(f - _fano_term(max(p - se, 0.0), M)))
    stderr = float(np.hypot(df, i_destination.stderr))
    return Estimate(float(raw), stderr, p_e.n, "fano").clamp(0.0)


def combined_stderr(*estimates: Estimate) -> float:
    return float(np.sqrt(sum(e.stderr ** 2 for e in estimates)))


def evaluate_point(params: SystemParams, engine: str = DEFAULT_ENGINE, precision: int | None = None,
                   trials: int = 100_000, seed=0, detector: str = "marginal") -> SecrecyPoint:
    i_d = mutual_information(destination_channel(params), engine, precision, _seed(seed, 0))
    i_e = mutual_information(eavesdropper_channel(params), engine, precision, _seed(seed, 1))
    ser = estimate_ser(params, trials, _seed(seed, 2), detector)
    snr_db = 10 * np.log10(params.p1) if params.p1 > 0 else -np.inf
    return SecrecyPoint(
        theta=params.theta,
        snr_db=float(snr_db),
        i_destination=i_d,
        i_eavesdropper=i_e,
        secrecy_rate=(i_d - i_e).clamp(0.0),
        p_e=ser.p_e,
        upper_bound=fano_upper_bound(params, ser.p_e, i_d),
        d_min=min_distance(sum_constellation(params)),
    )


def _circular_gap(a: float, b: float, period: float) -> float:
    d = (a - b) % period
    return min(d, period - d)


def _near_any(theta: float, targets, period: float, tol: float) -> bool:
    return any(_circular_gap(theta, t, period) <= tol for t in targets)


@dataclass
class PropositionReport:
    snr_db: float
    argmax_theta: float
    argmin_theta: float
    theta_h: float
    theta_l: float
    grid_step: float
    passed: bool
    high_snr: bool
    thetas: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)


def proposition_check(params_base: SystemParams, snr_db: float, theta_grid,
                      engine: str = DEFAULT_ENGINE, precision: int | None = None,
                      seed=0) -> PropositionReport:
    """Does the secrecy rate peak at theta_h and bottom out at theta_l?

    Both extremizers are matched modulo the 2*pi/M period and up to the
    reflection theta -> -theta, within one grid step. The claim concerns
    the high-SNR region; lower SNR values are evaluated anyway and flagged.
    """
    thetas = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    if thetas.size == 0:
        raise ValueError("theta grid is empty")
    p = 10.0 ** (snr_db / 10.0)
    base = params_base.replace(p1=p, p2=p)
    rates = np.array([
        secrecy_rate(base.replace(theta=float(t)), engine, precision, _seed(seed, i)).unclamped
        for i, t in enumerate(thetas)
    ])
    theta_h, theta_l = extremal_phases(base, DEFAULT_GRID_STEP)
    period = 2 * np.pi / base.order
    if thetas.size > 1:
        step = float(np.min(np.diff(np.sort(thetas))))
    else:
        step = DEFAULT_GRID_STEP
    tol = step * (1 + 1e-9)
    arg_max = float(thetas[int(np.argmax(rates))])
    arg_min = float(thetas[int(np.argmin(rates))])
    ok_max = _near_any(arg_max, (theta_h, -theta_h), period, tol)
    ok_min = _near_any(arg_min, (theta_l, -theta_l), period, tol)
    passed = ok_max if thetas.size == 1 else (ok_max and ok_min)
    return PropositionReport(
        snr_db=float(snr_db), argmax_theta=arg_max, argmin_theta=arg_min,
        theta_h=theta_h, theta_l=theta_l, grid_step=step, passed=bool(passed),
        high_snr=snr_db >= HIGH_SNR_DB, thetas=thetas, rates=rates,
    )
