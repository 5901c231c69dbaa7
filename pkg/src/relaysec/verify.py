"""Desk-scale invariant checks for every module, run by ``relaysec verify``.

Each check reports a measured quantity against a threshold. The list is
fixed (see ``CHECKS``) so reports always have the same rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from relaysec.channel import (
    AwgnChannel,
    SystemParams,
    destination_channel,
    eavesdropper_channel,
    weighted_noise_variance,
    simulate_two_phase,
)
from relaysec.config import ExperimentConfig
from relaysec.constellation import (
    DEFAULT_GRID_STEP,
    extremal_phases,
    min_distance,
    min_distance_profile,
    phase_grid,
    psk_alphabet,
    superpose,
)
from relaysec.detection import estimate_ser, ml_detect_batch
from relaysec.info import Estimate, gaussian_entropy, mixture_entropy, mutual_information
from relaysec.secrecy import combined_stderr, evaluate_point, fano_upper_bound, proposition_check

ACCEPTANCE_SNR_DB = (5.0, 10.0, 20.0)
ACCEPTANCE_THETAS = (0.0, np.pi / 6, np.pi / 4)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34s} measured={self.measured:.6g} {self.relation} {self.threshold:.6g}"


def _le(name, measured, threshold):
    return CheckResult(name, float(measured), float(threshold), bool(measured <= threshold), "<=")


def _ge(name, measured, threshold):
    return CheckResult(name, float(measured), float(threshold), bool(measured >= threshold), ">=")


def _params(snr_db, theta=0.0, order=4, alpha=1.0):
    return SystemParams.from_snr_db(snr_db, theta=theta, order=order, alpha_override=alpha)


def brute_force_min_distance(points, sources) -> float:
    best = np.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if sources[i] != sources[j]:
                best = min(best, abs(points[i] - points[j]))
    return 0.0 if best < 1e-12 else float(best)


# -- constellation -------------------------------------------------------------

def check_psk_unit_circle(cfg):
    worst = max(np.max(np.abs(np.abs(psk_alphabet(M).points) - 1)) for M in range(2, 17))
    return _le("psk_unit_magnitude", worst, 1e-12)


def check_psk_zero_mean(cfg):
    worst = max(abs(psk_alphabet(M).points.sum()) for M in range(2, 17))
    return _le("psk_zero_mean", worst, 1e-12)


def check_dmin_period(cfg):
    M = cfg.order
    th = np.linspace(0, 2 * np.pi, 181)
    diff = np.abs(min_distance_profile(M, 1, 1, th) - min_distance_profile(M, 1, 1, th + 2 * np.pi / M))
    return _le("dmin_period_2pi_over_M", diff.max(), 1e-12)


def check_dmin_reflection(cfg):
    th = np.linspace(0, 2 * np.pi, 181)
    diff = np.abs(min_distance_profile(cfg.order, 1, 1, th) - min_distance_profile(cfg.order, 1, 1, -th))
    return _le("dmin_reflection", diff.max(), 1e-12)


def check_dmin_no_jammer(cfg):
    worst = max(abs(min_distance(superpose(M, 2.0, 0.0, 0.3)) - 2 * np.sqrt(2.0) * np.sin(np.pi / M))
                for M in range(2, 9))
    return _le("dmin_without_jammer", worst, 1e-12)


def check_dmin_brute_force(cfg):
    rng = np.random.default_rng([cfg.seed, 101])
    worst = 0.0
    for M in (2, 3, 4):
        for th in rng.uniform(0, 2 * np.pi, 8):
            sc = superpose(M, 1.0, rng.uniform(0, 2), th)
            worst = max(worst, abs(min_distance(sc) - brute_force_min_distance(sc.points, sc.source_labels)))
    return _le("dmin_matches_brute_force", worst, 1e-12)


def check_extremal_half_period(cfg):
    M = cfg.order
    full = min_distance_profile(M, 1, 1, phase_grid(M, DEFAULT_GRID_STEP))
    half_grid = np.arange(int(round(np.pi / M / DEFAULT_GRID_STEP)) + 1) * DEFAULT_GRID_STEP
    half = min_distance_profile(M, 1, 1, half_grid)
    gap = max(abs(full.min() - half.min()), abs(full.max() - half.max()))
    return _le("extremal_half_period", gap, 1e-12)


def check_extremal_qpsk(cfg):
    th_h, th_l = extremal_phases(SystemParams(1, 1, order=4, alpha_override=1.0), DEFAULT_GRID_STEP)
    err = max(abs(th_h), min(abs(th_l - np.pi / 6), abs(th_l - np.pi / 3)))
    return _le("extremal_phases_qpsk_deg", np.degrees(err), 0.1)


# -- channel model -------------------------------------------------------------

def check_weighted_variance_range(cfg):
    v = np.array([weighted_noise_variance(a) for a in np.logspace(-3, 3, 61)])
    # distance outside (0, 1]; zero when every value is inside
    outside = max(v.max() - 1.0, 0.0) + (np.inf if v.min() <= 0 else 0.0)
    return _le("weighted_variance_outside_unit_interval", outside, 0.0)


def _variance_z(samples, target):
    v = np.abs(samples) ** 2
    return abs(v.mean() - target) / (v.std(ddof=1) / np.sqrt(v.size))


def check_sim_eve_variance(cfg):
    z = max(_variance_z((s := simulate_two_phase(_params(10, alpha=a), 100_000, cfg.seed)).ye_combined
                        - s.xs - s.xd, weighted_noise_variance(a)) for a in (0.5, 1.0, 2.0))
    return _le("sim_eavesdropper_variance_z", z, 4.0)


def check_sim_dest_variance(cfg):
    z = max(_variance_z((s := simulate_two_phase(_params(10, alpha=a), 100_000, cfg.seed)).yd - s.xs,
                        1 + 1 / a**2) for a in (0.5, 1.0, 2.0))
    return _le("sim_destination_variance_z", z, 4.0)


def check_relay_power(cfg):
    p = SystemParams(p1=2.0, p2=1.0, relay_power=5.0)
    s = simulate_two_phase(p, 100_000, cfg.seed)
    return _le("relay_output_power_z", _variance_z(s.y1_relay, 5.0), 4.0)


def check_noise_uncorrelated(cfg):
    s = simulate_two_phase(_params(10), 100_000, cfg.seed)
    c = np.abs(np.corrcoef(s.noise))
    np.fill_diagonal(c, 0)
    return _le("noise_cross_correlation", c.max(), 4 / np.sqrt(len(s)))


def check_sim_deterministic(cfg):
    a = simulate_two_phase(_params(10, 0.3), 5000, cfg.seed)
    b = simulate_two_phase(_params(10, 0.3), 5000, cfg.seed)
    same = all(np.array_equal(getattr(a, f), getattr(b, f)) for f in ("ye_combined", "yd", "noise"))
    return _le("simulator_reproducible_mismatch", 0.0 if same else 1.0, 0.0)


# -- information measures ------------------------------------------------------

def _acceptance_params(cfg):
    for snr, th in itertools.product(ACCEPTANCE_SNR_DB, ACCEPTANCE_THETAS):
        yield _params(snr, th, cfg.order)


def check_mi_range(cfg):
    worst = 0.0
    for i, p in enumerate(_acceptance_params(cfg)):
        for ch in (destination_channel(p), eavesdropper_channel(p)):
            est = mutual_information(ch, "monte-carlo", 20_000, [cfg.seed, i])
            over = max(-est.unclamped, est.unclamped - np.log2(p.order), 0.0)
            worst = max(worst, over / max(3 * est.stderr, 1e-12))
    return _le("mi_range_violation_over_3se", worst, 1.0)


def _entropies(cfg, p, i):
    ch = eavesdropper_channel(p)
    h = mixture_entropy(ch, "none", "monte-carlo", 20_000, [cfg.seed, i])
    hc = mixture_entropy(ch, "on-source", "monte-carlo", 20_000, [cfg.seed, i])
    return ch, h, hc


def check_conditioning_reduces(cfg):
    worst = -np.inf
    for i, p in enumerate(_acceptance_params(cfg)):
        _, h, hc = _entropies(cfg, p, i)
        worst = max(worst, (hc.value - h.value) - 3 * combined_stderr(h, hc))
    return _le("conditional_minus_joint_entropy", worst, 0.0)


def check_component_floor(cfg):
    worst = -np.inf
    for i, p in enumerate(_acceptance_params(cfg)):
        ch, _, hc = _entropies(cfg, p, i)
        worst = max(worst, gaussian_entropy(ch.noise_variance) - hc.value - 3 * hc.stderr)
    return _le("noise_entropy_minus_conditional", worst, 0.0)


def check_entropy_cap(cfg):
    worst = -np.inf
    for i, p in enumerate(_acceptance_params(cfg)):
        ch, h, _ = _entropies(cfg, p, i)
        cap = 2 * np.log2(p.order) + gaussian_entropy(ch.noise_variance)
        worst = max(worst, h.value - cap - 3 * h.stderr)
    return _le("output_entropy_minus_cap", worst, 0.0)


def check_engine_agreement(cfg):
    worst = 0.0
    for M in (2, 4):
        for i, (snr, th) in enumerate(itertools.product(ACCEPTANCE_SNR_DB, ACCEPTANCE_THETAS)):
            p = _params(snr, th, M)
            for ch in (destination_channel(p), eavesdropper_channel(p)):
                ref = mutual_information(ch, "grid-oracle", cfg.oracle_points).unclamped
                quad = mutual_information(ch, "quadrature", cfg.nodes).unclamped
                mc = mutual_information(ch, "monte-carlo", 20_000, [cfg.seed, i])
                worst = max(worst, abs(quad - ref) / 0.02,
                            abs(mc.unclamped - ref) / max(0.02, 3 * mc.stderr))
    return _le("engine_disagreement_over_tolerance", worst, 1.0)


def check_awgn_monotone(cfg):
    means = psk_alphabet(cfg.order).points
    values = [mutual_information(AwgnChannel(means, v), "quadrature", cfg.nodes).unclamped
              for v in np.logspace(-1, 1.5, 10)]
    return _le("awgn_mi_max_increase", np.max(np.diff(values)), 0.0)


def check_mc_stderr_scaling(cfg):
    ch = eavesdropper_channel(_params(5, np.pi / 4, cfg.order))
    a = mutual_information(ch, "monte-carlo", 20_000, [cfg.seed, 1]).stderr
    b = mutual_information(ch, "monte-carlo", 40_000, [cfg.seed, 2]).stderr
    return _le("mc_stderr_ratio_deviation", abs(a / b / np.sqrt(2) - 1), 0.2)


def _rotate_mixture(channel, rot):
    sc = replace(channel.constellation, points=channel.means * rot)
    return replace(channel, constellation=sc)


# -- detection -------------------------------------------------------------------

def check_ml_matches_naive(cfg):
    rng = np.random.default_rng([cfg.seed, 202])
    mismatches = 0
    for th in (0.3, np.pi / 6, 1.0):
        ch = eavesdropper_channel(_params(3, th, cfg.order))
        y = ch.means[rng.integers(0, ch.means.size, 2000)] + rng.normal(size=2000) + 1j * rng.normal(size=2000)
        lik = np.exp(-np.abs(y[:, None] - ch.means[None, :]) ** 2 / ch.noise_variance)
        naive = lik.reshape(len(y), ch.order, -1).sum(axis=2).argmax(axis=1)
        mismatches += int(np.count_nonzero(naive != ml_detect_batch(y, ch)))
    return _le("ml_naive_mismatches", mismatches, 0)


def check_ser_rotation(cfg):
    ch = eavesdropper_channel(_params(10, 0.4, cfg.order))
    rng = np.random.default_rng([cfg.seed, 303])
    y = ch.means[rng.integers(0, ch.means.size, 5000)] + rng.normal(size=5000) + 1j * rng.normal(size=5000)
    rot = np.exp(0.7j)
    rotated = _rotate_mixture(ch, rot)
    diff = np.count_nonzero(ml_detect_batch(y, ch) != ml_detect_batch(y * rot, rotated))
    return _le("ser_rotation_decision_changes", diff, 0)


def check_ser_period(cfg):
    worst = 0.0
    period = 2 * np.pi / cfg.order
    for i, th in enumerate(np.linspace(0, period, 4, endpoint=False)):
        a = estimate_ser(_params(20, th, cfg.order), 20_000, [cfg.seed, i, 0]).p_e
        b = estimate_ser(_params(20, th + period, cfg.order), 20_000, [cfg.seed, i, 1]).p_e
        worst = max(worst, abs(a.value - b.value) / combined_stderr(a, b))
    return _le("ser_period_z", worst, 4.0)


def check_ser_floor(cfg):
    if cfg.order != 4:
        return _le("ser_high_snr_floor_z", 0.0, 4.0)
    pe = estimate_ser(_params(30, 0.0, 4), 100_000, [cfg.seed, 404]).p_e
    return _le("ser_high_snr_floor_z", abs(pe.value - 7 / 16) / pe.stderr, 4.0)


def check_ser_deterministic(cfg):
    a = estimate_ser(_params(10, 0.2, cfg.order), 5000, cfg.seed).p_e.value
    b = estimate_ser(_params(10, 0.2, cfg.order), 5000, cfg.seed).p_e.value
    return _le("ser_reproducible_mismatch", abs(a - b), 0.0)


# -- secrecy -------------------------------------------------------------------

def _points(cfg, snr_db, thetas, trials=20_000):
    return [evaluate_point(_params(snr_db, th, cfg.order), "quadrature", cfg.nodes, trials,
                           [cfg.seed, int(snr_db), i]) for i, th in enumerate(thetas)]


def check_bound_dominance(cfg):
    worst = -np.inf
    for snr in (10.0, 20.0):
        for pt in _points(cfg, snr, np.radians(np.arange(0, 91, 15))):
            gap = pt.secrecy_rate.unclamped - pt.upper_bound.unclamped
            worst = max(worst, gap - 3 * combined_stderr(pt.secrecy_rate, pt.upper_bound))
    return _le("rate_minus_bound_minus_3se", worst, 0.0)


def check_fano_monotone(cfg):
    M = cfg.order
    p = SystemParams(1, 1, order=M, alpha_override=1.0)
    i_d = Estimate(1.0)
    vals = [fano_upper_bound(p, Estimate(q), i_d).unclamped for q in np.linspace(0, (M - 1) / M, 100)]
    return _ge("fano_min_increment", np.min(np.diff(vals)), 0.0)


def check_secrecy_period(cfg):
    worst = 0.0
    period = 2 * np.pi / cfg.order
    for i, th in enumerate((0.1, 0.5)):
        a = evaluate_point(_params(10, th, cfg.order), "quadrature", cfg.nodes, 20_000, [cfg.seed, i])
        b = evaluate_point(_params(10, th + period, cfg.order), "quadrature", cfg.nodes, 20_000, [cfg.seed, i, 1])
        for fa, fb in ((a.secrecy_rate, b.secrecy_rate), (a.p_e, b.p_e), (a.upper_bound, b.upper_bound)):
            se = combined_stderr(fa, fb)
            worst = max(worst, abs(fa.unclamped - fb.unclamped) / se if se > 0 else
                        (0.0 if abs(fa.unclamped - fb.unclamped) < 1e-9 else np.inf))
    return _le("secrecy_period_z", worst, 4.0)


def check_rate_rotation(cfg):
    p = _params(10, 0.4, cfg.order)
    d, e = destination_channel(p), eavesdropper_channel(p)
    rot = np.exp(1.1j)
    rd = AwgnChannel(d.means * rot, d.noise_variance)
    e_rot = _rotate_mixture(e, rot)
    base = (mutual_information(d, "quadrature", cfg.nodes).unclamped
            - mutual_information(e, "quadrature", cfg.nodes).unclamped)
    turned = (mutual_information(rd, "quadrature", cfg.nodes).unclamped
              - mutual_information(e_rot, "quadrature", cfg.nodes).unclamped)
    # the Gauss-Hermite lattice is axis-aligned, so rotation is exact only up to quadrature error
    return _le("raw_rate_rotation_change", abs(base - turned), 1e-4)


def check_proposition(cfg):
    if cfg.order != 4:
        return _le("proposition_10db_failures", 0, 0)
    rep = proposition_check(_params(10), 10.0, np.radians(np.arange(0, 91, 5)), "quadrature", cfg.nodes)
    return _le("proposition_10db_failures", 0 if rep.passed else 1, 0)


CHECKS = (
    check_psk_unit_circle, check_psk_zero_mean, check_dmin_period, check_dmin_reflection,
    check_dmin_no_jammer, check_dmin_brute_force, check_extremal_half_period, check_extremal_qpsk,
    check_weighted_variance_range, check_sim_eve_variance, check_sim_dest_variance, check_relay_power,
    check_noise_uncorrelated, check_sim_deterministic,
    check_mi_range, check_conditioning_reduces, check_component_floor, check_entropy_cap,
    check_engine_agreement, check_awgn_monotone, check_mc_stderr_scaling,
    check_ml_matches_naive, check_ser_rotation, check_ser_period, check_ser_floor,
    check_ser_deterministic,
    check_bound_dominance, check_fano_monotone, check_secrecy_period, check_rate_rotation,
    check_proposition,
)


def run_checks(cfg: ExperimentConfig | None = None) -> list[CheckResult]:
    cfg = cfg or ExperimentConfig()
    results = []
    for check in CHECKS:
        try:
            results.append(check(cfg))
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(f"{check.__name__}: {type(exc).__name__}: {exc}", np.nan, np.nan, False))
    return results


def format_report(results: list[CheckResult]) -> str:
    n_fail = sum(not r.passed for r in results)
    lines = [r.line() for r in results]
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
