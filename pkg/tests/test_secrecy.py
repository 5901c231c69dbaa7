from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relaysec.channel import AwgnChannel, GaussianMixtureChannel, SystemParams
from relaysec.constellation import superpose
from relaysec.info import Estimate, binary_entropy
from relaysec.secrecy import (
    combined_stderr,
    evaluate_point,
    fano_upper_bound,
    proposition_check,
    secrecy_rate,
    secrecy_rate_from_channels,
)

from conftest import qpsk

QPSK = SystemParams(1, 1, order=4, alpha_override=1)


class TestSecrecyRate:
    @pytest.mark.parametrize("engine", ["quadrature", "monte-carlo"])
    def test_no_source(self, engine):
        r = secrecy_rate(SystemParams(0, 1, 0.2, 4, alpha_override=1), engine, seed=1)
        assert r.value == pytest.approx(0.0, abs=3 * r.stderr + 1e-9)

    def test_identical_channels(self):
        dest = AwgnChannel(np.sqrt(3.0) * np.array([1, 1j, -1, -1j]), 2.0)
        eve = GaussianMixtureChannel(superpose(4, 3.0, 0.0, 0.0), 2.0)
        r = secrecy_rate_from_channels(dest, eve, "monte-carlo", 40_000, seed=2)
        assert abs(r.unclamped) <= 3 * r.stderr + 1e-9

    def test_theta_h_beats_theta_l_at_10db(self):
        hi = secrecy_rate(qpsk(10.0, 0.0), "monte-carlo", 100_000, seed=3)
        lo = secrecy_rate(qpsk(10.0, np.pi / 6), "monte-carlo", 100_000, seed=4)
        assert hi.value - lo.value > 3 * combined_stderr(hi, lo)

    def test_raw_is_kept(self):
        # a weak relay gain leaves the destination noisier than the eavesdropper
        r = secrecy_rate(qpsk(10.0, np.pi / 6, alpha=0.2), "quadrature")
        assert r.value == 0.0 and r.raw < -0.1

    def test_rotation_invariance_of_raw_rate(self):
        a = secrecy_rate(qpsk(10.0, 0.4), "grid-oracle").unclamped
        rot = np.exp(0.8j)
        p = qpsk(10.0, 0.4)
        dest = AwgnChannel(np.sqrt(p.p1) * np.array([1, 1j, -1, -1j]) * rot, 2.0)
        sc = superpose(4, p.p1, p.p2, 0.4)
        eve = GaussianMixtureChannel(replace(sc, points=sc.points * rot), 2 / 3)
        b = secrecy_rate_from_channels(dest, eve, "grid-oracle").unclamped
        assert a == pytest.approx(b, abs=1e-6)


class TestFanoBound:
    def test_perfect_case(self):
        b = fano_upper_bound(QPSK, Estimate(0.0), Estimate(2.0))
        assert b.value == 0.0

    def test_high_snr_theta_zero(self):
        b = fano_upper_bound(QPSK, Estimate(7 / 16), Estimate(2.0))
        assert b.value == pytest.approx(binary_entropy(7 / 16) + 7 / 16 * np.log2(3))
        assert b.value == pytest.approx(1.682, abs=1e-3)

    def test_invalid_probability(self):
        with pytest.raises(ValueError):
            fano_upper_bound(QPSK, Estimate(1.2), Estimate(1.0))

    def test_monotone_in_pe(self):
        vals = [fano_upper_bound(QPSK, Estimate(p), Estimate(1.0)).unclamped for p in np.linspace(0, 0.75, 100)]
        assert np.all(np.diff(vals) > 0)

    @given(p=st.floats(0.001, 0.999), se=st.floats(0, 0.01))
    def test_delta_method(self, p, se):
        b = fano_upper_bound(QPSK, Estimate(p, se), Estimate(1.5, 0.0))
        slope = abs(np.log2((1 - p) / p) + np.log2(3))
        # finite-difference spread is close to |f'(p)| * se for small se
        assert b.stderr == pytest.approx(slope * se, rel=0.5, abs=se * 20)

    def test_binary_order(self):
        b = fano_upper_bound(SystemParams(1, 1, order=2, alpha_override=1), Estimate(0.25), Estimate(1.0))
        assert b.unclamped == pytest.approx(binary_entropy(0.25))

    @pytest.mark.parametrize("snr_db", [10.0, 20.0])
    def test_dominates_rate(self, snr_db):
        for i, th in enumerate(np.radians([0, 5, 15, 30, 45])):
            pt = evaluate_point(qpsk(snr_db, th), trials=50_000, seed=[5, i])
            slack = 3 * combined_stderr(pt.secrecy_rate, pt.upper_bound)
            assert pt.secrecy_rate.unclamped <= pt.upper_bound.unclamped + slack


class TestSecrecyPoint:
    def test_fields(self):
        pt = evaluate_point(qpsk(10.0, 0.0), trials=5_000, seed=6)
        assert pt.d_min == 0.0 and pt.snr_db == pytest.approx(10.0)
        assert pt.secrecy_rate.value >= 0 and pt.upper_bound.value >= 0
        assert pt.secrecy_rate.unclamped == pytest.approx(
            pt.i_destination.unclamped - pt.i_eavesdropper.unclamped)

    def test_period(self):
        a = evaluate_point(qpsk(10.0, 0.3), trials=50_000, seed=7)
        b = evaluate_point(qpsk(10.0, 0.3 + np.pi / 2), trials=50_000, seed=8)
        assert a.secrecy_rate.value == pytest.approx(b.secrecy_rate.value, abs=1e-6)
        assert abs(a.p_e.value - b.p_e.value) <= 4 * combined_stderr(a.p_e, b.p_e)


class TestProposition:
    GRID = np.radians(np.arange(0, 91, 5))

    def test_holds_at_10db(self):
        rep = proposition_check(QPSK, 10.0, self.GRID)
        assert rep.passed and rep.high_snr
        assert rep.argmax_theta == pytest.approx(0.0)
        assert min(abs(rep.argmin_theta - np.pi / 6), abs(rep.argmin_theta - np.pi / 3)) <= np.radians(5)

    def test_fails_at_5db(self):
        rep = proposition_check(QPSK, 5.0, self.GRID)
        assert not rep.passed and not rep.high_snr
        assert rep.argmin_theta == pytest.approx(np.pi / 4, abs=np.radians(5))

    def test_single_point_grid(self):
        assert proposition_check(QPSK, 10.0, [0.0]).passed
        assert not proposition_check(QPSK, 10.0, [np.pi / 6]).passed

    def test_period_images_accepted(self):
        grid = np.radians(np.arange(90, 181, 5))
        assert proposition_check(QPSK, 10.0, grid).passed
