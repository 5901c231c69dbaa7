import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from relaysec.channel import AwgnChannel, SystemParams, eavesdropper_channel
from relaysec.constellation import psk_alphabet
from relaysec.info import (
    Estimate,
    binary_entropy,
    gaussian_entropy,
    mi_discrete_awgn,
    mi_eavesdropper,
    mixture_entropy,
    mutual_information,
    resolve_engine,
)

from conftest import qpsk

# Reference values from scipy.integrate.dblquad of -p log2 p over a box
# (max|mean| + 6 sigma), with the mixture density written out by hand.
AWGN_QPSK_P1_VAR2 = 0.5809602267216967          # I(X;Y), M=4, P1=1, variance 2
H_BPSK_PAIR_PI_4 = 4.094890879101072            # h(Ye), M=2, P1=P2=1, theta=pi/4, alpha=1
I_EVE_QPSK_THETA0 = 0.7012131486503046          # I(Xs;Ye), M=4, P1=P2=1, theta=0, alpha=1

ENGINES = ("monte-carlo", "quadrature", "grid-oracle")


def _dblquad_entropy(means, sigma2, half):
    means = np.asarray(means)

    def f(b, a):
        p = np.mean(np.exp(-np.abs(a + 1j * b - means) ** 2 / sigma2)) / (np.pi * sigma2)
        return -p * np.log2(p) if p > 0 else 0.0

    return integrate.dblquad(f, -half, half, -half, half, epsabs=1e-9, epsrel=1e-9)[0]


def qpsk_awgn(p1=1.0, variance=2.0):
    return AwgnChannel(np.sqrt(p1) * psk_alphabet(4).points, variance)


class TestBinaryEntropy:
    @pytest.mark.parametrize("p, expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)])
    def test_known(self, p, expected):
        assert binary_entropy(p) == pytest.approx(expected)

    def test_seven_sixteenths(self):
        p = 7 / 16
        assert binary_entropy(p) == pytest.approx(-p * np.log2(p) - (1 - p) * np.log2(1 - p))
        assert binary_entropy(p) == pytest.approx(0.9887, abs=1e-4)

    @pytest.mark.parametrize("p", [-0.1, 1.1])
    def test_out_of_range(self, p):
        with pytest.raises(ValueError):
            binary_entropy(p)

    @given(st.floats(0, 1))
    def test_symmetric_and_bounded(self, p):
        assert 0 <= binary_entropy(p) <= 1
        assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)


class TestEstimate:
    def test_subtraction_combines_stderr(self):
        d = Estimate(2.0, 0.3, 10, "monte-carlo") - Estimate(0.5, 0.4, 10, "monte-carlo")
        assert d.value == 1.5 and d.stderr == pytest.approx(0.5)

    def test_clamp_keeps_raw(self):
        e = Estimate(-0.01, 0.1).clamp(0.0)
        assert e.value == 0.0 and e.raw == -0.01 and e.unclamped == -0.01

    def test_engine_aliases(self):
        assert resolve_engine("mc") == "monte-carlo"
        with pytest.raises(ValueError):
            resolve_engine("simpson")


class TestMixtureEntropy:
    @pytest.mark.parametrize("engine", ENGINES)
    def test_single_component(self, engine):
        ch = AwgnChannel(np.array([0.3 + 0.2j]), 0.7)
        est = mixture_entropy(ch, "none", engine, seed=1)
        assert est.value == pytest.approx(gaussian_entropy(0.7), abs=max(1e-6, 4 * est.stderr))

    def test_grid_oracle_matches_dblquad(self):
        ch = eavesdropper_channel(SystemParams(1, 1, np.pi / 4, 2, alpha_override=1))
        assert mixture_entropy(ch, "none", "grid-oracle").value == pytest.approx(H_BPSK_PAIR_PI_4, abs=1e-8)

    def test_monte_carlo_matches_reference(self):
        ch = eavesdropper_channel(SystemParams(1, 1, np.pi / 4, 2, alpha_override=1))
        est = mixture_entropy(ch, "none", "monte-carlo", 100_000, seed=3)
        assert abs(est.value - H_BPSK_PAIR_PI_4) <= max(0.02, 3 * est.stderr)

    def test_dblquad_reference_is_reproducible(self):
        # recompute one frozen value from scratch (independent of the package's integrators)
        s2 = 2 / 3
        x = np.array([1, -1])
        means = [a + np.exp(1j * np.pi / 4) * b for a in x for b in x]
        assert _dblquad_entropy(means, s2, 2 + 6 * np.sqrt(s2)) == pytest.approx(H_BPSK_PAIR_PI_4, abs=1e-7)

    @pytest.mark.parametrize("theta", [0.0, np.pi / 6, np.pi / 4])
    @pytest.mark.parametrize("snr_db", [5.0, 10.0, 20.0])
    def test_entropy_cap(self, snr_db, theta):
        ch = eavesdropper_channel(qpsk(snr_db, theta))
        h = mixture_entropy(ch, "none", "monte-carlo", 40_000, seed=4)
        assert h.value <= 4 + gaussian_entropy(ch.noise_variance) + 3 * h.stderr

    @pytest.mark.parametrize("theta", [0.0, np.pi / 4])
    def test_conditioning_and_floor(self, theta):
        ch = eavesdropper_channel(qpsk(5.0, theta))
        h = mixture_entropy(ch, "none", "monte-carlo", 40_000, seed=5)
        hc = mixture_entropy(ch, "on-source", "monte-carlo", 40_000, seed=5)
        assert h.value >= hc.value - 3 * np.hypot(h.stderr, hc.stderr)
        assert hc.value >= gaussian_entropy(ch.noise_variance) - 3 * hc.stderr

    def test_conditional_entropy_ignores_theta(self):
        a = mixture_entropy(eavesdropper_channel(qpsk(10, 0.0)), "on-source", "quadrature")
        b = mixture_entropy(eavesdropper_channel(qpsk(10, 0.7)), "on-source", "quadrature")
        assert a.value == pytest.approx(b.value, abs=1e-4)

    def test_bad_conditioning(self):
        with pytest.raises(ValueError):
            mixture_entropy(qpsk_awgn(), "on-jammer")

    def test_empty_mixture(self):
        with pytest.raises(ValueError):
            mixture_entropy(AwgnChannel(np.array([], dtype=complex), 1.0))


class TestMiAwgn:
    def test_grid_oracle_matches_dblquad(self):
        assert mi_discrete_awgn(qpsk_awgn(), "grid-oracle").value == pytest.approx(AWGN_QPSK_P1_VAR2, abs=1e-8)

    def test_engines_match_reference(self):
        quad = mi_discrete_awgn(qpsk_awgn(), "quadrature")
        mc = mi_discrete_awgn(qpsk_awgn(), "monte-carlo", 100_000, seed=6)
        assert abs(quad.value - AWGN_QPSK_P1_VAR2) <= 0.01
        assert abs(mc.value - AWGN_QPSK_P1_VAR2) <= max(0.01, 3 * mc.stderr)

    @pytest.mark.parametrize("engine", ["monte-carlo", "quadrature"])
    def test_huge_noise(self, engine):
        assert mi_discrete_awgn(qpsk_awgn(1.0, 1e6), engine, seed=7).value < 0.01

    @pytest.mark.parametrize("engine", ["monte-carlo", "quadrature"])
    def test_noiseless_limit(self, engine):
        assert mi_discrete_awgn(qpsk_awgn(1e6, 1.0), engine, seed=8).value == pytest.approx(2.0, abs=0.01)

    def test_monotone_in_noise(self):
        vals = [mi_discrete_awgn(qpsk_awgn(1.0, v), "quadrature").value for v in np.logspace(-1, 1.5, 10)]
        assert np.all(np.diff(vals) < 0)

    def test_zero_noise_rejected(self):
        with pytest.raises(ValueError):
            AwgnChannel(psk_alphabet(4).points, 0.0)

    def test_mc_stderr_scaling(self):
        ch = eavesdropper_channel(qpsk(5.0, np.pi / 4))
        a = mutual_information(ch, "monte-carlo", 20_000, seed=1).stderr
        b = mutual_information(ch, "monte-carlo", 40_000, seed=2).stderr
        assert a / b == pytest.approx(np.sqrt(2), rel=0.2)


class TestMiEavesdropper:
    def test_grid_oracle_matches_dblquad(self):
        est = mi_eavesdropper(SystemParams(1, 1, 0.0, 4, alpha_override=1), "grid-oracle")
        assert est.value == pytest.approx(I_EVE_QPSK_THETA0, abs=1e-8)

    def test_mc_matches_reference(self):
        est = mi_eavesdropper(SystemParams(1, 1, 0.0, 4, alpha_override=1), "monte-carlo", 100_000, seed=9)
        assert abs(est.value - I_EVE_QPSK_THETA0) <= max(0.02, 3 * est.stderr)

    @pytest.mark.parametrize("engine", ENGINES)
    def test_no_source(self, engine):
        est = mi_eavesdropper(SystemParams(0, 1, 0.3, 4, alpha_override=1), engine, seed=10)
        assert est.value <= 3 * est.stderr + 1e-9

    @settings(max_examples=25, deadline=None)
    @given(snr_db=st.floats(-5, 25), theta=st.floats(0, 2 * np.pi), order=st.sampled_from([2, 3, 4]))
    def test_bounded(self, snr_db, theta, order):
        for engine in ("monte-carlo", "quadrature"):
            est = mi_eavesdropper(qpsk(snr_db, theta, order=order), engine, 4000 if engine == "monte-carlo" else None)
            assert 0 <= est.value <= np.log2(order)
            raw = est.unclamped
            assert -3 * est.stderr - 1e-6 <= raw <= np.log2(order) + 3 * est.stderr + 1e-6

    def test_deterministic(self):
        a = mi_eavesdropper(qpsk(5.0, 0.2), "monte-carlo", 10_000, seed=11)
        b = mi_eavesdropper(qpsk(5.0, 0.2), "monte-carlo", 10_000, seed=11)
        assert a == b

    @pytest.mark.parametrize("engine", ["quadrature", "grid-oracle"])
    def test_two_nodes_is_under_resolved(self, engine):
        ch = eavesdropper_channel(qpsk(10.0, np.pi / 4))
        ref = mutual_information(ch, "grid-oracle").value
        if engine == "quadrature":
            assert abs(mutual_information(ch, "quadrature", 2).value - ref) > 0.02
        else:
            assert abs(mutual_information(ch, "quadrature", 24).value - ref) < 0.02
