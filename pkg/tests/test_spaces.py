"""Partitions of unity and the multiplier norm family."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speccalc.errors import DomainError
from speccalc.grids import SampledFunction
from speccalc.spaces import (
    NormResult,
    besov_norm,
    classical_hoermander,
    hoermander_norm,
    make_partition,
    mihlin_norm,
    modern_hoermander,
    sobexp_norm,
    sobolev_norm,
)


def log_gauss(s):
    return np.exp(-np.log(np.asarray(s, dtype=float)) ** 2 / 2.0)


def rho(s):
    s = np.asarray(s, dtype=float)
    return s / (1.0 + s) ** 2


@pytest.fixture()
def gauss_log():
    return SampledFunction.from_callable(log_gauss, "log", 1e-8, 1e8, 1 << 11, name="g")


@pytest.fixture()
def rho_log():
    return SampledFunction.from_callable(rho, "log", 1e-8, 1e8, 1 << 11, name="rho")


class TestPartitions:
    @given(st.floats(min_value=-30.0, max_value=30.0))
    @settings(max_examples=50, deadline=None)
    def test_equidistant_unity(self, u):
        pou = make_partition("equidistant", {"spacing": 0.7})
        assert pou.unity(np.array([u]))[0] == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(min_value=-6.0, max_value=6.0))
    @settings(max_examples=50, deadline=None)
    def test_dyadic_unity(self, e):
        pou = make_partition("dyadic")
        assert pou.unity(np.array([10.0**e]))[0] == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(min_value=-200.0, max_value=200.0))
    @settings(max_examples=50, deadline=None)
    def test_fourier_dyadic_unity(self, t):
        pou = make_partition("fourier-dyadic")
        assert pou.unity(np.array([t]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_finite_order_windows_also_sum_to_one(self):
        pou = make_partition("dyadic", {"order": 3})
        x = np.logspace(-4, 4, 301)
        assert np.allclose(pou.unity(x), 1.0, atol=1e-12)

    def test_window_supports(self):
        pou = make_partition("dyadic")
        lo, hi = pou.support(3)
        assert (lo, hi) == (4.0, 16.0)
        w = pou.window(3)
        assert w(np.array([3.9]))[0] == 0.0
        assert w(np.array([8.0]))[0] == pytest.approx(1.0)
        assert w(np.array([16.1]))[0] == 0.0

    def test_indices_cover_range(self):
        pou = make_partition("fourier-dyadic")
        idx = pou.indices_for(-10.0, 10.0)
        assert 0 in idx and max(idx) >= 4 and min(idx) <= -4

    def test_parameter_guards(self):
        with pytest.raises(DomainError):
            make_partition("triadic")
        with pytest.raises(DomainError):
            make_partition("dyadic", {"order": 0})
        with pytest.raises(DomainError):
            make_partition("equidistant", {"spacing": -1.0})
        with pytest.raises(DomainError):
            make_partition("dyadic", {"bogus": 1})


class TestSobolevScale:
    def test_parseval_at_alpha_zero(self):
        f = SampledFunction.from_callable(
            lambda u: np.exp(-(u**2)), "linear", -30.0, 30.0, 1 << 11
        )
        res = sobolev_norm(f, 0.0)
        assert res.value == pytest.approx(np.pi**0.25 / 2.0**0.25, rel=1e-10)
        assert not res.divergent

    def test_log_gaussian_closed_form(self, gauss_log):
        # f_e(u) = e^{-u^2/2}: the alpha = 1 norm squared is
        # int (1+|t|)^2 e^{-t^2} dt = (3/2) sqrt(pi) + 2.  The kink of
        # the weight at t = 0 keeps the trapezoid error at O(dt^2), so
        # check second-order convergence toward the closed form as the
        # grid span (hence the frequency resolution) doubles.
        want = math.sqrt(1.5 * math.sqrt(math.pi) + 2.0)
        err1 = abs(sobexp_norm(gauss_log, 1.0).value - want)
        wide = SampledFunction.from_callable(log_gauss, "log", 1e-16, 1e16, 1 << 12)
        err2 = abs(sobexp_norm(wide, 1.0).value - want)
        assert err1 < 3e-3 * want
        assert err2 < 0.35 * err1

    def test_alpha_monotone(self, gauss_log):
        v1 = sobexp_norm(gauss_log, 0.7).value
        v2 = sobexp_norm(gauss_log, 1.3).value
        assert v2 >= v1

    def test_divergence_flag_for_nondecaying_symbol(self):
        f = SampledFunction.from_callable(
            lambda s: 1.0 / (1.0 + s), "log", 1e-6, 1e6, 1 << 10
        )
        assert sobexp_norm(f, 1.0).divergent

    def test_linear_grid_required(self, gauss_log):
        with pytest.raises(DomainError):
            sobolev_norm(gauss_log, 1.0)

    def test_float_protocol(self, gauss_log):
        res = sobexp_norm(gauss_log, 1.0)
        assert isinstance(res, NormResult)
        assert float(res) == res.value


class TestLocalizedNorms:
    def test_hoermander_needs_supercritical_alpha(self, gauss_log):
        with pytest.raises(DomainError):
            hoermander_norm(gauss_log, 0.5)

    def test_hoermander_comparable_to_global_norm(self, rho_log):
        # the sup-window norm is equivalent to the global norm up to the
        # window overlap constant; the window's own slope can push the
        # localized value slightly above the global one
        h = hoermander_norm(rho_log, 1.0).value
        s = sobexp_norm(rho_log, 1.0).value
        assert 0 < h <= 2.0 * s
        assert h >= s / 4.0

    def test_hoermander_dilation_stability(self, rho_log):
        # the localized norm is a dilation-invariant quantity up to the
        # window overlap factor
        base = hoermander_norm(rho_log, 1.0).value
        for t in (math.exp(1.0 / 3.0), math.e):
            moved = hoermander_norm(rho_log.scaled(t), 1.0).value
            assert 0.5 <= moved / base <= 2.0

    def test_imaginary_power_localizes_but_does_not_globalize(self):
        # lambda^{is} has constant modulus: the global norm diverges with
        # the grid while the localized norm stays put
        f = SampledFunction.from_callable(
            lambda s: np.exp(2.0j * np.log(s)), "log", 1e-8, 1e8, 1 << 11
        )
        glob = sobexp_norm(f, 1.0)
        assert glob.divergent
        loc = hoermander_norm(f, 1.0)
        assert not loc.divergent
        assert loc.value < glob.value

    def test_classical_orders_accumulate(self, rho_log):
        v0 = classical_hoermander(rho_log, 0).value
        v1 = classical_hoermander(rho_log, 1).value
        v2 = classical_hoermander(rho_log, 2).value
        assert v0 <= v1 <= v2
        assert classical_hoermander(rho_log, 1).diagnostics["per_order"][0] == v0

    def test_classical_integer_guard(self, rho_log):
        with pytest.raises(DomainError):
            classical_hoermander(rho_log, 1.5)

    def test_modern_matches_scale_invariance(self, rho_log):
        res = modern_hoermander(rho_log, 1.0)
        assert res.value > 0
        assert res.diagnostics["argmax_t"] is not None


class TestBesovScale:
    def test_alpha_monotone(self):
        f = SampledFunction.from_callable(
            lambda u: np.exp(-(u**2) / 2.0), "linear", -40.0, 40.0, 1 << 12
        )
        assert besov_norm(f, 1.5).value >= besov_norm(f, 1.0).value

    def test_mihlin_finite_for_decaying_symbol(self):
        f = SampledFunction.from_callable(rho, "log", 1e-8, 1e8, 1 << 11)
        res = mihlin_norm(f, 1.0)
        assert res.value > 0
        assert not res.divergent
