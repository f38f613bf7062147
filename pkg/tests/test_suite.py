"""The multiplier-condition suite against scalar closed forms.

Scale invariance of the dt/t averages makes every positive diagonal
reproduce the one-eigenvalue values, so the oracles below are exact
integrals:

    resolvent ray,  beta=1/2:  sqrt((pi - theta) / sin(theta))
    beta sweep at theta=pi/2:  sqrt(pi / (2 sin(pi beta)))
    semigroup ray:             (2 cos(theta))^{-1/2}
    semigroup plane, alpha=1:  sqrt(pi/2)
    wave alpha=1, m=1:         sqrt(2 pi)
    imaginary powers, T=50:    sqrt(pi) (as T -> inf)
"""

import math

import numpy as np
import pytest

from speccalc import operators as ops
from speccalc import suite
from speccalc.errors import (
    ConvergenceError,
    CoverageError,
    DomainError,
    NotSectorialError,
)
from speccalc.grids import SampledFunction
from speccalc.rbound import SpaceSpec


@pytest.fixture(scope="module")
def diag124():
    return ops.sectorial(np.diag([1.0, 2.0, 4.0]))


@pytest.fixture(scope="module")
def corpus124(diag124):
    return suite.multiplier_corpus(diag124, alpha=1.0, size=60, seed=0)


def rho_symbol():
    return SampledFunction.from_callable(
        lambda s: s / (1.0 + s) ** 2, "log", 1e-7, 1e7, 1 << 11, name="rho"
    )


class TestCalculusApply:
    def test_matches_eigen_action(self, diag124):
        f = rho_symbol()
        got = suite.sobolev_calculus_apply(diag124, f)
        want = np.diag(f.eval(np.array([1.0, 2.0, 4.0])))
        assert np.linalg.norm(got - want, 2) < 1e-9

    def test_zero_symbol_shortcut(self, diag124):
        f = SampledFunction.from_callable(
            lambda s: np.zeros_like(np.asarray(s)), "log", 1e-6, 1e6, 1 << 10
        )
        out = suite.sobolev_calculus_apply(diag124, f)
        assert np.all(out == 0)

    def test_undecayed_symbol_is_refused(self, diag124):
        f = SampledFunction.from_callable(
            lambda s: 1.0 / (1.0 + s), "log", 1e-2, 1e2, 64
        )
        with pytest.raises(ConvergenceError):
            suite.sobolev_calculus_apply(diag124, f)


class TestCorpus:
    def test_ball_normalization(self, corpus124):
        # every member sits on the sphere of the weighted transform norm
        t = corpus124.t
        w = (1.0 + t * t) ** (corpus124.alpha / 2.0)
        dt = corpus124.dt
        norms = np.sqrt(np.sum(np.abs(corpus124.coefficients * w) ** 2, axis=1) * dt)
        # members that do not vanish at the grid edge differ from the
        # plain Riemann sum by the trapezoid half-weight, about 2e-6 here
        assert np.allclose(norms, corpus124.radius, rtol=1e-5)

    def test_scaling_is_exact(self, corpus124):
        double = corpus124.scaled(2.0)
        assert double.radius == pytest.approx(2.0 * corpus124.radius)
        assert np.allclose(double.coefficients, 2.0 * corpus124.coefficients)

    def test_label_structure(self, corpus124):
        labels = list(corpus124.labels)
        assert any(lab.startswith("extremal@") for lab in labels)
        assert any("rho" in lab for lab in labels)
        assert len(labels) == len(corpus124)


class TestConditionOne:
    def test_closed_form_value_and_witness(self, diag124, corpus124):
        res = suite.condition_c1(diag124, SpaceSpec(p=2.0, n=3), corpus124)
        # the peak member is the eigenvalue-centered extremal, whose
        # operator norm is (2 pi)^{-1} || <t>^{-1} ||_{L2[-50, 50]}
        want = math.sqrt(2.0 * math.atan(50.0)) / (2.0 * math.pi)
        assert res.value == pytest.approx(want, rel=1e-4)
        assert res.extra["witness_member"].startswith("extremal@")
        assert res.condition == "c1"

    def test_scales_with_radius(self, diag124, corpus124):
        base = suite.condition_c1(diag124, SpaceSpec(p=2.0, n=3), corpus124)
        big = suite.condition_c1(diag124, SpaceSpec(p=2.0, n=3), corpus124.scaled(3.0))
        assert big.value == pytest.approx(3.0 * base.value, rel=1e-12)


class TestConditionTable:
    def test_resolvent_ray_closed_forms(self, diag124):
        thetas = (np.pi, np.pi / 2, np.pi / 4)
        rows = suite.condition_c2_to_c8(
            diag124, params={"theta_grid": thetas, "only": ("c3",)}
        )["c3"]
        got = {r.param: r.value for r in rows if r.param != "exponent"}
        for th in thetas:
            want = math.sqrt((np.pi - th) / math.sin(th)) if th != np.pi else 1.0
            assert got[f"theta={th:.6g}"] == pytest.approx(want, rel=2e-3), th

    def test_semigroup_ray_closed_forms(self, diag124):
        psis = (0.0, np.pi / 4)
        rows = suite.condition_c2_to_c8(
            diag124, params={"psi_grid": psis, "only": ("c5",)}
        )["c5"]
        got = {r.param: r.value for r in rows if r.param != "exponent"}
        for ps in psis:
            want = (2.0 * math.cos(ps)) ** -0.5
            assert got[f"theta={ps:.6g}"] == pytest.approx(want, rel=2e-3), ps

    def test_plane_averages_and_wave(self, diag124):
        rows = suite.condition_c2_to_c8(diag124, params={"only": ("c6", "c7")})
        c6 = rows["c6"][0].value
        c7 = rows["c7"][0].value
        assert c6 == pytest.approx(math.sqrt(math.pi / 2.0), rel=5e-3)
        assert c7 == pytest.approx(math.sqrt(2.0 * math.pi), rel=1e-3)

    def test_bip_value(self, diag124):
        rows = suite.condition_c2_to_c8(diag124, params={"only": ("c2",)})
        # int_{-T}^{T} dt / (1 + t^2) -> pi, so the T = 50 average sits
        # just under sqrt(pi)
        val = rows["c2"][0].value
        want = math.sqrt(2.0 * math.atan(50.0))
        assert val == pytest.approx(want, rel=1e-3)


class TestEquivalenceReport:
    def test_diagonal_report_asserts_equivalence(self, diag124):
        rep = suite.equivalence_report(diag124, params={"corpus_size": 40}, seed=0)
        assert rep.flags["diagonalizable"]
        assert rep.flags["all_finite"]
        assert rep.flags["bridge_ok"]
        assert rep.flags["equivalence_asserted"]
        bridge = [r for r in rep.rows if r.condition == "bridge"]
        assert len(bridge) == 1
        assert bridge[0].value == pytest.approx(1.0, rel=1e-6)
        assert set(rep.ratios) >= {"c3_over_c2", "c7_over_c2"}
        assert all(entry["drift"] <= 0.05 for entry in rep.convergence.values())

    def test_beta_sweep_closed_form(self, diag124):
        rep = suite.equivalence_report(diag124, params={"corpus_size": 40}, seed=0)
        sweep = {
            r.param: r.value
            for r in rep.rows
            if r.condition == "c3" and r.param.startswith("beta=")
        }
        th = np.pi / 2
        for beta in (0.25, 0.5, 0.75):
            want = math.sqrt(np.pi / (2.0 * math.sin(np.pi * beta)))
            assert sweep[f"beta={beta:g}@theta={th:.6g}"] == pytest.approx(
                want, rel=2e-3
            )

    def test_jordan_report_records_without_asserting(self):
        op = ops.operator_from_spec("jordan:1,3")
        rep = suite.equivalence_report(op, params={"corpus_size": 30}, seed=0)
        assert not rep.flags["diagonalizable"]
        assert not rep.flags["equivalence_asserted"]
        assert rep.flags["all_finite"]
        expo = [r for r in rep.rows if r.param == "exponent"]
        assert expo
        for r in expo:
            assert "within" not in r.extra
            assert r.extra["recorded_only"]

    def test_zero_mode_reduction_is_flagged(self):
        op = ops.operator_from_spec("cycle-laplacian:8")
        rep = suite.equivalence_report(op, params={"corpus_size": 30}, seed=0)
        assert rep.flags["zero_mode_reduced"]
        assert rep.flags["core_dim"] == 7
        bridge = [r for r in rep.rows if r.condition == "bridge"][0]
        assert bridge.value == pytest.approx(1.0, rel=1e-3)


class TestGeneralAveraged:
    def test_inverse_power_profile(self, diag124):
        phi = SampledFunction.from_callable(
            lambda s: s / (1.0 + s) ** 2, "log", 1e-7, 1e7, 1 << 11
        )
        bound, ker_sup = suite.general_averaged_check(diag124, phi, alpha=1.0)
        # int (s/(1+s)^2)^2 ds/s = 1/6; the Mellin symbol peaks at 1
        assert bound == pytest.approx(1.0 / math.sqrt(6.0), rel=1e-3)
        assert ker_sup == pytest.approx(1.0, rel=1e-2)


class TestPaleyLittlewood:
    def test_two_sided_frame_on_log_spectrum(self):
        op = ops.operator_from_spec("diag-logspaced:16")
        lo, hi = suite.paley_littlewood_check(
            op, SpaceSpec(p=2.0, n=16), trials=50, seed=0
        )
        assert 0.1 <= lo <= hi <= 10.0
        assert hi / lo <= 1.5  # ell^2 blocks are nearly tight frames

    def test_partition_must_cover(self):
        op = ops.operator_from_spec("diag-logspaced:16")
        with pytest.raises(CoverageError):
            suite.paley_littlewood_check(
                op, SpaceSpec(p=2.0, n=16), trials=5, seed=0, indices=(0, 1)
            )

    def test_defective_is_refused(self):
        op = ops.operator_from_spec("jordan:1,3")
        with pytest.raises(NotSectorialError):
            suite.paley_littlewood_check(op, SpaceSpec(p=2.0, n=3), trials=5, seed=0)


class TestBoundaryDecomposition:
    def test_bounded_part_is_exactly_one(self):
        for x in (1e-1, 1e-3):
            z = complex(x, math.sqrt(1.0 - x * x))
            g, h = suite.sea_to_ha_decomposition(z)
            assert abs(g - 1.0) < 1e-9
            assert np.isfinite(h)

    def test_square_part_blowup_rate(self):
        xs = np.array([1e-1, 1e-2, 1e-3])
        hs = []
        for x in xs:
            z = complex(x, math.sqrt(1.0 - x * x))
            hs.append(suite.sea_to_ha_decomposition(z)[1])
        slope = np.polyfit(np.log(xs), np.log(hs), 1)[0]
        assert -1.05 <= slope <= -0.95
        # h ~ 1/(2 Re z) near the boundary
        assert hs[1] == pytest.approx(1.0 / (2.0 * 1e-2), rel=0.05)

    def test_needs_unit_circle_right_half(self):
        with pytest.raises(DomainError):
            suite.sea_to_ha_decomposition(2.0 + 0.0j)
        with pytest.raises(DomainError):
            suite.sea_to_ha_decomposition(complex(-0.1, math.sqrt(1 - 0.01)))


class TestMultiplierExperiment:
    def test_norm_menu_and_applied_error(self, diag124):
        f = rho_symbol()
        exp = suite.multiplier_experiment(diag124, f, alpha=1.0)
        assert {"sobexp", "hoermander", "mihlin"} <= set(exp.norms)
        assert all(v.value > 0 for v in exp.norms.values())
        assert exp.applied_error < 1e-8

    def test_defective_has_no_reference(self):
        op = ops.operator_from_spec("jordan:1,2")
        exp = suite.multiplier_experiment(op, rho_symbol(), alpha=1.0)
        assert math.isnan(exp.applied_error)
