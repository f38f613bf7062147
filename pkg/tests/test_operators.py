"""Sectorial wrappers, matrix functions, and the averaged families.

The defective-path checks use the exact 2x2 closed form
f(aI + N) = f(a) I + f'(a) N, which sidesteps the ill-conditioned
eigenbasis entirely.
"""

import math

import numpy as np
import pytest
import scipy.linalg

from speccalc import operators as ops
from speccalc import special
from speccalc.errors import CoverageError, DomainError, NotSectorialError
from speccalc.grids import SampledFunction
from speccalc.spaces import make_partition


def jordan2(a=1.0):
    return ops.sectorial(np.array([[a, 1.0], [0.0, a]]), name="j2")


def closed_form_2x2(g, gp, a=1.0):
    """g(aI+N) for the 2x2 shift block."""
    return np.array([[g(a), gp(a)], [0.0, g(a)]], dtype=np.complex128)


class TestSectorialWrapper:
    def test_guards(self):
        with pytest.raises(NotSectorialError):
            ops.sectorial(np.zeros((3, 3)))
        with pytest.raises(NotSectorialError):
            ops.sectorial(np.diag([1.0, -2.0]))
        with pytest.raises(DomainError):
            ops.sectorial(np.ones((2, 3)))
        with pytest.raises(NotSectorialError):
            ops.sectorial(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_spectral_data(self):
        op = ops.sectorial(np.diag([4.0, 1.0, 2.0]))
        assert op.dim == 3
        assert op.diagonalizable
        assert np.allclose(op.eigenvalues, [1.0, 2.0, 4.0])  # sorted
        assert op.spectral_bounds() == (1.0, 4.0)
        assert op.omega == 0.0

    def test_complex_sector_angle(self):
        op = ops.sectorial(np.diag([1.0 + 1.0j, 2.0]))
        assert op.omega == pytest.approx(np.pi / 4.0)

    def test_jordan_block_is_marked_defective(self):
        op = jordan2()
        assert not op.diagonalizable
        assert op.eigenvectors is None

    def test_zero_mode_compression(self):
        op = ops.operator_from_spec("cycle-laplacian:6")
        assert op.reduction is not None
        assert op.reduction.original_dim == 6
        assert op.reduction.core_dim == 5
        assert op.reduction.residual < 1e-12
        assert np.all(op.eigenvalues.real > 1e-10)

    def test_idempotent_wrap(self):
        op = ops.sectorial(np.diag([1.0, 2.0]))
        assert ops.sectorial(op) is op


class TestPresets:
    def test_diag_with_and_without_parens(self):
        a = ops.operator_from_spec("diag:(1,2,5,10)")
        b = ops.operator_from_spec("diag:1,2,5,10")
        assert np.allclose(a.matrix, b.matrix)

    def test_logspaced_is_geometric_and_symmetric(self):
        op = ops.operator_from_spec("diag-logspaced:16")
        d = np.sort(np.real(np.diag(op.matrix)))
        r = d[1:] / d[:-1]
        assert np.allclose(r, r[0])
        assert d[0] * d[-1] == pytest.approx(1.0)

    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            ops.operator_from_spec("hilbert:5")
        with pytest.raises(NotSectorialError):
            ops.operator_from_spec("jordan:-1,3")


class TestSectorialityCheck:
    def test_positive_diagonal_is_sectorial_everywhere(self):
        rep = ops.check_sectoriality(np.diag([1.0, 3.0, 9.0]))
        assert rep.omega == 0.0
        assert all(row["bounded"] for row in rep.rows)
        # the ray constant grows as the ray closes on the spectrum
        cs = [row["C"] for row in sorted(rep.rows, key=lambda r: r["theta"])]
        assert cs[0] >= cs[-1]
        # the sup along a ray tends to 1 from below at large radius, and
        # the finite radius grid stops just short of the limit
        assert min(cs) >= 0.99


class TestMatrixFunctions:
    def test_imaginary_powers_diag(self):
        op = ops.sectorial(np.diag([1.0, 2.0, 4.0]))
        t = 0.8
        got = ops.imaginary_powers(op, t)
        want = np.diag(np.exp(1j * t * np.log([1.0, 2.0, 4.0])))
        assert np.allclose(got, want, atol=1e-13)
        assert np.allclose(ops.imaginary_powers(op, 0.0), np.eye(3), atol=1e-13)

    def test_imaginary_powers_group_law(self):
        op = ops.operator_from_spec("diag-logspaced:8")
        a, b = 0.37, -1.91
        lhs = ops.imaginary_powers(op, a) @ ops.imaginary_powers(op, b)
        rhs = ops.imaginary_powers(op, a + b)
        assert np.linalg.norm(lhs - rhs, 2) < 1e-12

    def test_imaginary_powers_jordan(self):
        t = 1.3
        got = ops.imaginary_powers(jordan2(), t)
        want = closed_form_2x2(lambda a: a ** (1j * t), lambda a: 1j * t * a ** (1j * t - 1))
        assert np.allclose(got, want, atol=1e-10)

    def test_fractional_power_squares_back(self):
        for spec in ("diag:1,2,5,10", "jordan:2,2"):
            op = ops.operator_from_spec(spec)
            H = ops.fractional_power(op, 0.5)
            assert np.allclose(H @ H, op.matrix, atol=1e-9)

    def test_semigroup_matches_expm(self):
        op = jordan2(1.5)
        z = 0.7 + 0.2j
        got = ops.semigroup(op, z)
        want = scipy.linalg.expm(-z * op.matrix)
        assert np.allclose(got, want, atol=1e-11)

    def test_resolvent_value(self):
        A = np.diag([1.0, 2.0])
        lam = 3.0 + 1.0j
        got = ops.resolvent(A, lam)
        want = np.linalg.inv(lam * np.eye(2) - A)
        assert np.allclose(got, want, atol=1e-13)

    def test_holomorphic_calculus_against_eigen(self):
        op = ops.sectorial(np.diag([1.0, 2.0, 4.0]))
        rho = lambda z: z / (1.0 + z) ** 2
        got = ops.holomorphic_calculus(op, rho)
        want = np.diag(rho(np.array([1.0, 2.0, 4.0], dtype=complex)))
        assert np.linalg.norm(got - want, 2) < 1e-7

    def test_holomorphic_calculus_jordan(self):
        rho = lambda z: z / (1.0 + z) ** 2
        rho_p = lambda z: (1.0 - z) / (1.0 + z) ** 3
        got = ops.holomorphic_calculus(jordan2(), rho)
        want = closed_form_2x2(rho, rho_p)
        assert np.linalg.norm(got - want, 2) < 1e-7


class TestWindowCalculus:
    def test_projection_is_identity_when_covered(self):
        P = ops.calculus_core_projection(np.diag([0.5, 1.0, 2.0]))
        assert P.covers_spectrum
        assert P.defect < 1e-12

    def test_projection_drops_uncovered_mass(self):
        P = ops.calculus_core_projection(np.diag([0.125, 1.0, 8.0]), half_width=2)
        assert not P.covers_spectrum
        assert P.defect > 0.5

    def test_windowed_apply_matches_direct(self):
        op = ops.sectorial(np.diag([1.0, 2.0, 4.0]))
        f = SampledFunction.from_callable(
            lambda s: s / (1.0 + s) ** 2, "log", 1e-6, 1e6, 1 << 10
        )
        windowed, info = ops.extended_hoermander_apply(op, f)
        direct = ops.sampled_apply(op, f)
        assert np.linalg.norm(windowed - direct, 2) < 1e-10
        assert len(info["window_norms"]) >= 2

    def test_windowed_apply_defective_needs_closed_form(self):
        f = SampledFunction.from_callable(
            lambda s: s / (1.0 + s) ** 2, "log", 1e-4, 1e4, 1 << 9
        )
        out, info = ops.extended_hoermander_apply(jordan2(), f)
        assert info.get("defective_fallback")
        want = closed_form_2x2(
            lambda z: z / (1.0 + z) ** 2, lambda z: (1.0 - z) / (1.0 + z) ** 3
        )
        assert np.linalg.norm(out - want, 2) < 1e-8
        samples_only = SampledFunction("log", f.u0, f.du, f.values)
        with pytest.raises(NotSectorialError):
            ops.extended_hoermander_apply(jordan2(), samples_only)

    def test_coverage_guard(self):
        f = SampledFunction.from_callable(lambda s: 1.0 / (1.0 + s), "log", 0.5, 2.0, 16)
        with pytest.raises(CoverageError):
            ops.sampled_apply(np.diag([0.1, 10.0]), f)


class TestMellinTransform:
    def test_gamma_shift_closed_form(self):
        f = SampledFunction.from_callable(
            lambda s: s * np.exp(-s), "log", 1e-9, 1e3, 1 << 12
        )
        t = np.array([-2.0, 0.0, 1.5])
        got = ops.mellin_transform(f, t_grid=t)
        want = special.gamma(1.0 + 1j * t)
        assert np.max(np.abs(got - want)) < 1e-9

    def test_plancherel_isometric(self):
        f = SampledFunction.from_callable(
            lambda s: np.exp(-np.log(s) ** 2), "log", 1e-9, 1e9, 1 << 11
        )
        M = ops.mellin_transform(f, isometric=True)
        assert M.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-10)

    def test_requires_log_grid(self):
        f = SampledFunction.from_callable(np.cos, "linear", -3.0, 3.0, 64)
        with pytest.raises(DomainError):
            ops.mellin_transform(f)


class TestFamilies:
    """Spot-check family elements against hand formulas, including the
    exact Jordan closed form on the defective path."""

    def pick(self, fam, count=5):
        idx = np.linspace(0, len(fam.weights) - 1, count).astype(int)
        return idx

    def test_bip_diag(self):
        op = ops.sectorial(np.diag([1.0, 2.0]))
        fam = ops.family_samples(op, "bip", {"alpha": 1.0, "T": 10.0}, {"n": 64})
        t = fam.points
        for k in self.pick(fam):
            want = (1.0 + t[k] ** 2) ** -0.5 * np.diag(
                np.exp(1j * t[k] * np.log([1.0, 2.0]))
            )
            assert np.allclose(fam.matrices[k], want, atol=1e-12)

    def test_bip_jordan(self):
        fam = ops.family_samples(jordan2(), "bip", {"alpha": 1.0, "T": 10.0}, {"n": 64})
        t = fam.points
        for k in self.pick(fam):
            want = (1.0 + t[k] ** 2) ** -0.5 * closed_form_2x2(
                lambda a: a ** (1j * t[k]),
                lambda a: 1j * t[k] * a ** (1j * t[k] - 1.0),
            )
            assert np.allclose(fam.matrices[k], want, atol=1e-9)

    def test_resolvent_ray_jordan(self):
        beta, theta = 0.5, np.pi / 2
        fam = ops.family_samples(
            jordan2(), "resolvent-ray", {"beta": beta, "theta": theta}, {"n": 64}
        )
        e = np.exp(1j * theta)
        for k in self.pick(fam):
            t = fam.points[k]
            g = lambda a: t**beta * a ** (1 - beta) / (e * t - a)
            gp = lambda a: t**beta * (
                (1 - beta) * a ** (-beta) / (e * t - a)
                + a ** (1 - beta) / (e * t - a) ** 2
            )
            assert np.allclose(fam.matrices[k], closed_form_2x2(g, gp), atol=1e-9)

    def test_semigroup_ray_jordan(self):
        theta = np.pi / 4
        fam = ops.family_samples(jordan2(), "semigroup-ray", {"theta": theta}, {"n": 64})
        z = np.exp(1j * theta)
        for k in self.pick(fam):
            t = fam.points[k]
            g = lambda a: np.sqrt(t * a) * np.exp(-z * t * a)
            gp = lambda a: (
                np.sqrt(t) * (0.5 / np.sqrt(a) - z * t * np.sqrt(a)) * np.exp(-z * t * a)
            )
            assert np.allclose(fam.matrices[k], closed_form_2x2(g, gp), atol=1e-9)

    def test_wave_jordan(self):
        alpha, m = 1.0, 1
        fam = ops.family_samples(
            jordan2(), "wave", {"alpha": alpha, "m": m},
            {"n": 32, "s_min": 1e-3, "s_max": 1e2},
        )
        for k in self.pick(fam):
            s = fam.points[k]
            g = lambda a: abs(s) ** -alpha * a ** (0.5 - alpha) * (np.exp(1j * s * a) - 1) ** m
            gp = lambda a: abs(s) ** -alpha * (
                (0.5 - alpha) * a ** (-0.5 - alpha) * (np.exp(1j * s * a) - 1) ** m
                + a ** (0.5 - alpha)
                * m
                * (np.exp(1j * s * a) - 1) ** (m - 1)
                * 1j
                * s
                * np.exp(1j * s * a)
            )
            assert np.allclose(fam.matrices[k], closed_form_2x2(g, gp), atol=1e-8)

    def test_wave_taylor_jordan(self):
        alpha, m = 1.7, 1
        fam = ops.family_samples(
            jordan2(), "wave-taylor", {"alpha": alpha, "m": m},
            {"n": 32, "s_min": 1e-3, "s_max": 1e2},
        )
        for k in self.pick(fam):
            s = fam.points[k]
            g = lambda a: abs(s) ** -alpha * a ** (0.5 - alpha) * (
                np.exp(1j * s * a) - 1 - 1j * s * a
            )
            gp = lambda a: abs(s) ** -alpha * (
                (0.5 - alpha) * a ** (-0.5 - alpha) * (np.exp(1j * s * a) - 1 - 1j * s * a)
                + a ** (0.5 - alpha) * (1j * s * np.exp(1j * s * a) - 1j * s)
            )
            assert np.allclose(fam.matrices[k], closed_form_2x2(g, gp), atol=1e-8)

    def test_semigroup_2d_jordan(self):
        alpha = 1.0
        fam = ops.family_samples(
            jordan2(), "semigroup-2d", {"alpha": alpha}, {"n_x": 8, "n_psi": 7}
        )
        for k in self.pick(fam):
            x, y = fam.points[k]
            zf = 1.0 + 1j * (y / x)
            c = math.cos(math.atan2(y, x)) ** alpha * x ** (-0.5)
            g = lambda a: c * np.sqrt(a) * np.exp(-zf * x * a)
            gp = lambda a: c * (0.5 / np.sqrt(a) - zf * x * np.sqrt(a)) * np.exp(-zf * x * a)
            assert np.allclose(fam.matrices[k], closed_form_2x2(g, gp), atol=1e-8)

    def test_ray_angle_guards(self):
        op = ops.sectorial(np.diag([1.0, 2.0]))
        with pytest.raises(DomainError):
            ops.family_samples(op, "resolvent-ray", {"theta": 0.0})
        with pytest.raises(DomainError):
            ops.family_samples(op, "semigroup-ray", {"theta": np.pi / 2})
        with pytest.raises(DomainError):
            ops.family_samples(op, "nonsense")

    def test_wave_mellin_refuses_defective(self):
        with pytest.raises(NotSectorialError):
            ops.family_samples(jordan2(), "wave-mellin", {"alpha": 1.0, "m": 2})


class TestMellinIdentities:
    def test_wave_mellin_identity(self):
        op = ops.sectorial(np.diag([1.0, 2.0, 5.0, 10.0]))
        t = np.array([-2.0, -0.5, 0.0, 1.0, 3.0])
        lhs = ops.wave_mellin_lhs(op, t, alpha=1.0, m=2)
        rhs = ops.wave_mellin_rhs(op, t, alpha=1.0, m=2)
        scale = np.max(np.linalg.norm(rhs, axis=(1, 2)))
        assert np.max(np.linalg.norm(lhs - rhs, axis=(1, 2))) / scale < 1e-6

    def test_wave_taylor_identity(self):
        op = ops.sectorial(np.diag([1.0, 2.0, 4.0]))
        t = np.array([-1.0, 0.3, 2.0])
        zt = 0.5 - 1.7 + 1j * t
        lhs = ops.wave_taylor_mellin_lhs(op, t, alpha=1.7, m=1)
        lamlog = np.log(np.array([1.0, 2.0, 4.0]))
        gam = special.gamma(zt) * np.exp(1j * np.pi * zt / 2.0)
        want = np.stack(
            [g * np.diag(np.exp(-z * lamlog)) for g, z in zip(gam, zt)]
        )
        scale = np.max(np.linalg.norm(want, axis=(1, 2)))
        assert np.max(np.linalg.norm(lhs - want, axis=(1, 2))) / scale < 1e-6

    def test_resolvent_bip_identity(self):
        op = ops.sectorial(np.diag([1.0, 2.0, 4.0]))
        s = np.array([-1.0, 0.0, 0.7])
        lhs, rhs = ops.resolvent_bip_mellin(op, 0.5, np.pi / 2, s)
        scale = np.max(np.linalg.norm(rhs, axis=(1, 2)))
        assert np.max(np.linalg.norm(lhs - rhs, axis=(1, 2))) / scale < 1e-3

    def test_resolvent_bip_rejects_cut_angle(self):
        op = ops.sectorial(np.diag([1.0, 2.0]))
        with pytest.raises(DomainError):
            ops.resolvent_bip_mellin(op, 0.5, np.pi, np.array([0.0]))
