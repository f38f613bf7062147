"""Cross-checks between the multiplier conditions on a fixed operator.

The conditions are numbered the way the reports print them:

  c1   R-bound of the calculus image of a normalized symbol corpus
  c2   imaginary powers <t>^{-alpha} A^{it}
  c3   resolvents on single rays, swept over the ray angle
  c4   resolvents averaged over the sector (two-dimensional)
  c5   semigroup on single rays, swept toward the boundary
  c6   semigroup averaged over the half-plane (two-dimensional)
  c7   regularized wave differences |s|^{-alpha} A^{1/2-alpha}(e^{isA}-1)^m
  c8   wave remainders past the Taylor polynomial (order floor(alpha-1/2))

`equivalence_report` evaluates all of them on one operator and records
the bridge ratio c2 / (2 pi c1), the angle-growth exponents, a beta
sweep, and a doubled-grid convergence study.  All randomness flows from
a single seed so a rerun reproduces the report exactly.

The corpus normalization uses the plain weighted transform norm
||<t>^alpha fhat_e||_{L^2(dt)} with <t> = sqrt(1 + t^2).  Under the
representation f(A) = (2 pi)^{-1} int fhat_e(t) A^{it} dt this is the
convention for which the single-function bound and the imaginary-power
bound differ by exactly 2 pi, which is what the bridge ratio checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import operators as ops
from .errors import (
    ConvergenceError,
    CoverageError,
    DomainError,
    NotSectorialError,
)
from .grids import (
    SampledFunction,
    fourier_transform,
    log_grid,
    trapezoid_weights,
)
from .rbound import OperatorFamily, SpaceSpec, r_bound, r_l2_bound
from .spaces import hoermander_norm, make_partition, mihlin_norm, sobexp_norm

__all__ = [
    "ConditionValue",
    "MultiplierCorpus",
    "MultiplierExperiment",
    "SuiteReport",
    "condition_c1",
    "condition_c2_to_c8",
    "equivalence_report",
    "general_averaged_check",
    "multiplier_corpus",
    "multiplier_experiment",
    "paley_littlewood_check",
    "sea_to_ha_decomposition",
    "sobolev_calculus_apply",
]

# default grids: transform side [-50, 50] at step 2^-5, symbol side
# [1e-4, 1e4] with 2^12 geometric points
DEFAULT_T = 50.0
DEFAULT_DT = 2.0**-5
DEFAULT_S_LO = 1e-4
DEFAULT_S_HI = 1e4
DEFAULT_S_N = 1 << 12

_TOLERANCES = {
    "c1": 0.05,
    "c2": 0.02,
    "c3": 0.02,
    "c4": 0.05,
    "c5": 0.02,
    "c6": 0.02,
    "c7": 0.01,
    "c8": 0.05,
    "bridge": 0.05,
}


# ---------------------------------------------------------------------------
# result containers


@dataclass
class ConditionValue:
    """One measured quantity: which condition, at which parameter."""

    condition: str
    param: str
    value: float
    tolerance: float
    grid: dict = field(default_factory=dict)
    finite: bool = True
    extra: dict = field(default_factory=dict)


@dataclass
class MultiplierCorpus:
    """Symbols held by their transform samples on a uniform t grid.

    coefficients[j] are the samples of fhat_e for member j; every member
    is normalized so ||<t>^alpha fhat_e||_{L^2(dt)} equals `radius`.
    """

    alpha: float
    t0: float
    dt: float
    labels: list
    coefficients: np.ndarray
    radius: float = 1.0

    def __len__(self) -> int:
        return self.coefficients.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.coefficients.shape[1])

    def scaled(self, c: float) -> "MultiplierCorpus":
        """The corpus with every member multiplied by c (ball radius c)."""
        if not c > 0:
            raise DomainError("scale factor must be positive")
        return replace(
            self, coefficients=self.coefficients * c, radius=self.radius * c
        )


@dataclass
class MultiplierExperiment:
    """Norm panel of one symbol plus its calculus application error."""

    label: str
    norms: dict
    applied_error: float


@dataclass
class SuiteReport:
    """Everything `equivalence_report` measured on one operator."""

    operator: str
    space: str
    params: dict
    rows: list
    ratios: dict
    flags: dict
    runtimes: dict
    seed: int
    convergence: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# the calculus through imaginary powers


def _edge(vals: np.ndarray) -> float:
    a = np.abs(np.asarray(vals))
    top = float(a.max())
    if top == 0.0:
        return 0.0
    k = max(1, len(a) // 50)
    return float(max(a[:k].max(), a[-k:].max()) / top)


def _apply_eigvals(op: ops.SectorialOperator, g: np.ndarray) -> np.ndarray:
    return (op.eigenvectors * g[None, :]) @ op.eigenvectors_inv


def _apply_eigvals_stack(op: ops.SectorialOperator, G: np.ndarray) -> np.ndarray:
    return (op.eigenvectors[None, :, :] * G[:, None, :]) @ op.eigenvectors_inv


def sobolev_calculus_apply(A, f: SampledFunction) -> np.ndarray:
    """f(A) through the imaginary-power representation.

    With f_e(u) = f(e^u) on the log grid,

        f(A) = (2 pi)^{-1} int fhat_e(t) A^{it} dt,

    evaluated by trapezoid sums on the transform grid.  The symbol grid
    must cover the spectrum, the samples must decay toward both grid
    edges, and the transform must decay within its frequency band; a
    symbol the grid cannot resolve raises ConvergenceError instead of
    returning a silently truncated answer.
    """
    op = ops.sectorial(A)
    if f.coordinate != "log":
        raise DomainError("the imaginary-power calculus expects a log-grid symbol")
    lo, hi = op.spectral_bounds()
    f.require_cover(lo, hi, "symbol grid")
    if float(np.max(np.abs(f.values))) == 0.0:
        return np.zeros((op.dim, op.dim), dtype=np.complex128)
    edge = _edge(f.values)
    if edge > 1e-2:
        raise ConvergenceError(
            f"symbol has not decayed at the grid edges (edge ratio {edge:.2e}); "
            "enlarge the span"
        )
    fe = SampledFunction("linear", f.u0, f.du, f.values, name=f.name)
    fh = fourier_transform(fe)
    band = _edge(fh.values)
    if band > 1e-3:
        raise ConvergenceError(
            f"transform has not decayed within the frequency band "
            f"(edge ratio {band:.2e}); refine the grid"
        )
    coef = fh.values * fh.du / (2.0 * np.pi)
    t = fh.u
    if op.diagonalizable:
        g = np.exp(1j * np.outer(np.log(op.eigenvalues), t)) @ coef
        return _apply_eigvals(op, g)
    stack = ops.imaginary_powers(op, t)
    return np.tensordot(coef, stack, axes=(0, 0))


# ---------------------------------------------------------------------------
# corpus and condition (1)


def multiplier_corpus(
    A,
    alpha: float,
    size: int = 200,
    seed: int = 0,
    t_max: float = DEFAULT_T,
    dt: float = DEFAULT_DT,
) -> MultiplierCorpus:
    """A ball-normalized symbol corpus saturating the single-function sup.

    Members are stored by their transform samples on [-t_max, t_max].
    The mix: stationary-phase extremals <t>^{-2 alpha} e^{-it log a}
    centered at every eigenvalue (these attain the supremum for the
    weighted ball), the same shape at random centers, gaussian packets
    of varied width, and the rational bump s/(1+s)^2.
    """
    op = ops.sectorial(A)
    if size < 1:
        raise DomainError("corpus size must be positive")
    gen = np.random.default_rng(seed)
    t = np.arange(-t_max, t_max + dt / 2.0, dt)
    w = trapezoid_weights(len(t), dt)
    bracket = 1.0 + t * t

    members, labels = [], []
    seen = set()
    for lam in op.eigenvalues:
        a = float(lam.real)
        key = round(math.log(a), 9) if a > 0 else None
        if key is None or key in seen:
            continue
        seen.add(key)
        members.append(bracket ** (-alpha) * np.exp(-1j * t * math.log(a)))
        labels.append(f"extremal@{a:.6g}")
    tt = np.where(t == 0.0, 1.0, t)
    rho_hat = np.where(t == 0.0, 1.0, np.pi * tt / np.sinh(np.pi * tt))
    members.append(rho_hat.astype(np.complex128))
    labels.append("rho")

    lo, hi = op.spectral_bounds()
    ulo, uhi = math.log(lo) - 1.0, math.log(hi) + 1.0
    while len(members) < size:
        c = gen.uniform(ulo, uhi)
        if len(members) % 2 == 0:
            members.append(bracket ** (-alpha) * np.exp(-1j * t * c))
            labels.append(f"extremal@u={c:.3f}")
        else:
            sig = gen.uniform(0.3, 3.0)
            members.append(
                sig
                * math.sqrt(2.0 * np.pi)
                * np.exp(-0.5 * (sig * t) ** 2)
                * np.exp(-1j * t * c)
            )
            labels.append(f"gauss@u={c:.3f},sig={sig:.2f}")

    C = np.stack(members[:size]).astype(np.complex128)
    norms = np.sqrt(np.sum(bracket**alpha * np.abs(C) ** 2 * w, axis=1))
    if np.any(norms == 0):
        raise DomainError("corpus member with zero ball norm")
    C = C / norms[:, None]
    return MultiplierCorpus(
        alpha=float(alpha),
        t0=float(t[0]),
        dt=float(dt),
        labels=labels[:size],
        coefficients=C,
    )


def _corpus_image(op: ops.SectorialOperator, corpus: MultiplierCorpus) -> np.ndarray:
    """The stack f_j(A) over the corpus, shape (J, n, n)."""
    t = corpus.t
    w = trapezoid_weights(len(t), corpus.dt)
    coef = corpus.coefficients * w[None, :] / (2.0 * np.pi)
    if op.diagonalizable:
        P = np.exp(1j * np.outer(t, np.log(op.eigenvalues)))
        return _apply_eigvals_stack(op, coef @ P)
    stack = ops.imaginary_powers(op, t)
    return np.tensordot(coef, stack, axes=(1, 0))


def condition_c1(A, space: SpaceSpec, corpus: MultiplierCorpus, rng=None) -> ConditionValue:
    """R-bound of the corpus image {f_j(A)}.

    The members are ball-normalized at construction, so the value scales
    linearly under corpus.scaled(c).
    """
    op = ops.sectorial(A)
    mats = _corpus_image(op, corpus)
    est = r_bound(mats, space, rng=rng)
    norms2 = np.linalg.norm(mats, ord=2, axis=(1, 2))
    witness = corpus.labels[int(np.argmax(norms2))]
    return ConditionValue(
        condition="c1",
        param=f"corpus:{len(corpus)}",
        value=float(est.lower),
        tolerance=_TOLERANCES["c1"],
        grid={"t_max": -corpus.t0, "dt": corpus.dt, "members": len(corpus)},
        finite=bool(np.isfinite(est.lower)),
        extra={
            "upper": float(est.upper),
            "method": est.method,
            "witness_member": witness,
            "radius": corpus.radius,
        },
    )


# ---------------------------------------------------------------------------
# conditions (2) through (8)


def _fit_exponent(x, vals):
    """Least-squares slope of log(value) against the given abscissae."""
    x = np.asarray(x, dtype=float)
    y = np.log(np.asarray(vals, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _family_row(op, space, rng, condition, param, family, fparams, fgrid, tol):
    t0 = time.perf_counter()
    fam = ops.family_samples(op, family, fparams, fgrid)
    est = r_l2_bound(fam, None if float(space.p) == 2.0 else space, rng=rng)
    value = float(est.lower)
    return ConditionValue(
        condition=condition,
        param=param,
        value=value,
        tolerance=tol,
        grid={"samples": len(fam), "measure": fam.measure, **fam.diagnostics},
        finite=bool(np.isfinite(value)),
        extra={"seconds": round(time.perf_counter() - t0, 6), "label": fam.label},
    )


def condition_c2_to_c8(A, space: SpaceSpec | None = None, params: dict | None = None, rng=None):
    """Evaluate conditions (2) through (8); returns {condition: [rows]}.

    Single-parameter conditions give one row each; the ray conditions c3
    and c5 give a row per angle plus a fitted-exponent row (slope of the
    log value against the log of the distance to the critical angle).
    params accepts alpha, beta, T, theta_grid, psi_grid, fit_tol, refine
    (grid multiplier for convergence studies), only (restrict to a
    subset of conditions), and grid (per-family size overrides).
    """
    op = ops.sectorial(A)
    if space is None:
        space = SpaceSpec(p=2.0, n=op.dim)
    p = dict(params or {})
    alpha = float(p.get("alpha", 1.0))
    beta = float(p.get("beta", 0.5))
    T = float(p.get("T", DEFAULT_T))
    theta_grid = tuple(p.get("theta_grid", (np.pi, np.pi / 2, np.pi / 4, np.pi / 8)))
    psi_grid = tuple(
        p.get("psi_grid", (0.0, np.pi / 4, 3 * np.pi / 8, 7 * np.pi / 16))
    )
    fit_tol = float(p.get("fit_tol", 0.15))
    refine = float(p.get("refine", 1.0))
    only = p.get("only")
    sizes = dict(p.get("grid", {}))

    def n_of(key, default):
        return int(round(sizes.get(key, default) * refine))

    def wanted(c):
        return only is None or c in only

    m7 = int(round(alpha))
    m8 = int(math.floor(alpha - 0.5))
    out = {}

    if wanted("c2"):
        out["c2"] = [
            _family_row(
                op, space, rng, "c2", f"alpha={alpha:g}",
                "bip", {"alpha": alpha, "T": T}, {"n": n_of("bip_n", 3201)},
                _TOLERANCES["c2"],
            )
        ]

    if wanted("c3"):
        rows = []
        for th in theta_grid:
            rows.append(
                _family_row(
                    op, space, rng, "c3", f"theta={th:.6g}",
                    "resolvent-ray", {"beta": beta, "theta": th},
                    {"n": n_of("ray_n", 1024)}, _TOLERANCES["c3"],
                )
            )
        x = [-math.log(abs(th)) for th in theta_grid]
        y = [r.value for r in rows]
        expo = _fit_exponent(x, y)
        rows.append(
            ConditionValue(
                condition="c3",
                param="exponent",
                value=expo,
                tolerance=fit_tol,
                grid={"angles": [float(th) for th in theta_grid]},
                finite=bool(np.isfinite(expo)),
                extra={"within": bool(expo <= alpha + fit_tol), "x": x, "y": y},
            )
        )
        out["c3"] = rows

    if wanted("c4"):
        out["c4"] = [
            _family_row(
                op, space, rng, "c4", f"beta={beta:g}",
                "resolvent-2d", {"alpha": alpha, "beta": beta, "theta0": np.pi},
                {"n_t": n_of("plane_n_t", 192), "n_theta": n_of("plane_n_theta", 48)},
                _TOLERANCES["c4"],
            )
        ]

    if wanted("c5"):
        rows = []
        for th in psi_grid:
            rows.append(
                _family_row(
                    op, space, rng, "c5", f"theta={th:.6g}",
                    "semigroup-ray", {"theta": th},
                    {"n": n_of("semi_n", 1024)}, _TOLERANCES["c5"],
                )
            )
        x = [-math.log(np.pi / 2 - abs(th)) for th in psi_grid]
        y = [r.value for r in rows]
        expo = _fit_exponent(x, y)
        rows.append(
            ConditionValue(
                condition="c5",
                param="exponent",
                value=expo,
                tolerance=fit_tol,
                grid={"angles": [float(th) for th in psi_grid]},
                finite=bool(np.isfinite(expo)),
                extra={"within": bool(expo <= alpha + fit_tol), "x": x, "y": y},
            )
        )
        out["c5"] = rows

    if wanted("c6"):
        out["c6"] = [
            _family_row(
                op, space, rng, "c6", f"alpha={alpha:g}",
                "semigroup-2d", {"alpha": alpha},
                {"n_x": n_of("halfplane_n_x", 48), "n_psi": n_of("halfplane_n_psi", 49)},
                _TOLERANCES["c6"],
            )
        ]

    if wanted("c7"):
        out["c7"] = [
            _family_row(
                op, space, rng, "c7", f"alpha={alpha:g},m={m7}",
                "wave", {"alpha": alpha, "m": m7},
                {"n": n_of("wave_n", 2048)}, _TOLERANCES["c7"],
            )
        ]

    if wanted("c8"):
        out["c8"] = [
            _family_row(
                op, space, rng, "c8", f"alpha={alpha:g},m={m8}",
                "wave-taylor", {"alpha": alpha, "m": m8},
                {"n": n_of("taylor_n", 2048)}, _TOLERANCES["c8"],
            )
        ]

    return out


# ---------------------------------------------------------------------------
# the full report


def equivalence_report(
    A, space: SpaceSpec | None = None, params: dict | None = None, seed: int = 0
) -> SuiteReport:
    """Measure conditions (1)-(8) on one operator and cross-check them.

    Records the bridge ratio c2 / (2 pi c1), the ratios of every other
    condition against c2, the angle-growth exponents with their alpha
    cap, a beta sweep of the ray resolvents, and a doubled-grid
    convergence study for c2 and c7.  On an operator without a usable
    eigenbasis the same numbers are reported but the equivalence flag is
    withheld: the estimated quantities are still averages of matrix
    samples, yet the corpus sup is no longer attained by stationary
    phase, so the two sides are not claimed equal.
    """
    op = ops.sectorial(A)
    if space is None:
        space = SpaceSpec(p=2.0, n=op.dim)
    p = dict(params or {})
    alpha = float(p.get("alpha", 1.0))
    fit_tol = float(p.get("fit_tol", 0.15))
    beta_sweep = tuple(p.get("beta_sweep", (0.25, 0.5, 0.75)))
    gen = np.random.default_rng(seed)
    rows, runtimes = [], {}

    t0 = time.perf_counter()
    corpus = multiplier_corpus(
        op, alpha, size=int(p.get("corpus_size", 200)), seed=seed
    )
    c1 = condition_c1(op, space, corpus, rng=gen)
    runtimes["c1"] = round(time.perf_counter() - t0, 6)
    rows.append(c1)

    conds = condition_c2_to_c8(op, space, p, rng=gen)
    for key in sorted(conds):
        rows.extend(conds[key])
        runtimes[key] = round(
            sum(r.extra.get("seconds", 0.0) for r in conds[key]), 6
        )
    if not op.diagonalizable:
        # the growth caps come from the stationary-phase comparison, which
        # needs an eigenbasis; record the fits but withhold the assertion
        for row in rows:
            if "within" in row.extra:
                del row.extra["within"]
                row.extra["recorded_only"] = True

    values = {key: conds[key][0].value for key in conds}
    exponents = {
        key: r
        for key in ("c3", "c5")
        if key in conds
        for r in conds[key]
        if r.param == "exponent"
    }

    ratios = {}
    bridge = float("nan")
    if "c2" in values and c1.value > 0:
        bridge = values["c2"] / (2.0 * np.pi * c1.value)
        ratios["c2_over_2pi_c1"] = bridge
        rows.append(
            ConditionValue(
                condition="bridge",
                param="c2/(2 pi c1)",
                value=float(bridge),
                tolerance=_TOLERANCES["bridge"],
                grid={},
                finite=bool(np.isfinite(bridge)),
                extra={"within": bool(0.95 <= bridge <= 1.05)}
                if op.diagonalizable
                else {},
            )
        )
    for key in sorted(values):
        if key != "c2" and values.get("c2"):
            ratios[f"{key}_over_c2"] = values[key] / values["c2"]

    t0 = time.perf_counter()
    for b in beta_sweep:
        rows.append(
            _family_row(
                op, space, gen, "c3", f"beta={b:g}@theta={np.pi / 2:.6g}",
                "resolvent-ray", {"beta": b, "theta": np.pi / 2},
                {"n": 1024}, _TOLERANCES["c3"],
            )
        )
    runtimes["beta_sweep"] = round(time.perf_counter() - t0, 6)

    convergence = {}
    t0 = time.perf_counter()
    fine = condition_c2_to_c8(
        op, space, {**p, "refine": 2.0, "only": ("c2", "c7")}, rng=gen
    )
    for key in sorted(fine):
        base, refined = values[key], fine[key][0].value
        drift = abs(refined - base) / abs(base) if base else float("inf")
        convergence[key] = {
            "base": base,
            "refined": refined,
            "drift": drift,
        }
        rows.append(
            ConditionValue(
                condition=key,
                param="refined",
                value=refined,
                tolerance=_TOLERANCES[key],
                grid={"refine": 2.0},
                finite=bool(np.isfinite(refined)),
                extra={"drift": drift},
            )
        )
    runtimes["convergence"] = round(time.perf_counter() - t0, 6)

    all_finite = all(r.finite for r in rows)
    exponents_ok = all(r.extra.get("within", True) for r in exponents.values())
    flags = {
        "all_finite": bool(all_finite),
        "exponents_ok": bool(exponents_ok),
        "bridge_ok": bool(np.isfinite(bridge) and 0.95 <= bridge <= 1.05),
        "equivalence_asserted": bool(
            op.diagonalizable and all_finite and exponents_ok
        ),
        "zero_mode_reduced": op.reduction is not None,
        "diagonalizable": bool(op.diagonalizable),
    }
    if op.reduction is not None:
        flags["core_dim"] = int(op.reduction.core_dim)

    return SuiteReport(
        operator=op.name or f"matrix:{op.dim}",
        space=f"l{space.p:g}:{space.n}",
        params={
            "alpha": alpha,
            "beta": float(p.get("beta", 0.5)),
            "T": float(p.get("T", DEFAULT_T)),
            "fit_tol": fit_tol,
            "corpus_size": len(corpus),
            "beta_sweep": [float(b) for b in beta_sweep],
        },
        rows=rows,
        ratios=ratios,
        flags=flags,
        runtimes=runtimes,
        seed=seed,
        convergence=convergence,
    )


# ---------------------------------------------------------------------------
# the general averaged bound


def general_averaged_check(
    A, phi, alpha: float, space: SpaceSpec | None = None, n_t: int = 1024, rng=None
):
    """Averaged dilation bound against the transform-side supremum.

    Returns (bound, kernel_sup): the square-average bound of the
    dilation family {phi(tA)} over the geometric t grid with dt/t
    weights, and sup_xi |M phi(xi)| <xi>^alpha where M phi is the
    multiplicative transform of phi.  The first is controlled by the
    second times the imaginary-power bound of A.
    """
    op = ops.sectorial(A)
    if callable(phi) and not isinstance(phi, SampledFunction):
        phi = SampledFunction.from_callable(
            phi, "log", DEFAULT_S_LO, DEFAULT_S_HI, DEFAULT_S_N, name="phi"
        )
    if phi.coordinate != "log":
        raise DomainError("the dilation family needs a log-grid symbol")
    lo, hi = op.spectral_bounds()
    sg = phi.x
    t_lo, t_hi = sg[0] / lo, sg[-1] / hi
    if not t_lo < t_hi:
        raise CoverageError(
            "symbol grid too short to dilate across the whole spectrum"
        )
    ts, w = log_grid(t_lo, t_hi, n_t)

    if op.diagonalizable:
        lam = op.eigenvalues
        if float(np.max(np.abs(lam.imag))) > 1e-9 * float(np.max(np.abs(lam))):
            if phi.fn is None:
                raise DomainError(
                    "complex spectrum needs a closed-form symbol to dilate"
                )
            fv = np.asarray(phi.fn(np.outer(ts, lam)), dtype=np.complex128)
        else:
            fv = np.stack([phi.eval(t * lam.real) for t in ts])
        mats = _apply_eigvals_stack(op, fv)
    else:
        if phi.fn is None:
            raise NotSectorialError(
                "a defective matrix needs a closed-form symbol to dilate"
            )
        mats = np.stack(
            [ops._matrix_function(op, lambda x, _t=t: phi.fn(_t * x)) for t in ts]
        )
    fam = OperatorFamily(
        label=f"dilation[{phi.name or 'phi'}]",
        points=ts,
        weights=w,
        matrices=mats,
        measure="dt/t",
    )
    use_space = None if space is None or float(space.p) == 2.0 else space
    bound = float(r_l2_bound(fam, use_space, rng=rng).lower)

    M = ops.mellin_transform(phi)
    xi = M.u
    kernel_sup = float(np.max(np.abs(M.values) * (1.0 + xi * xi) ** (alpha / 2.0)))
    return bound, kernel_sup


# ---------------------------------------------------------------------------
# randomized block two-sidedness


def paley_littlewood_check(
    A,
    space: SpaceSpec | None = None,
    trials: int = 100,
    seed: int = 0,
    partition=None,
    indices=None,
    exact_limit: int = 12,
    samples: int = 4096,
):
    """Two-sided randomized square-function ratios over dyadic blocks.

    For each random unit x the ratio E || sum_n eps_n psi_n(A) x || / ||x||
    is collected (first moment over independent signs); the return value
    is (min, max) over the trials.  The windows must sum to one on the
    spectrum, otherwise CoverageError.  Sign enumeration is exact up to
    `exact_limit` blocks, Monte Carlo with `samples` draws beyond.
    """
    from .rbound import rademacher_norm

    op = ops.sectorial(A)
    if not op.diagonalizable:
        raise NotSectorialError(
            "the block test needs an eigenbasis: dyadic windows are not analytic"
        )
    if space is None:
        space = SpaceSpec(p=2.0, n=op.dim)
    if space.n != op.dim:
        raise DomainError("space dimension does not match the operator")
    lam = op.eigenvalues
    if float(np.max(np.abs(lam.imag))) > 1e-9 * float(np.max(np.abs(lam))):
        raise DomainError("dyadic blocks slice the positive axis; spectrum is complex")
    lamr = lam.real
    pou = partition if partition is not None else make_partition("dyadic")
    lo, hi = op.spectral_bounds()
    idx = list(indices) if indices is not None else list(pou.indices_for(lo, hi))
    unity = np.zeros_like(lamr)
    for n in idx:
        unity = unity + np.asarray(pou.window(n)(lamr), dtype=float)
    if float(np.max(np.abs(unity - 1.0))) > 1e-8:
        raise CoverageError(
            f"windows sum to {unity.min():.3f}..{unity.max():.3f} on the "
            "spectrum; the blocks do not cover it"
        )
    blocks = []
    for n in idx:
        wv = np.asarray(pou.window(n)(lamr), dtype=np.complex128)
        if float(np.max(np.abs(wv))) < 1e-14:
            continue
        blocks.append(_apply_eigvals(op, wv))
    if not blocks:
        raise CoverageError("no window meets the spectrum")

    gen = np.random.default_rng(seed)
    ratios = np.empty(trials)
    for i in range(trials):
        x = gen.standard_normal(op.dim) + 1j * gen.standard_normal(op.dim)
        x /= space.vector_norm(x)
        X = np.stack([B @ x for B in blocks])
        mean, _, _ = rademacher_norm(
            X, space, rng=gen, exact_limit=exact_limit, samples=samples
        )
        ratios[i] = mean
    return float(ratios.min()), float(ratios.max())


# ---------------------------------------------------------------------------
# splitting the shifted semigroup symbol


def sea_to_ha_decomposition(z, n: int = 1 << 12):
    """Split e^{-z lambda} into a sector-bounded part and a square part.

    The bounded part g_z(lambda) = e^{-(z+1) lambda} is measured in sup
    norm on the boundary rays r e^{+-i pi/8}; the remainder is read off
    through h_z(t) = e^{-zt}(1 - e^{-t}) in the first-order square norm

        ||h_z||^2 = int_0^inf (|h_z|^2 + |t h_z'|^2) dt/t.

    Returns (g_norm, h_norm).  Requires |z| = 1 and Re z > 0; the square
    norm blows up like 1/Re z as z approaches the imaginary axis, which
    is the blow-up rate the slope diagnostics track.
    """
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-9:
        raise DomainError(f"z must lie on the unit circle, got |z| = {abs(z):.6g}")
    x = z.real
    if not x > 0:
        raise DomainError("need Re z > 0")

    t, w = log_grid(1e-7, max(60.0, 60.0 / x), n)
    decay = np.exp(-z * t)
    ramp = -np.expm1(-t)  # 1 - e^{-t}
    h = decay * ramp
    hp = decay * (np.exp(-t) - z * ramp)
    h_norm = math.sqrt(float(np.sum((np.abs(h) ** 2 + np.abs(t * hp) ** 2) * w)))

    r = np.concatenate([[0.0], np.logspace(-6, math.log10(60.0 / x), 513)])
    g_norm = 0.0
    for sgn in (+1.0, -1.0):
        ray = np.exp(sgn * 1j * np.pi / 8.0)
        g_norm = max(g_norm, float(np.max(np.exp(-r * ((z + 1.0) * ray).real))))
    return float(g_norm), float(h_norm)


# ---------------------------------------------------------------------------
# norm panel for one symbol


def multiplier_experiment(A, f: SampledFunction, alpha: float = 1.0, gamma: float = 1.0) -> MultiplierExperiment:
    """Norms of one symbol plus the error of applying it to A.

    The panel holds the weighted-transform norm, the localized norm
    (when alpha > 1/2), and the dyadic-block norm of the log-variable
    symbol.  The applied error compares the imaginary-power calculus
    against direct eigenvalue evaluation; it is NaN when no closed form
    or eigenbasis is available for the reference.
    """
    op = ops.sectorial(A)
    norms = {"sobexp": sobexp_norm(f, alpha)}
    if alpha > 0.5:
        norms["hoermander"] = hoermander_norm(f, alpha)
    norms["mihlin"] = mihlin_norm(f, gamma)

    applied = sobolev_calculus_apply(op, f)
    err = float("nan")
    if op.diagonalizable:
        ref = _apply_eigvals(op, f.eval(np.abs(op.eigenvalues)))
        scale = float(np.linalg.norm(ref, 2))
        if scale > 0:
            err = float(np.linalg.norm(applied - ref, 2) / scale)
        else:
            err = float(np.linalg.norm(applied, 2))
    return MultiplierExperiment(
        label=f.name or "symbol", norms=norms, applied_error=err
    )
