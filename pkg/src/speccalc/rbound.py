"""Randomized-sum norms and R-bound estimates for matrix families.

Two kinds of object are estimated here.  For a finite set of matrices
acting on ell^p, r_bound brackets the Rademacher bound

    R = sup sqrt( E || sum_j eps_j T_j x_j ||^2 / E || sum_j eps_j x_j ||^2 )

over finite selections and nonzero vector tuples.  On ell^2 the
Rademacher sum is orthogonal, the supremum collapses to the largest
operator norm and the bracket is exact.  On other ell^p the lower end
comes from exact singleton norms plus a randomized witness search and
the upper end from the square-sum bound and transfer through ell^2.

For a weighted family of samples N(t_k) of a continuous family, the
averaged (square function) bound

    sup_{|x| = |x'| = 1} sqrt( sum_k w_k |<N_k x, x'>|^2 )

is computed by an alternating bilinear power iteration, which is exact
up to the local search (each half step solves its eigenproblem
globally, and the iteration is monotone).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError

DEFAULT_SEED = 20240601


def _rng(rng):
    if rng is None:
        return np.random.default_rng(DEFAULT_SEED)
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    return rng


# ---------------------------------------------------------------------------
# containers


@dataclass
class SpaceSpec:
    """ell^p norm on C^n; p may be inf."""

    p: float
    n: int

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise DomainError("p must be >= 1")
        if self.n < 1:
            raise DomainError("dimension must be positive")

    def vector_norm(self, v) -> float:
        v = np.abs(np.asarray(v))
        if np.isinf(self.p):
            return float(v.max())
        return float(np.sum(v**self.p) ** (1.0 / self.p))


@dataclass
class OperatorFamily:
    """Weighted samples N(t_k) of an operator family.

    points holds the parameter values (K,) or (K, d); weights the
    quadrature weights of the measure named in `measure`; matrices the
    (K, n, n) samples.
    """

    label: str
    points: np.ndarray
    weights: np.ndarray
    matrices: np.ndarray
    measure: str
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=np.complex128)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise DomainError("matrices must be a (K, n, n) stack")
        if len(self.weights) != self.matrices.shape[0]:
            raise DomainError("one weight per sample required")
        if np.any(self.weights < 0):
            raise DomainError("weights must be nonnegative")

    def __len__(self) -> int:
        return self.matrices.shape[0]

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


@dataclass
class RBoundEstimate:
    lower: float
    upper: float
    method: str
    witness: dict = field(default_factory=dict)
    rng_seed: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-12):
            raise DomainError("estimate bracket is inverted")


# ---------------------------------------------------------------------------
# randomized sums of vectors


def _p_of(space) -> float:
    """Accept a SpaceSpec or a bare exponent."""
    return float(space.p) if isinstance(space, SpaceSpec) else float(space)


def rademacher_norm(X, space=2.0, rng=None, exact_limit: int = 20, samples: int = 4096):
    """E || sum_k eps_k X[k] ||_p over independent signs.

    `space` is a SpaceSpec or a bare p.  Exact enumeration for
    K <= exact_limit, otherwise Monte Carlo with `samples` draws.
    Returns (mean, stderr, exact_flag); stderr is 0.0 for the
    enumerated case.
    """
    p = _p_of(space)
    X = np.ascontiguousarray(X, dtype=np.complex128)
    if X.ndim != 2:
        raise DomainError("X must be (K, n)")
    if isinstance(space, SpaceSpec) and X.shape[1] != space.n:
        raise DomainError("space dimension does not match the vectors")
    K = X.shape[0]
    if K <= exact_limit:
        return float(_kernels.enum_mean_norm(X, float(p))), 0.0, True
    gen = _rng(rng)
    signs = np.where(gen.random((samples, K)) < 0.5, -1.0, 1.0)
    mean, stderr = _kernels.mc_mean_norm(X, float(p), signs)
    return float(mean), float(stderr), False


def square_sum_norm(X, space=2.0) -> float:
    """|| (sum_k |X[k]|^2)^{1/2} ||_p, the square function of the rows."""
    p = _p_of(space)
    X = np.asarray(X, dtype=np.complex128)
    if isinstance(space, SpaceSpec) and X.shape[1] != space.n:
        raise DomainError("space dimension does not match the vectors")
    s = np.sqrt(np.sum(np.abs(X) ** 2, axis=0))
    if np.isinf(p):
        return float(s.max())
    return float(np.sum(s**p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# operator norms on ell^p


def operator_norm(T, p: float) -> float:
    """||T||_{p->p}; closed forms for p in {1, 2, inf}, ascent otherwise."""
    T = np.asarray(T, dtype=np.complex128)
    if p == 1.0:
        return float(np.max(np.sum(np.abs(T), axis=0)))
    if np.isinf(p):
        return float(np.max(np.sum(np.abs(T), axis=1)))
    if p == 2.0:
        return float(np.linalg.norm(T, 2))
    # general p: maximize ||Tx||_p over the unit sphere by dual ascent
    n = T.shape[1]
    gen = np.random.default_rng(7)
    best = 0.0
    q = p / (p - 1.0)
    for _ in range(4):
        x = gen.standard_normal(n) + 1j * gen.standard_normal(n)
        x /= np.linalg.norm(x, p)
        for _ in range(200):
            y = T @ x
            ny = np.linalg.norm(y, p)
            if ny == 0:
                break
            # gradient direction: T^H (|y|^{p-1} sign y), renormalized in p
            g = T.conj().T @ (np.abs(y) ** (p - 1.0) * np.sign(y))
            gn = np.abs(g) ** (q - 1.0) * np.sign(g)
            nx = np.linalg.norm(gn, p)
            if nx == 0:
                break
            gn /= nx
            if np.linalg.norm(gn - x, p) < 1e-13:
                x = gn
                break
            x = gn
        best = max(best, float(np.linalg.norm(T @ x, p)))
    return best


def _transfer_constant(p: float, n: int) -> float:
    # || id: l2 -> lp || * || id: lp -> l2 || = n^{|1/p - 1/2|}
    ip = 0.0 if np.isinf(p) else 1.0 / p
    return float(n ** abs(ip - 0.5))


# ---------------------------------------------------------------------------
# R-bound of a finite family


def _mean_sq_norm(X, p, rng, exact_limit: int = 14, samples: int = 2048) -> float:
    """E || sum_k eps_k X[k] ||_p^2, enumerated exactly for small K."""
    X = np.asarray(X, dtype=np.complex128)
    K, n = X.shape
    if K <= exact_limit:
        # fix eps_K = +1 by symmetry
        bits = np.arange(1 << max(K - 1, 0))[:, None] >> np.arange(K)[None, :]
        signs = np.where(bits & 1, -1.0, 1.0)
        signs[:, -1] = 1.0
    else:
        signs = np.where(_rng(rng).random((samples, K)) < 0.5, -1.0, 1.0)
    sums = signs @ X
    a = np.abs(sums)
    if np.isinf(p):
        norms = a.max(axis=1)
    else:
        norms = np.sum(a**p, axis=1) ** (1.0 / p)
    return float(np.mean(norms**2))


def _ratio(mats, X, p, rng) -> float:
    """sqrt(E||sum eps T_j x_j||^2 / E||sum eps x_j||^2) for one tuple."""
    TX = np.stack([mats[j] @ X[j] for j in range(len(mats))])
    num = _mean_sq_norm(TX, p, rng)
    den = _mean_sq_norm(X, p, rng)
    return math.sqrt(num / den) if den > 0 else 0.0


def r_bound(
    mats,
    space: SpaceSpec,
    rng=None,
    restarts: int = 16,
    steps: int = 60,
) -> RBoundEstimate:
    """Bracket the R-bound of a finite matrix family on ell^p.

    On ell^2 the value is exactly max_j ||T_j||_2 (Rademacher sums are
    orthogonal in Hilbert space) and lower == upper.  Otherwise the
    lower estimate is the best witness found (singletons are exact) and
    the upper estimate min(sqrt(sum_j ||T_j||_p^2), transfer through
    ell^2).
    """
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim == 2:
        mats = mats[None]
    K, n, _ = mats.shape
    if n != space.n:
        raise DomainError("space dimension does not match the matrices")
    p = float(space.p)
    norms_p = np.array([operator_norm(T, p) for T in mats])
    norms_2 = np.array([operator_norm(T, 2.0) for T in mats])

    if p == 2.0:
        v = float(norms_2.max())
        j = int(norms_2.argmax())
        return RBoundEstimate(
            lower=v,
            upper=v,
            method="hilbert-exact",
            witness={"operator": j},
            diagnostics={"operator_norms": norms_2},
        )

    seed = DEFAULT_SEED if rng is None else None
    gen = _rng(rng)
    lower = float(norms_p.max())
    witness = {"operator": int(norms_p.argmax()), "kind": "singleton"}
    sizes = sorted({s for s in (1, 2, min(4, K), K) if 1 <= s <= K})
    for _ in range(restarts):
        k = int(gen.choice(sizes))
        idx = gen.choice(K, size=k, replace=False)
        sub = mats[idx]
        X = gen.standard_normal((k, n)) + 1j * gen.standard_normal((k, n))
        val = _ratio(sub, X, p, gen)
        for _ in range(steps):
            Y = X + 0.3 * (
                gen.standard_normal((k, n)) + 1j * gen.standard_normal((k, n))
            )
            cand = _ratio(sub, Y, p, gen)
            if cand > val:
                val, X = cand, Y
        if val > lower:
            lower = val
            witness = {"operator": idx.tolist(), "kind": "search", "vectors": X}

    upper = min(
        float(np.sqrt(np.sum(norms_p**2))),
        _transfer_constant(p, n) * float(norms_2.max()),
    )
    upper = max(upper, lower)
    return RBoundEstimate(
        lower=lower,
        upper=upper,
        method="search+transfer",
        witness=witness,
        rng_seed=seed,
        diagnostics={"operator_norms_p": norms_p, "operator_norms_2": norms_2},
    )


def r_l1_vs_rbound(mats, space: SpaceSpec, rng=None, ball_samples: int = 64):
    """(R, R_L1): the family's R-bound and that of its l1-average set.

    R_L1 estimates the R-bound of {sum_k f_k T_k : sum_k |f_k| <= 1},
    sampled at the vertices (the family itself, so R <= R_L1 is
    structural) plus random points of the l1 sphere.  The two-point
    contraction gives R_L1 <= 2 R on the other side.
    """
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim == 2:
        mats = mats[None]
    K = mats.shape[0]
    gen = _rng(rng)
    R = r_bound(mats, space, rng=gen)
    ball = [T for T in mats]
    for _ in range(ball_samples):
        f = gen.standard_normal(K) + 1j * gen.standard_normal(K)
        f /= np.sum(np.abs(f))
        ball.append(np.tensordot(f, mats, axes=(0, 0)))
    RL1 = r_bound(np.stack(ball), space, rng=gen)
    # any witness for the vertex subfamily witnesses the ball family too
    if R.lower > RL1.lower:
        RL1 = replace(RL1, lower=R.lower, upper=max(RL1.upper, R.lower))
    return R, RL1


# ---------------------------------------------------------------------------
# averaged (square function) bound of a weighted family


def averaged_operator(family: OperatorFamily, h) -> np.ndarray:
    """The average integral sum_k w_k h_k N_k."""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (len(family),):
        raise DomainError("h must supply one value per family sample")
    return np.tensordot(family.weights * h, family.matrices, axes=(0, 0))


def _block_legendre_basis(weights: np.ndarray, n_blocks: int = 16, degree: int = 3):
    """Orthonormal piecewise polynomials in L2 of the weighted grid.

    The sample indices are split into contiguous blocks (dyadic pieces
    of a log grid stay contiguous) and on each block the monomials up
    to `degree` are Gram-Schmidt orthonormalized against the quadrature
    weights.  Rows are L2(mu)-orthonormal functions on the grid.
    """
    K = len(weights)
    n_blocks = max(1, min(n_blocks, K // (degree + 1), K))
    edges = np.linspace(0, K, n_blocks + 1).astype(int)
    rows = []
    for b in range(n_blocks):
        sl = slice(edges[b], edges[b + 1])
        m = edges[b + 1] - edges[b]
        if m == 0:
            continue
        xi = np.linspace(-1.0, 1.0, m)
        wb = weights[sl]
        basis = []
        for d in range(min(degree + 1, m)):
            v = xi**d
            for q in basis:
                v = v - np.sum(wb * v * q.conj()) * q
            nrm = math.sqrt(float(np.sum(wb * np.abs(v) ** 2)))
            if nrm < 1e-14:
                continue
            v = v / nrm
            basis.append(v)
            row = np.zeros(K, dtype=np.complex128)
            row[sl] = v
            rows.append(row)
    return np.stack(rows)


def r_l2_bound(
    family: OperatorFamily,
    space: SpaceSpec | None = None,
    restarts: int = 8,
    iters: int = 80,
    tol: float = 1e-12,
    rng=None,
    basis_samples: int = 256,
) -> RBoundEstimate:
    """R[L2] bound of the averaged family N_h = sum_k w_k h(k) N_k.

    On ell^2 (space None or p = 2) this is
    sup_{|x|=|x'|=1} sqrt(sum_k w_k |<N_k x, x'>|^2), found by
    alternating eigen steps: for fixed x' the optimal x is the top
    eigenvector of sum_k w_k (N_k^H x')(N_k^H x')^H, and symmetrically.
    Monotone in the objective; restarted from random and canonical
    starts.  The flattened Gram bound (optimum over all matrices, not
    just rank-one x x'^H) is reported as a diagnostic upper bound.

    On other spaces the unit ball of L2(mu) is sampled: an orthonormal
    piecewise-polynomial basis on blocks of the grid, the basis
    elements themselves plus `basis_samples` random unit combinations,
    and the R-bound of the resulting averaged operators is bracketed.
    """
    N = family.matrices
    w = family.weights
    K, n, _ = N.shape
    if space is not None and space.n != n:
        raise DomainError("space dimension does not match the family")
    if space is not None and float(space.p) != 2.0:
        gen = _rng(rng)
        H = _block_legendre_basis(w)
        hs = [h for h in H]
        # matched filter: weight each sample by the family's local strength
        prof = np.array([np.linalg.norm(M, 2) for M in N])
        nrm = math.sqrt(float(np.sum(w * prof**2)))
        if nrm > 0:
            hs.append((prof / nrm).astype(np.complex128))
        for _ in range(basis_samples):
            c = gen.standard_normal(len(H)) + 1j * gen.standard_normal(len(H))
            c /= np.linalg.norm(c)
            hs.append(c @ H)
        mats = np.stack([averaged_operator(family, h) for h in hs])
        est = r_bound(mats, space, rng=gen)
        est.method = "unit-ball-sample"
        est.diagnostics["basis_functions"] = len(H)
        est.diagnostics["ball_samples"] = len(hs)
        return est
    gen = _rng(rng)

    # the objective sum_k w_k |<N_k x, x'>|^2 only sees the family through
    # the (n^2, n^2) Gram tensor, so for long families the K dimension is
    # collapsed once and every iteration runs on the small tensor
    T4 = None
    if n * n <= 1024 and K >= 2 * n * n:
        V = N.reshape(K, n * n)
        T4 = ((V.conj() * w[:, None]).T @ V).reshape(n, n, n, n)

    if T4 is not None:

        def half_step_x(xp):
            G = np.einsum("ijkl,i,k->jl", T4, xp, xp.conj())
            vals, vecs = np.linalg.eigh(G)
            return float(vals[-1]), vecs[:, -1]

        def half_step_xp(x):
            H = np.einsum("ijkl,j,l->ik", T4.conj(), x, x.conj())
            vals, vecs = np.linalg.eigh(H)
            return float(vals[-1]), vecs[:, -1]

    else:

        def half_step_x(xp):
            y = np.einsum("kji,j->ki", N.conj(), xp)  # N_k^H x'
            G = np.einsum("k,ki,kj->ij", w, y, y.conj())
            vals, vecs = np.linalg.eigh(G)
            return float(vals[-1]), vecs[:, -1]

        def half_step_xp(x):
            z = np.einsum("kij,j->ki", N, x)  # N_k x
            H = np.einsum("k,ki,kj->ij", w, z, z.conj())
            vals, vecs = np.linalg.eigh(H)
            return float(vals[-1]), vecs[:, -1]

    starts = [None]
    S = np.tensordot(w, N, axes=(0, 0))
    u, _, vh = np.linalg.svd(S)
    starts.append(u[:, 0])
    for _ in range(restarts):
        v = gen.standard_normal(n) + 1j * gen.standard_normal(n)
        starts.append(v / np.linalg.norm(v))

    best, bx, bxp = 0.0, None, None
    for s in starts:
        xp = s if s is not None else np.eye(n, dtype=np.complex128)[:, 0]
        val = 0.0
        for _ in range(iters):
            v1, x = half_step_x(xp)
            v2, xp = half_step_xp(x)
            if v2 <= val * (1.0 + tol):
                val = max(val, v2)
                break
            val = v2
        if val > best:
            best, bx, bxp = val, x, xp

    diag = {}
    upper = float("inf")
    if T4 is not None:
        upper = float(np.linalg.eigvalsh(T4.reshape(n * n, n * n))[-1])
        diag["flattened_gram"] = math.sqrt(max(upper, 0.0))
    elif n * n <= 4096:
        vecs = N.reshape(K, n * n)
        M = (vecs.conj() * w[:, None]).T @ vecs
        upper = float(np.linalg.eigvalsh(M)[-1])
        diag["flattened_gram"] = math.sqrt(max(upper, 0.0))
    value = math.sqrt(max(best, 0.0))
    return RBoundEstimate(
        lower=value,
        upper=diag.get("flattened_gram", value),
        method="bilinear-power",
        witness={"x": bx, "x_prime": bxp},
        diagnostics=diag,
    )


def family_value(family: OperatorFamily, **kw) -> float:
    """Shorthand for the bilinear square-function value of a family."""
    return r_l2_bound(family, **kw).lower


# ---------------------------------------------------------------------------
# Mellin transforms at the family level


@dataclass
class MellinTail:
    """Analytic continuation of the truncated power-law tail.

    If the samples behave like coefficient * s^{exponent} (modulo terms
    that oscillate themselves to integrability) beyond the cutoff S,
    the missing integral of s^{exponent + it} ds/s is
    -coefficient * S^{exponent + it} / (exponent + it), valid whenever
    Re(exponent) < 0.
    """

    coefficient: np.ndarray
    exponent: complex
    cutoff: float

    def __post_init__(self):
        if complex(self.exponent).real >= 0:
            raise DomainError("tail exponent must have negative real part")


def mellin_kernel(family: OperatorFamily, t_grid, exponent: float = 0.0) -> np.ndarray:
    """Discrete Mellin character rows s_k^{exponent + i t} w_k.

    The family weights must already encode the intended measure (ds/s
    for a Mellin integral); they are folded into the kernel rows so the
    kernel acts on bare samples.
    """
    pts = np.asarray(family.points, dtype=float)
    if pts.ndim != 1 or np.any(pts <= 0):
        raise DomainError("Mellin kernel needs 1-D positive sample points")
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    z = exponent + 1j * t
    return np.exp(np.outer(z, np.log(pts))) * family.weights[None, :]


def kernel_norm(kernel: np.ndarray, w_in: np.ndarray, w_out: np.ndarray) -> float:
    """L2(mu_in) -> L2(mu_out) norm of a discrete kernel with folded weights."""
    kernel = np.asarray(kernel, dtype=np.complex128)
    d_out = np.sqrt(np.asarray(w_out, dtype=float))
    d_in = np.sqrt(np.asarray(w_in, dtype=float))
    if np.any(d_in <= 0):
        raise DomainError("input weights must be positive")
    return float(np.linalg.norm(d_out[:, None] * kernel / d_in[None, :], 2))


def transform_family(
    family: OperatorFamily,
    kernel: np.ndarray,
    out_points=None,
    out_weights=None,
    out_measure: str = "count",
    tail: MellinTail | None = None,
    label: str | None = None,
) -> OperatorFamily:
    """Apply a linear kernel to the family samples: M_t = sum_k kernel[t,k] N_k.

    The kernel is any matrix on the grid samples (identity, discrete
    Fourier or Mellin characters, multiplication by a weight); rows are
    expected to carry the quadrature weights already, as mellin_kernel
    does.  An optional MellinTail adds the analytic continuation of the
    truncated power tail.  Returns a new OperatorFamily on out_points.
    """
    kernel = np.asarray(kernel, dtype=np.complex128)
    if kernel.ndim != 2 or kernel.shape[1] != len(family):
        raise DomainError("kernel must be (T, K) against K family samples")
    out = np.tensordot(kernel, family.matrices, axes=(1, 0))
    T = kernel.shape[0]
    if tail is not None:
        if out_points is None:
            raise DomainError("a Mellin tail needs the output frequencies")
        t = np.asarray(out_points, dtype=float)
        g = complex(tail.exponent) + 1j * t
        fac = -np.power(tail.cutoff, g) / g
        out = out + fac[:, None, None] * np.asarray(tail.coefficient)[None, :, :]
    if out_points is None:
        out_points = np.arange(T, dtype=float)
    if out_weights is None:
        out_weights = np.ones(T)
    return OperatorFamily(
        label=label or f"{family.label}|transformed",
        points=np.asarray(out_points),
        weights=np.asarray(out_weights, dtype=float),
        matrices=out,
        measure=out_measure,
        params=dict(family.params),
        diagnostics={"source": family.label},
    )
