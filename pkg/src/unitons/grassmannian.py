"""The finite Grassmannian model: lambda-invariant subspaces of C^{rn}.

Block k of a C^{rn} vector holds the lambda^k coefficient of a polynomial
truncated at degree r.  Loops act on these blocks; the shift map is
multiplication by lambda.  This module converts between data arrays, loop
fibers and W subspaces, and factorizes loops back into projection chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BadShape,
    DegreeNoDrop,
    NonProperUniton,
    NoTermination,
    NotLambdaInvariant,
    SingularLoop,
)
from .meromorphic import MeroVector
from .projections import (
    RANK_TOL,
    ProjChain,
    Span,
    image_span,
    max_principal_angle,
    orthonormal_basis,
    projection_pair,
    s_rows,
)

LAMBDA_TOL = 1e-8     # allowed shift-invariance defect of a W subspace
BOUNDARY_TOL = 1e-9   # boundary coefficients must vanish below this when dividing
TRIM_TOL = 1e-9       # a loop coefficient below this is treated as zero


class LoopPoly:
    """Polynomial loop T_0 + lambda T_1 + ... + lambda^r T_r at one fiber."""

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2]:
            raise BadShape("coeffs must be (r+1, n, n)")
        self.coeffs = coeffs

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def at(self, lam: complex) -> np.ndarray:
        out = np.zeros((self.n, self.n), np.complex128)
        for i in range(self.coeffs.shape[0]):
            out += lam**i * self.coeffs[i]
        return out

    def unitarity_defect(self, lambdas: Sequence[complex]) -> float:
        eye = np.eye(self.n)
        return float(
            max(np.abs(self.at(lam) @ self.at(lam).conj().T - eye).max() for lam in lambdas)
        )

    def trimmed(self, tol: float = TRIM_TOL) -> "LoopPoly":
        deg = self.degree
        while deg > 0 and np.abs(self.coeffs[deg]).max() <= tol:
            deg -= 1
        return LoopPoly(self.coeffs[: deg + 1])

    def padded(self, degree: int) -> "LoopPoly":
        if degree < self.degree:
            raise BadShape("cannot pad below current degree")
        out = np.zeros((degree + 1, self.n, self.n), np.complex128)
        out[: self.degree + 1] = self.coeffs
        return LoopPoly(out)

    @classmethod
    def from_chain(cls, chain: ProjChain) -> "LoopPoly":
        from .builder import extended_coefficients

        return cls(extended_coefficients(chain.pis, chain.perps, chain.ambient_dim))

    @classmethod
    def identity(cls, n: int) -> "LoopPoly":
        return cls(np.eye(n, dtype=np.complex128)[None, :, :])


def shift_matrix(r: int, n: int) -> np.ndarray:
    """Multiplication by lambda on C^{rn}: (L_0..L_{r-1}) -> (0, L_0..L_{r-2})."""
    Z = np.zeros((r * n, r * n), np.complex128)
    for k in range(r - 1):
        Z[(k + 1) * n : (k + 2) * n, k * n : (k + 1) * n] = np.eye(n)
    return Z


class WSubspace:
    """Subspace of H_+/lambda^r H_+ ~ C^{rn}, closed under the lambda shift."""

    def __init__(self, r: int, n: int, basis: np.ndarray, validate: bool = True):
        basis = np.asarray(basis, dtype=np.complex128)
        if basis.shape[0] != r * n:
            raise BadShape("basis rows must equal r*n")
        self.r = r
        self.n = n
        self.basis = basis
        if validate and self.lambda_defect() > LAMBDA_TOL:
            raise NotLambdaInvariant(
                f"shift-invariance defect {self.lambda_defect():.2e} exceeds {LAMBDA_TOL:.0e}"
            )

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def span(self) -> Span:
        return Span(self.basis, self.r * self.n, validate=False)

    def lambda_defect(self) -> float:
        """max over shifted basis columns of the relative distance to the span."""
        if self.dim == 0:
            return 0.0
        shifted = shift_matrix(self.r, self.n) @ self.basis
        proj = self.basis @ (self.basis.conj().T @ shifted)
        out = 0.0
        for c in range(shifted.shape[1]):
            nv = np.linalg.norm(shifted[:, c])
            if nv > 1e-12:
                out = max(out, float(np.linalg.norm(shifted[:, c] - proj[:, c]) / nv))
        return out

    def block(self, s: int) -> np.ndarray:
        return self.basis[s * self.n : (s + 1) * self.n, :]


def binomial_transform(column: Sequence[MeroVector], inverse: bool = False) -> list[MeroVector]:
    """L_i = sum_l C(i,l) H_l, or its alternating-sign inverse (exact)."""
    col = list(column)
    out = []
    for i in range(len(col)):
        if inverse:
            acc = col[i].scale((-1) ** 0 * math.comb(i, i))
            for ell in range(i):
                acc = acc + col[ell].scale((-1) ** (i - ell) * math.comb(i, ell))
        else:
            acc = col[0].scale(math.comb(i, 0))
            for ell in range(1, i + 1):
                acc = acc + col[ell].scale(math.comb(i, ell))
        out.append(acc)
    return out


def x_columns_from_data(data) -> list[list[MeroVector]]:
    """Binomial transform of every column: the X spanning set of the model."""
    return [binomial_transform(col) for col in data.columns]


def w_from_x(
    x_columns: Sequence[Sequence[MeroVector]],
    z: complex,
    rank_tol: float = RANK_TOL,
) -> WSubspace:
    """W = X + lambda X_(1) + ... + lambda^{r-1} X_(r-1) + lambda^r H_+ at z."""
    cols = [tuple(c) for c in x_columns]
    if not cols:
        raise BadShape("need at least one spanning section")
    r = len(cols[0])
    n = cols[0][0].n
    vecs = []
    for col in cols:
        if len(col) != r:
            raise BadShape("all sections must have r blocks")
        ders = [col]
        for _ in range(r - 1):
            ders.append(tuple(v.derivative() for v in ders[-1]))
        for k in range(r):
            for m in range(k + 1):
                u = np.concatenate([v.eval(z) for v in ders[m]])
                w = np.zeros(r * n, np.complex128)
                if k == 0:
                    w = u
                else:
                    w[k * n :] = u[: (r - k) * n]
                vecs.append(w)
    basis = orthonormal_basis(np.column_stack(vecs), rank_tol)
    return WSubspace(r, n, basis.basis)


def w_from_loop(loop: LoopPoly, rank_tol: float = RANK_TOL) -> WSubspace:
    """W = Phi(H_+) mod lambda^r H_+, from the coefficient vectors of Phi lambda^k e_j."""
    r, n = loop.degree, loop.n
    if r == 0:
        raise BadShape("degree-0 loop: W is all of H_+, not representable here")
    vecs = []
    for k in range(r):
        for j in range(n):
            v = np.zeros(r * n, np.complex128)
            for m in range(k, r):
                if m - k <= loop.degree:
                    v[m * n : (m + 1) * n] = loop.coeffs[m - k][:, j]
            vecs.append(v)
    basis = orthonormal_basis(np.column_stack(vecs), rank_tol)
    try:
        return WSubspace(r, n, basis.basis)
    except NotLambdaInvariant as exc:
        raise SingularLoop(str(exc)) from exc


def iwasawa_factorize(w: WSubspace, rank_tol: float = RANK_TOL) -> ProjChain:
    """Left-to-right geometric Iwasawa factorization: alpha_i = (sum_s S^{i-1}_s P_s) W.

    Non-proper steps (alpha_i zero or full) yield +-I factors and are reported
    through the chain's ranks rather than raised.
    """
    if w.lambda_defect() > LAMBDA_TOL:
        raise NotLambdaInvariant("W is not closed under the lambda shift")
    r, n = w.r, w.n
    pis: list[np.ndarray] = []
    perps: list[np.ndarray] = []
    for i in range(1, r + 1):
        S = s_rows(pis, perps, n)  # S^{i-1}_s for s = 0..i-1
        M = np.zeros((n, w.dim), np.complex128)
        for s in range(i):
            M += S[s] @ w.block(s)
        # rank against the unit operator scale: degenerate steps collapse to 0 or C^n
        alpha = image_span(M, rank_tol)
        pi, perp = projection_pair(alpha)
        pis.append(pi)
        perps.append(perp)
    return ProjChain(list(zip(pis, perps)), validate=False)


def kernel_factorize_fiber(
    loop: LoopPoly,
    rank_tol: float = RANK_TOL,
    boundary_tol: float = BOUNDARY_TOL,
    reality_tol: float = 1e-10,
) -> ProjChain:
    """Top-down factorization alpha_i = ker T_i^{Phi_i}, dividing out one factor at a time."""
    r, n = loop.degree, loop.n
    T = [loop.coeffs[i].copy() for i in range(r + 1)]
    if np.abs(T[0]).max() <= TRIM_TOL or np.abs(T[r]).max() <= TRIM_TOL:
        raise DegreeNoDrop("loop must have non-zero constant and top coefficients")
    if max(np.abs(T[0] @ T[r].conj().T).max(), np.abs(T[r].conj().T @ T[0]).max()) > reality_tol:
        raise DegreeNoDrop("reality condition T_0 T_r^* = 0 fails; not an extended-solution fiber")
    pairs_rev: list[tuple[np.ndarray, np.ndarray]] = []
    eye = np.eye(n, dtype=np.complex128)
    for i in range(r, 0, -1):
        _, sv, vh = np.linalg.svd(T[i])
        smax = sv[0] if sv.size else 0.0
        rank = int(np.sum(sv > rank_tol * smax)) if smax > 0 else 0
        ker_dim = n - rank
        if ker_dim == 0 or ker_dim == n:
            raise NonProperUniton(f"ker T_{i} has dimension {ker_dim}")
        basis = vh[rank:].conj().T
        pi = basis @ basis.conj().T
        perp = eye - pi
        lam_minus = np.abs(T[0] @ perp).max()
        lam_top = np.abs(T[i] @ pi).max()
        if max(lam_minus, lam_top) > boundary_tol:
            raise DegreeNoDrop(
                f"boundary coefficients at step {i} do not vanish "
                f"({lam_minus:.2e}, {lam_top:.2e})"
            )
        T = [T[ell] @ pi + T[ell + 1] @ perp for ell in range(i)]
        pairs_rev.append((pi, perp))
    if np.abs(T[0] - eye).max() > 1e-8:
        raise DegreeNoDrop("residual constant term is not the identity")
    return ProjChain(list(reversed(pairs_rev)), validate=False)


def kernel_factorize(
    loop_sampler: Callable[[complex], LoopPoly],
    sample_points: Sequence[complex],
    rank_tol: float = RANK_TOL,
) -> Callable[[complex], ProjChain]:
    """Pointwise kernel factorization, validated eagerly at the given points."""
    cache = {complex(z): kernel_factorize_fiber(loop_sampler(z), rank_tol) for z in sample_points}

    def chain_sampler(z: complex) -> ProjChain:
        z = complex(z)
        if z not in cache:
            cache[z] = kernel_factorize_fiber(loop_sampler(z), rank_tol)
        return cache[z]

    return chain_sampler


@dataclass(frozen=True)
class ConstantLoop:
    """Product of factors (pi_A + lambda^{-1} pi_A_perp): coeffs[t] multiplies lambda^{-t}."""

    factors: tuple[Span, ...]
    coeffs: np.ndarray

    @property
    def is_identity(self) -> bool:
        return len(self.factors) == 0

    def at(self, lam: complex) -> np.ndarray:
        out = np.zeros_like(self.coeffs[0])
        for t in range(self.coeffs.shape[0]):
            out += lam ** (-t) * self.coeffs[t]
        return out


def _constant_image_span(
    coeff_at: Callable[[complex], np.ndarray], points: Sequence[complex], rank_tol: float
) -> Span:
    cols = np.hstack([coeff_at(z) for z in points])
    return orthonormal_basis(cols, rank_tol)


def normalize_type_one(
    loop_sampler: Callable[[complex], LoopPoly],
    sample_points: Sequence[complex],
    rank_tol: float = RANK_TOL,
    trim_tol: float = TRIM_TOL,
) -> tuple[ConstantLoop, Callable[[complex], LoopPoly]]:
    """Left-multiply by constant loops until im T_0 is full (type one).

    Returns the accumulated constant pre-factor and the normalized sampler.
    """
    points = [complex(z) for z in sample_points]
    if not points:
        raise BadShape("need at least one sample point")
    first = loop_sampler(points[0])
    n = first.n
    r0 = first.degree
    steps: list[Span] = []
    degrees: list[int] = []  # degree after each step, decided from the sample points

    def sample(z: complex) -> LoopPoly:
        loop = loop_sampler(z)
        for span, deg in zip(steps, degrees):
            pi, perp = projection_pair(span)
            c = loop.coeffs
            padded = np.concatenate([c, np.zeros((1, n, n), np.complex128)])
            new = np.array([pi @ padded[t] + perp @ padded[t + 1] for t in range(len(c))])
            loop = LoopPoly(new[: deg + 1])
        return loop

    for _ in range(max(r0, 1)):
        a_span = _constant_image_span(lambda z: sample(z).coeffs[0], points, rank_tol)
        if a_span.dim == n:
            break
        if a_span.dim == 0:
            raise NoTermination("constant term vanishes identically")
        prev_degree = degrees[-1] if degrees else r0
        steps.append(a_span)
        degrees.append(prev_degree)  # provisional: trim below once sampled
        deg = 0
        for z in points:
            deg = max(deg, sample(z).trimmed(trim_tol).degree)
        degrees[-1] = deg
    else:
        a_span = _constant_image_span(lambda z: sample(z).coeffs[0], points, rank_tol)
        if a_span.dim != n:
            raise NoTermination(f"not type one after {max(r0, 1)} constant-loop steps")

    coeffs = np.zeros((len(steps) + 1, n, n), np.complex128)
    coeffs[0] = np.eye(n)
    for span in steps:
        pi, perp = projection_pair(span)
        new = np.zeros_like(coeffs)
        for t in range(coeffs.shape[0]):
            new[t] = pi @ coeffs[t]
            if t > 0:
                new[t] += perp @ coeffs[t - 1]
        coeffs = new
    prefactor = ConstantLoop(tuple(steps), coeffs[: len(steps) + 1])
    return prefactor, sample


class QInvolution:
    """Q = pi_A - pi_A_perp and the induced involution L(lambda) -> Q L(-lambda)."""

    def __init__(self, a_span: Span):
        self.a_span = a_span
        pi, perp = projection_pair(a_span)
        self.matrix = pi - perp

    @classmethod
    def identity(cls, n: int) -> "QInvolution":
        return cls(Span.full(n))

    def nu_matrix(self, r: int) -> np.ndarray:
        n = self.a_span.ambient_dim
        out = np.zeros((r * n, r * n), np.complex128)
        for k in range(r):
            out[k * n : (k + 1) * n, k * n : (k + 1) * n] = ((-1) ** k) * self.matrix
        return out


@dataclass(frozen=True)
class QAdaptedResult:
    """Outcome of the nu_Q-invariance test.

    plus/minus hold an adapted basis split by eigenvalue of nu_Q; they are
    None when the defect exceeds the tolerance.
    """

    defect: float
    plus: Optional[np.ndarray]
    minus: Optional[np.ndarray]

    @property
    def adapted(self) -> bool:
        return self.plus is not None


def q_adapted_check(w: WSubspace, q: QInvolution, tol: float = 1e-7) -> QAdaptedResult:
    """Defect of nu_Q-invariance of W; on success, a Q-adapted spanning basis."""
    nu = q.nu_matrix(w.r)
    moved = nu @ w.basis
    defect = max_principal_angle(w.span, Span(moved, w.r * w.n, validate=False))
    if defect > tol:
        return QAdaptedResult(float(defect), None, None)
    plus_vecs = w.basis + moved
    minus_vecs = w.basis - moved
    plus = orthonormal_basis(plus_vecs)
    minus = orthonormal_basis(minus_vecs)
    return QAdaptedResult(float(defect), plus.basis, minus.basis)
