"""Pointwise subspace linear algebra: spans, projection pairs, the C and S
operator calculus, and principal-angle comparison."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import BadShape

RANK_TOL = 1e-9     # relative singular-value cutoff for numerical rank
SPAN_EQ_TOL = 1e-8  # spans are equal when ranks match and all angles are below this


class Span:
    """Subspace of C^n held as an n x k matrix with orthonormal columns (k may be 0)."""

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, basis: np.ndarray, ambient_dim: int | None = None, validate: bool = True):
        basis = np.asarray(basis, dtype=np.complex128)
        if basis.ndim == 1:
            basis = basis[:, None]
        n = ambient_dim if ambient_dim is not None else basis.shape[0]
        if basis.shape[0] != n:
            raise BadShape("basis rows must match ambient dimension")
        if validate and basis.shape[1] > 0:
            gram = basis.conj().T @ basis
            if np.abs(gram - np.eye(basis.shape[1])).max() > 1e-12:
                raise BadShape("basis columns are not orthonormal")
        self.ambient_dim = n
        self.basis = basis

    @classmethod
    def zero(cls, n: int) -> "Span":
        return cls(np.zeros((n, 0), np.complex128), n, validate=False)

    @classmethod
    def full(cls, n: int) -> "Span":
        return cls(np.eye(n, dtype=np.complex128), n, validate=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, vec: np.ndarray, tol: float = 1e-9) -> bool:
        v = np.asarray(vec, dtype=np.complex128)
        resid = v - self.basis @ (self.basis.conj().T @ v)
        return np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(v))


def orthonormal_basis(vectors, rank_tol: float = RANK_TOL) -> Span:
    """Orthonormal basis of the span of the given vectors (SVD rank decision)."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        mat = np.asarray(vectors, dtype=np.complex128)
    elif isinstance(vectors, np.ndarray) and vectors.ndim == 1:
        mat = np.asarray(vectors, dtype=np.complex128)[:, None]
    else:
        vecs = [np.asarray(v, dtype=np.complex128).ravel() for v in vectors]
        if not vecs:
            raise BadShape("cannot infer ambient dimension from no vectors")
        mat = np.column_stack(vecs)
    n = mat.shape[0]
    if mat.shape[1] == 0:
        return Span.zero(n)
    u, sv, _ = np.linalg.svd(mat, full_matrices=False)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > rank_tol * smax)) if smax > 0 else 0
    return Span(u[:, :rank], n, validate=False)


def image_span(matrix: np.ndarray, rank_tol: float = RANK_TOL, scale: float = 1.0) -> Span:
    """Column span of a matrix whose natural scale is known.

    Unlike orthonormal_basis, the cutoff is rank_tol * max(sigma_max, scale),
    so a noise-only matrix (e.g. the complement of a full projection, entries
    ~1e-16) collapses to the zero span instead of inflating to full rank.
    """
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.ndim == 1:
        mat = mat[:, None]
    n = mat.shape[0]
    if mat.shape[1] == 0:
        return Span.zero(n)
    u, sv, _ = np.linalg.svd(mat, full_matrices=False)
    cut = rank_tol * max(float(sv[0]) if sv.size else 0.0, scale)
    rank = int(np.sum(sv > cut))
    return Span(u[:, :rank], n, validate=False)


def projection_pair(s: Span) -> tuple[np.ndarray, np.ndarray]:
    """(pi, pi_perp) for the span: pi = B B*, pi_perp = I - pi."""
    pi = s.basis @ s.basis.conj().T
    return pi, np.eye(s.ambient_dim, dtype=np.complex128) - pi


class ProjChain:
    """Ordered projection pairs (pi_1, pi_1_perp), ..., (pi_i, pi_i_perp)."""

    def __init__(self, pairs: Sequence[tuple[np.ndarray, np.ndarray]], validate: bool = True):
        pairs = [(np.asarray(p, np.complex128), np.asarray(q, np.complex128)) for p, q in pairs]
        if pairs:
            n = pairs[0][0].shape[0]
            eye = np.eye(n)
            for pi, perp in pairs:
                if pi.shape != (n, n) or perp.shape != (n, n):
                    raise BadShape("projections must be square of equal size")
                if validate:
                    for m in (pi, perp):
                        if np.abs(m @ m - m).max() > 1e-11 or np.abs(m - m.conj().T).max() > 1e-11:
                            raise BadShape("not a Hermitian idempotent")
                    if np.abs(pi + perp - eye).max() > 1e-11:
                        raise BadShape("pair does not sum to the identity")
        self._pairs = pairs

    def __len__(self) -> int:
        return len(self._pairs)

    def __getitem__(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self._pairs[i]

    @property
    def pairs(self):
        return list(self._pairs)

    @property
    def ambient_dim(self) -> int:
        if not self._pairs:
            raise BadShape("empty chain has no ambient dimension")
        return self._pairs[0][0].shape[0]

    @property
    def pis(self) -> np.ndarray:
        return np.array([p for p, _ in self._pairs])

    @property
    def perps(self) -> np.ndarray:
        return np.array([q for _, q in self._pairs])

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(int(round(np.trace(p).real)) for p, _ in self._pairs)

    @classmethod
    def from_arrays(cls, pis: np.ndarray, perps: np.ndarray, validate: bool = False) -> "ProjChain":
        return cls(list(zip(pis, perps)), validate=validate)


def c_rows(perps: Sequence[np.ndarray], n: int, smax: int) -> np.ndarray:
    """All C^i_s for the chain with the given perps, s = 0..smax (i = len(perps)).

    Pascal recursion: C^i_s = perp_i C^{i-1}_{s-1} + C^{i-1}_s.
    """
    C = np.zeros((smax + 1, n, n), np.complex128)
    C[0] = np.eye(n)
    for ell, perp in enumerate(perps, start=1):
        for s in range(min(smax, ell), 0, -1):
            C[s] = perp @ C[s - 1] + C[s]
    return C


def s_rows(pis: Sequence[np.ndarray], perps: Sequence[np.ndarray], n: int) -> np.ndarray:
    """All S^i_s for s = 0..i, via S^i_s = perp_i S^{i-1}_{s-1} + pi_i S^{i-1}_s."""
    i = len(pis)
    S = np.zeros((i + 1, n, n), np.complex128)
    S[0] = np.eye(n)
    for ell in range(1, i + 1):
        pi, perp = pis[ell - 1], perps[ell - 1]
        for s in range(ell, 0, -1):
            S[s] = perp @ S[s - 1] + pi @ S[s]
        S[0] = pi @ S[0]
    return S


def c_operator(chain: ProjChain, s: int) -> np.ndarray:
    """The s'th elementary function of the chain's perp projections."""
    n = chain.ambient_dim if len(chain) else None
    if n is None:
        raise BadShape("c_operator needs a non-empty chain (identity is trivial)")
    if s == 0:
        return np.eye(n, dtype=np.complex128)
    if s < 0 or s > len(chain):
        return np.zeros((n, n), np.complex128)
    return c_rows([q for _, q in chain.pairs], n, s)[s]


def s_operator(chain: ProjChain, s: int) -> np.ndarray:
    """Sum of all words Pi_i ... Pi_1 with exactly s perp factors."""
    i = len(chain)
    if s < 0 or s > i:
        raise IndexError(f"s_operator needs 0 <= s <= {i}, got {s}")
    if i == 0:
        raise BadShape("empty chain: S^0_0 is the identity of unknown size")
    n = chain.ambient_dim
    return s_rows([p for p, _ in chain.pairs], [q for _, q in chain.pairs], n)[s]


def principal_angles(a: Span, b: Span) -> np.ndarray:
    """Principal angles between two spans, ascending, in radians.

    Cosine singular values lose precision near zero angle, so small angles
    are recomputed from the sine route (residual of b against a).
    """
    if a.ambient_dim != b.ambient_dim:
        raise BadShape("principal angles need a common ambient space")
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    m = min(a.dim, b.dim)
    cross = a.basis.conj().T @ b.basis
    cosv = np.clip(np.linalg.svd(cross, compute_uv=False), 0.0, 1.0)  # descending
    resid = b.basis - a.basis @ cross
    sinv = np.clip(np.linalg.svd(resid, compute_uv=False), 0.0, 1.0)
    sinv = sinv[-m:][::-1]  # ascending, aligned with ascending angles
    angles = np.empty(m)
    for k in range(m):
        if cosv[k] ** 2 <= 0.5:
            angles[k] = np.arccos(cosv[k])
        else:
            angles[k] = np.arcsin(sinv[k])
    return angles


def max_principal_angle(a: Span, b: Span) -> float:
    ang = principal_angles(a, b)
    return float(ang[-1]) if ang.size else 0.0


def spans_equal(a: Span, b: Span, tol: float = SPAN_EQ_TOL) -> bool:
    """Basis-independent equality: equal ranks and all angles below tol."""
    if a.dim != b.dim:
        return False
    if a.dim == 0:
        return True
    return max_principal_angle(a, b) < tol
