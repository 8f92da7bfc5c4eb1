"""Hot numeric kernels: numba-compiled by default, pure numpy on request.

Set ``UNITONS_DISABLE_NUMBA=1`` to select the numpy fallback.  Both paths run
the same source; the plain implementations stay importable under
``PY_IMPLS`` so the benchmark can time the two side by side.
"""

from __future__ import annotations

import os

import numpy as np


def _eval_table_impl(nums, dens, dnorms, z, pole_tol):
    # nums/dens: (K, M, J, N, L) padded coefficient tables, degree-ascending.
    # Returns the evaluated table (K, M, J, N) and False when a pole is hit.
    K, M, J, N, Ln = nums.shape
    Ld = dens.shape[4]
    vals = np.zeros((K, M, J, N), np.complex128)
    ok = True
    for k in range(K):
        for m in range(M):
            for j in range(J):
                for c in range(N):
                    nv = 0j
                    for t in range(Ln - 1, -1, -1):
                        nv = nv * z + nums[k, m, j, c, t]
                    dv = 0j
                    for t in range(Ld - 1, -1, -1):
                        dv = dv * z + dens[k, m, j, c, t]
                    scale = dnorms[k, m, j, c]
                    if scale < 1.0:
                        scale = 1.0
                    if abs(dv) < pole_tol * scale:
                        ok = False
                    else:
                        vals[k, m, j, c] = nv / dv
    return vals, ok


def _build_chain_impl(hvals, rank_tol):
    # hvals: (r, r, J, n); hvals[k, m, j] = k'th derivative of row-m entry of
    # column j, evaluated at the sample point.  Builds the projection chain
    # iteratively: at step i the vectors K^(k)_{i,j} = sum_s C^i_s hvals[k, s-k, j]
    # span the next subspace, whose projector feeds the Pascal update of C.
    r = hvals.shape[0]
    J = hvals.shape[2]
    n = hvals.shape[3]
    pis = np.zeros((r, n, n), np.complex128)
    perps = np.zeros((r, n, n), np.complex128)
    bases = np.zeros((r, n, n), np.complex128)
    kvecs = np.zeros((r, r, J, n), np.complex128)
    ranks = np.zeros(r, np.int64)
    gen_ranks = np.zeros(r, np.int64)
    eye = np.zeros((n, n), np.complex128)
    for a in range(n):
        eye[a, a] = 1.0
    C = np.zeros((r + 1, n, n), np.complex128)
    C[0] = eye.copy()
    status = 0
    for i in range(r):
        cols = np.zeros((n, (i + 1) * J), np.complex128)
        for k in range(i + 1):
            for j in range(J):
                v = np.zeros(n, np.complex128)
                for s in range(k, i + 1):
                    v += C[s] @ hvals[k, s - k, j]
                kvecs[i, k, j] = v
                cols[:, k * J + j] = v
        u, sv, vh = np.linalg.svd(cols, full_matrices=False)
        smax = sv[0] if sv.shape[0] > 0 else 0.0
        rank = 0
        if smax > 0.0:
            thr = rank_tol * smax
            for t in range(sv.shape[0]):
                if sv[t] > thr:
                    rank += 1
                if thr / 10.0 < sv[t] < thr * 10.0:
                    status = 1
        basis = np.ascontiguousarray(u[:, :rank])
        pi = basis @ basis.conj().T
        pis[i] = pi
        perps[i] = eye - pi
        bases[i, :, :rank] = basis
        ranks[i] = rank
        # rank of the k = 0 layer (the generating subspace)
        g = np.zeros((n, J), np.complex128)
        for j in range(J):
            g[:, j] = kvecs[i, 0, j]
        gsv = np.linalg.svd(g, full_matrices=False)[1]
        gmax = gsv[0] if gsv.shape[0] > 0 else 0.0
        grank = 0
        if gmax > 0.0:
            for t in range(gsv.shape[0]):
                if gsv[t] > rank_tol * gmax:
                    grank += 1
        gen_ranks[i] = grank
        # Pascal update: C^{i+1}_s = perp @ C^i_{s-1} + C^i_s, descending s
        top = i + 1
        if top > r:
            top = r
        for s in range(top, 0, -1):
            C[s] = perps[i] @ C[s - 1] + C[s]
    return pis, perps, bases, ranks, gen_ranks, kvecs, status


PY_IMPLS = {
    "eval_table": _eval_table_impl,
    "build_chain": _build_chain_impl,
}


def numba_disabled() -> bool:
    return os.environ.get("UNITONS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}


BACKEND = "numpy"
eval_table = _eval_table_impl
build_chain = _build_chain_impl

if not numba_disabled():
    try:
        import numba

        eval_table = numba.njit(cache=True)(_eval_table_impl)
        build_chain = numba.njit(cache=True)(_build_chain_impl)
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def warmup():
    """Trigger JIT compilation on a tiny problem (no-op on the numpy path)."""
    nums = np.zeros((1, 1, 1, 2, 2), np.complex128)
    nums[0, 0, 0, 0, 0] = 1.0
    nums[0, 0, 0, 1, 1] = 1.0
    dens = np.zeros_like(nums)
    dens[..., 0] = 1.0
    dnorms = np.ones((1, 1, 1, 2))
    vals, _ = eval_table(nums, dens, dnorms, 0.3 + 0.1j, 1e-10)
    build_chain(vals, 1e-9)
