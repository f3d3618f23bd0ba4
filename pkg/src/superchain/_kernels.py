"""Low-level kernels with a numba path and a pure-numpy fallback.

The compiled path is used when numba imports cleanly and the environment
variable ``SUPERCHAIN_JIT`` is not set to ``0``.  Every public kernel has a
``*_numpy`` twin so the two paths can be compared directly.
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

_WANT_JIT = os.environ.get("SUPERCHAIN_JIT", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_JIT:
        raise ImportError("disabled by SUPERCHAIN_JIT")
    from numba import njit

    JIT_ENABLED = True
except ImportError as exc:  # pragma: no cover - depends on environment
    logger.debug("numba path unavailable: %s", exc)
    JIT_ENABLED = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# signed permutation of tensor factors


def factor_permutation_numpy(dims, parities, perm):
    """Index map and Koszul signs for reordering tensor factors.

    ``parities`` is a list of per-factor parity arrays.  New position ``j``
    holds old factor ``perm[j]``.  Returns ``(src, sign)`` with
    ``(P v)[J] = sign[J] * v[src[J]]``.
    """
    k = len(dims)
    new_dims = [dims[p] for p in perm]
    grids = np.indices(new_dims).reshape(k, -1)
    old_idx = np.empty_like(grids)
    for j, p in enumerate(perm):
        old_idx[p] = grids[j]
    src = np.ravel_multi_index(tuple(old_idx), dims) if k else np.zeros(1, dtype=np.int64)
    pars = [np.asarray(parities[perm[j]], dtype=np.int64)[grids[j]] for j in range(k)]
    odd = np.zeros(grids.shape[1], dtype=np.int64)
    for j in range(k):
        for jj in range(j + 1, k):
            if perm[j] > perm[jj]:
                odd += pars[j] * pars[jj]
    sign = np.where(odd % 2 == 0, 1.0, -1.0)
    return src.astype(np.int64), sign


@njit(cache=True)
def _factor_permutation_jit(dims, flat_par, offsets, perm):
    k = dims.shape[0]
    total = 1
    for d in dims:
        total *= d
    src = np.empty(total, dtype=np.int64)
    sign = np.empty(total, dtype=np.float64)
    new_idx = np.zeros(k, dtype=np.int64)
    old_idx = np.zeros(k, dtype=np.int64)
    for J in range(total):
        rem = J
        for j in range(k - 1, -1, -1):
            d = dims[perm[j]]
            new_idx[j] = rem % d
            rem //= d
        for j in range(k):
            old_idx[perm[j]] = new_idx[j]
        flat = 0
        for p in range(k):
            flat = flat * dims[p] + old_idx[p]
        src[J] = flat
        odd = 0
        for j in range(k):
            pj = flat_par[offsets[perm[j]] + new_idx[j]]
            if pj == 0:
                continue
            for jj in range(j + 1, k):
                if perm[j] > perm[jj]:
                    odd += flat_par[offsets[perm[jj]] + new_idx[jj]]
        sign[J] = 1.0 if odd % 2 == 0 else -1.0
    return src, sign


def factor_permutation(dims, parities, perm):
    if not JIT_ENABLED:
        return factor_permutation_numpy(dims, parities, perm)
    dims_a = np.asarray(dims, dtype=np.int64)
    offsets = np.zeros(len(dims), dtype=np.int64)
    if len(dims) > 1:
        offsets[1:] = np.cumsum(dims_a)[:-1]
    flat_par = np.concatenate([np.asarray(p, dtype=np.int64) for p in parities]) if dims else np.zeros(0, np.int64)
    return _factor_permutation_jit(dims_a, flat_par, offsets, np.asarray(perm, dtype=np.int64))


# ---------------------------------------------------------------------------
# graded Kronecker product


def graded_kron_numpy(A, B, pb, pc, pd):
    """``out[(a,c),(b,d)] = A[a,b] B[c,d] (-1)^{(|c|+|d|)|b|}``."""
    A = np.asarray(A)
    B = np.asarray(B)
    s = ((np.asarray(pc)[:, None] + np.asarray(pd)[None, :]) % 2)[None, :, :] * np.asarray(pb)[:, None, None]
    sign = np.where(s % 2 == 0, 1.0, -1.0)  # (b, c, d)
    out = A[:, None, :, None] * (B[None, :, None, :] * sign.transpose(1, 0, 2)[None, :, :, :])
    ra, ca = A.shape
    rb, cb = B.shape
    return out.reshape(ra * rb, ca * cb)


@njit(cache=True)
def _graded_kron_jit(A, B, pb, pc, pd):
    ra, ca = A.shape
    rb, cb = B.shape
    out = np.zeros((ra * rb, ca * cb), dtype=np.complex128)
    for a in range(ra):
        for b in range(ca):
            x = A[a, b]
            if x == 0:
                continue
            for c in range(rb):
                for d in range(cb):
                    y = B[c, d]
                    if y == 0:
                        continue
                    if ((pc[c] + pd[d]) * pb[b]) % 2 == 1:
                        out[a * rb + c, b * cb + d] = -x * y
                    else:
                        out[a * rb + c, b * cb + d] = x * y
    return out


def graded_kron(A, B, pb, pc, pd):
    if not JIT_ENABLED:
        return graded_kron_numpy(A, B, pb, pc, pd)
    return _graded_kron_jit(
        np.ascontiguousarray(A, dtype=np.complex128),
        np.ascontiguousarray(B, dtype=np.complex128),
        np.asarray(pb, dtype=np.int64),
        np.asarray(pc, dtype=np.int64),
        np.asarray(pd, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# partial supertrace over a leading factor


def partial_supertrace_numpy(X, p_aux, p_rest):
    p_aux = np.asarray(p_aux)
    p_rest = np.asarray(p_rest)
    da, dr = len(p_aux), len(p_rest)
    blocks = np.asarray(X).reshape(da, dr, da, dr)
    diag = np.einsum("aiaj->aij", blocks)
    expo = p_aux[:, None, None] * (1 + p_rest[None, :, None] + p_rest[None, None, :])
    sign = np.where(expo % 2 == 0, 1.0, -1.0)
    return (diag * sign).sum(axis=0)


@njit(cache=True)
def _partial_supertrace_jit(X, p_aux, p_rest):
    da = p_aux.shape[0]
    dr = p_rest.shape[0]
    out = np.zeros((dr, dr), dtype=np.complex128)
    for a in range(da):
        for i in range(dr):
            for j in range(dr):
                v = X[a * dr + i, a * dr + j]
                if (p_aux[a] * (1 + p_rest[i] + p_rest[j])) % 2 == 1:
                    out[i, j] -= v
                else:
                    out[i, j] += v
    return out


def partial_supertrace(X, p_aux, p_rest):
    if not JIT_ENABLED:
        return partial_supertrace_numpy(X, p_aux, p_rest)
    return _partial_supertrace_jit(
        np.ascontiguousarray(X, dtype=np.complex128),
        np.asarray(p_aux, dtype=np.int64),
        np.asarray(p_rest, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# Bethe ansatz equations: residual and Jacobian
#
# Flattened data: t[s] with level[s] in 0..N-2 (0-based), z[j], lam[j, a],
# q[a], kappa[a].  Each equation is a sum of two products of linear factors.
# The same-level product keeps the constant self factor, as in y_a(t - k).


def _bae_factors(t, level, z, lam, q, kappa, s, which):
    """Factors of one term as (value, coef_on_t_s, other_var) triples."""
    a = level[s]
    b = a + which  # 0-based index of the weight component
    kap = kappa[b]
    vals, other = [], []
    for j in range(z.shape[0]):
        vals.append(t[s] - z[j] + kap * lam[j, b])
        other.append(-1)
    for r in range(t.shape[0]):
        lr = level[r]
        if lr == a - 1:
            shift = kappa[a] if which == 0 else 0.0
        elif lr == a:
            shift = -kappa[a] if which == 0 else kappa[a + 1]
        elif lr == a + 1:
            shift = 0.0 if which == 0 else -kappa[a + 1]
        else:
            continue
        vals.append(t[s] + shift - t[r])
        other.append(r)
    return -kap * q[b], np.array(vals, dtype=np.complex128), np.array(other, dtype=np.int64)


def bae_system_numpy(t, level, z, lam, q, kappa):
    t = np.asarray(t, dtype=np.complex128)
    K = t.shape[0]
    F = np.zeros(K, dtype=np.complex128)
    J = np.zeros((K, K), dtype=np.complex128)
    for s in range(K):
        for which in (0, 1):
            pref, vals, other = _bae_factors(t, level, z, lam, q, kappa, s, which)
            n = vals.shape[0]
            left = np.concatenate(([1.0 + 0j], np.cumprod(vals)[:-1])) if n else np.ones(0, complex)
            right = np.concatenate((np.cumprod(vals[::-1])[:-1][::-1], [1.0 + 0j])) if n else np.ones(0, complex)
            excl = left * right
            F[s] += pref * (np.prod(vals) if n else 1.0)
            J[s, s] += pref * excl.sum()
            mask = other >= 0
            np.subtract.at(J[s], other[mask], pref * excl[mask])
    return F, J


@njit(cache=True)
def _bae_system_jit(t, level, z, lam, q, kappa):
    K = t.shape[0]
    L = z.shape[0]
    F = np.zeros(K, dtype=np.complex128)
    J = np.zeros((K, K), dtype=np.complex128)
    vals = np.empty(L + K, dtype=np.complex128)
    other = np.empty(L + K, dtype=np.int64)
    left = np.empty(L + K + 1, dtype=np.complex128)
    right = np.empty(L + K + 1, dtype=np.complex128)
    for s in range(K):
        a = level[s]
        for which in range(2):
            b = a + which
            kap = kappa[b]
            n = 0
            for j in range(L):
                vals[n] = t[s] - z[j] + kap * lam[j, b]
                other[n] = -1
                n += 1
            for r in range(K):
                lr = level[r]
                if lr == a - 1:
                    shift = kappa[a] if which == 0 else 0.0
                elif lr == a:
                    shift = -kappa[a] if which == 0 else kappa[a + 1]
                elif lr == a + 1:
                    shift = 0.0 if which == 0 else -kappa[a + 1]
                else:
                    continue
                vals[n] = t[s] + shift - t[r]
                other[n] = r
                n += 1
            pref = -kap * q[b]
            left[0] = 1.0
            for i in range(n):
                left[i + 1] = left[i] * vals[i]
            right[n] = 1.0
            for i in range(n - 1, -1, -1):
                right[i] = right[i + 1] * vals[i]
            F[s] += pref * left[n]
            for i in range(n):
                e = pref * left[i] * right[i + 1]
                J[s, s] += e
                if other[i] >= 0:
                    J[s, other[i]] -= e
    return F, J


def bae_scale(t, level, z, lam, q, kappa):
    """``|left side| + |right side|`` per equation, for relative residuals."""
    t = np.asarray(t, dtype=np.complex128)
    out = np.zeros(t.shape[0])
    for s in range(t.shape[0]):
        for which in (0, 1):
            pref, vals, _ = _bae_factors(t, level, z, lam, q, kappa, s, which)
            out[s] += abs(pref) * (np.prod(np.abs(vals)) if vals.shape[0] else 1.0)
    return out


def bae_system(t, level, z, lam, q, kappa):
    """Residual vector and Jacobian of the polynomial Bethe equations."""
    args = (
        np.ascontiguousarray(t, dtype=np.complex128),
        np.ascontiguousarray(level, dtype=np.int64),
        np.ascontiguousarray(z, dtype=np.complex128),
        np.ascontiguousarray(lam, dtype=np.complex128),
        np.ascontiguousarray(q, dtype=np.complex128),
        np.ascontiguousarray(kappa, dtype=np.float64),
    )
    if not JIT_ENABLED:
        return bae_system_numpy(*args)
    return _bae_system_jit(*args)
