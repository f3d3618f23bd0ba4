"""The rational R-matrix ``R(u) = u + P`` and its fusion on wedge powers."""

from __future__ import annotations

import math

import numpy as np

from .graded import (
    GradedSpace,
    apply_embedded,
    embed,
    flip,
    gl_generator,
    kron_arrays,
    preserves_wedge,
    projectors,
    tensor_spaces,
    unit_matrix,
)
from .rational import RationalMatrixFunction


def flip_matrix(V: GradedSpace, W: GradedSpace | None = None) -> np.ndarray:
    return flip(V, W or V).entries


def r_matrix(V: GradedSpace) -> RationalMatrixFunction:
    """``R(u) = u·1 + P`` on ``V ⊗ V`` as a matrix polynomial."""
    Pm = flip_matrix(V)
    return RationalMatrixFunction(np.stack([Pm, np.eye(V.dim**2)]))


def r_eval(V: GradedSpace, u: complex) -> np.ndarray:
    return u * np.eye(V.dim**2) + flip_matrix(V)


def ordered_pairs(k: int, reverse: bool = False) -> list[tuple[int, int]]:
    """Pairs ``i<j`` in ``Π→_{i<j}`` order, or ``Π←_{i<j}`` order when ``reverse``."""
    if not reverse:
        return [(i, j) for i in range(k) for j in range(i + 1, k)]
    return [(i, j) for j in range(k - 1, -1, -1) for i in range(j - 1, -1, -1)]


def r_product(V: GradedSpace, k: int, pairs, args) -> np.ndarray:
    """``Π R^{(ij)}(x)`` over the given pairs on ``V^{⊗k}``, left to right."""
    factors = [V] * k
    R = None
    for (i, j), x in zip(pairs, args):
        term = embed(r_eval(V, x), factors, [i, j])
        R = term if R is None else R @ term
    return R if R is not None else np.eye(V.dim**k, dtype=complex)


def ybe_residual(V: GradedSpace, u: complex, v: complex) -> float:
    f = [V, V, V]
    R12 = embed(r_eval(V, u - v), f, [0, 1])
    R13 = embed(r_eval(V, u), f, [0, 2])
    R23 = embed(r_eval(V, v), f, [1, 2])
    lhs = R12 @ R13 @ R23
    rhs = R23 @ R13 @ R12
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def unitarity_residual(V: GradedSpace, u: complex) -> float:
    """``R(u) R^{(21)}(-u) = 1 - u^2``; the flip is symmetric so ``R^{(21)} = R``."""
    lhs = r_eval(V, u) @ r_eval(V, -u)
    return float(np.linalg.norm(lhs - (1 - u * u) * np.eye(V.dim**2)))


# ---------------------------------------------------------------------------
# fusion


def wedge_action(k: int, V: GradedSpace, a: int, b: int) -> np.ndarray:
    """``e_ab`` acting on the orthonormal wedge basis of ``Λ^k V``."""
    J = projectors(k, V).inclusion
    return J.conj().T @ gl_generator(V, k, a, b) @ J


def fused_r_full(k: int, l: int, V: GradedSpace, u: complex) -> np.ndarray:
    """``Π←_i Π→_j R^{(i, j+k)}(u + i - j - k + l)`` on ``V^{⊗(k+l)}`` (1-based i, j)."""
    factors = [V] * (k + l)
    out = np.eye(V.dim ** (k + l), dtype=complex)
    for i in range(k, 0, -1):
        for j in range(1, l + 1):
            x = u + i - j - k + l
            out = out @ embed(r_eval(V, x), factors, [i - 1, j + k - 1])
    return out


def fused_r(k: int, l: int, V: GradedSpace, u: complex, check: bool = True) -> np.ndarray:
    """``R^{∧k,∧l}(u)`` restricted to ``Λ^k V ⊗ Λ^l V``.

    The ordered product is applied to the inclusion columns only, so the
    ``V^{⊗(k+l)}`` operator is never formed.
    """
    Pk, Pl = projectors(k, V), projectors(l, V)
    J = np.kron(Pk.inclusion, Pl.inclusion)
    factors = [V] * (k + l)
    ops = [(r_eval(V, u + i - j - k + l), [i - 1, j + k - 1]) for i in range(k, 0, -1) for j in range(1, l + 1)]
    Y = J.astype(complex)
    for R, pos in reversed(ops):
        Y = np.stack([apply_embedded(R, Y[:, c], factors, pos) for c in range(Y.shape[1])], axis=1)
    inner = J.conj().T @ Y
    if check:
        leak = np.linalg.norm(Y - J @ inner) / max(np.linalg.norm(Y), 1e-300)
        if leak > 1e-9:
            raise ArithmeticError(f"fused R-matrix does not preserve the wedge subspace (leak {leak:.2e})")
    return inner


def _casimir_like(k: int, V: GradedSpace, wedge_first: bool) -> np.ndarray:
    """``Σ_ab e_ab^{Λ} ⊗ E_ba (-1)^{|b|}`` (or the mirrored placement)."""
    Pk = projectors(k, V)
    W = Pk.wedge_space
    d = V.dim
    par = V.array
    out = None
    for a in range(d):
        for b in range(d):
            ew = wedge_action(k, V, a, b)
            E = unit_matrix(d, b, a) * (-1) ** par[b]
            if wedge_first:
                t = kron_arrays(ew, E, W.array, par, par)
            else:
                t = kron_arrays(unit_matrix(d, a, b), wedge_action(k, V, b, a) * (-1) ** par[b], par, W.array, W.array)
            out = t if out is None else out + t
    return out


def reduced_r_left(k: int, V: GradedSpace, u: complex) -> np.ndarray:
    """``R_{∧k,∧1}(u) = u + Σ e_ab|_Λ ⊗ E_ba (-1)^{|b|}`` on ``Λ^k V ⊗ V``."""
    C = _casimir_like(k, V, True)
    return u * np.eye(C.shape[0]) + C


def reduced_r_right(k: int, V: GradedSpace, u: complex) -> np.ndarray:
    """``R_{∧1,∧k}(u) = u + k - 1 + Σ E_ab ⊗ e_ba|_Λ (-1)^{|b|}`` on ``V ⊗ Λ^k V``."""
    C = _casimir_like(k, V, False)
    return (u + k - 1) * np.eye(C.shape[0]) + C


def lemma_left_residual(k: int, V: GradedSpace, u: complex) -> float:
    lhs = fused_r(k, 1, V, u)
    rhs = reduced_r_left(k, V, u) * math.prod(u - i for i in range(1, k))
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))


def lemma_right_residual(k: int, V: GradedSpace, u: complex) -> float:
    lhs = fused_r(1, k, V, u)
    rhs = reduced_r_right(k, V, u) * math.prod(u + i for i in range(0, k - 1))
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))


def inversion_residual(k: int, V: GradedSpace, u: complex) -> float:
    """``R_{∧k,∧1}(u) (R_{∧1,∧k}(-u))^{(21)} = (u+1)(k-u)``."""
    W = projectors(k, V).wedge_space
    F = flip(V, W).entries  # V⊗Λ -> Λ⊗V
    right21 = F @ reduced_r_right(k, V, -u) @ F.T
    lhs = reduced_r_left(k, V, u) @ right21
    target = (u + 1) * (k - u) * np.eye(lhs.shape[0])
    return float(np.linalg.norm(lhs - target) / np.linalg.norm(target))


def anti_r_residuals(k: int, V: GradedSpace) -> dict[str, float]:
    """Products of ``R^{(ij)}(±(j-i))`` against the scaled (anti)symmetrizers."""
    Pk = projectors(k, V)
    out = {}
    c_sym = math.prod(j ** (k - j + 1) for j in range(1, k + 1))
    c_anti = (-1) ** k * math.prod((-j) ** (k - j + 1) for j in range(1, k + 1))
    for rev in (False, True):
        pairs = ordered_pairs(k, rev)
        sym = r_product(V, k, pairs, [j - i for i, j in pairs])
        anti = r_product(V, k, pairs, [i - j for i, j in pairs])
        tag = "rev" if rev else "fwd"
        out[f"sym_{tag}"] = float(np.linalg.norm(sym - c_sym * Pk.sym) / abs(c_sym))
        out[f"anti_{tag}"] = float(np.linalg.norm(anti - c_anti * Pk.antisym) / abs(c_anti))
    return out


def fused_ybe_residual(k: int, l: int, V: GradedSpace, u: complex, v: complex) -> float:
    """Yang-Baxter relation on ``Λ^k ⊗ Λ^l ⊗ V`` for the fused matrices."""
    Wk = projectors(k, V).wedge_space
    Wl = projectors(l, V).wedge_space
    f = [Wk, Wl, V]
    R12 = embed(fused_r(k, l, V, u - v), f, [0, 1])
    R13 = embed(fused_r(k, 1, V, u), f, [0, 2])
    R23 = embed(fused_r(l, 1, V, v), f, [1, 2])
    lhs = R12 @ R13 @ R23
    rhs = R23 @ R13 @ R12
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))


def fusion_product_check(k: int, V: GradedSpace, u: complex = 0.37 + 0.21j) -> dict[str, float]:
    """All fusion identities for one ``k`` as named residuals."""
    if not projectors(k, V).wedge_basis:
        raise ValueError(f"Λ^{k} of a {V.m}|{V.n} space is zero")
    out = {f"anti_r_{name}": val for name, val in anti_r_residuals(k, V).items()}
    out["reduced_left"] = lemma_left_residual(k, V, u)
    out["reduced_right"] = lemma_right_residual(k, V, u)
    out["inversion"] = inversion_residual(k, V, u)
    full = fused_r_full(k, 1, V, u)
    out["wedge_leak"] = preserves_wedge(full, k, V, V.dim)
    return out


def fused_space(k: int, V: GradedSpace, l: int) -> GradedSpace:
    return tensor_spaces(projectors(k, V).wedge_space, projectors(l, V).wedge_space)
