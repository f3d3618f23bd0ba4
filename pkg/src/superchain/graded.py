"""Z2-graded linear algebra on super vector spaces.

Operators are stored as dense complex arrays together with the parities of
their domain and codomain bases.  Tensor products follow the Koszul sign
rule ``(A ⊗ B)(x ⊗ y) = (-1)^{|B||x|} Ax ⊗ By``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels

PARITY_ATOL = 1e-13


@dataclass(frozen=True)
class GradedSpace:
    """Finite-dimensional super vector space given by its basis parities."""

    parities: tuple[int, ...]

    def __post_init__(self):
        if any(p not in (0, 1) for p in self.parities):
            raise ValueError("parities must be 0 or 1")

    @classmethod
    def standard(cls, m: int, n: int) -> "GradedSpace":
        """``C^{m|n}`` with the first ``m`` basis vectors even."""
        if m < 0 or n < 0 or m + n == 0:
            raise ValueError(f"invalid superdimension ({m}|{n})")
        return cls((0,) * m + (1,) * n)

    @classmethod
    def even(cls, d: int = 1) -> "GradedSpace":
        return cls((0,) * d)

    @property
    def dim(self) -> int:
        return len(self.parities)

    @property
    def m(self) -> int:
        return self.parities.count(0)

    @property
    def n(self) -> int:
        return self.parities.count(1)

    @property
    def sdim(self) -> int:
        return self.m - self.n

    @property
    def is_standard(self) -> bool:
        return self.parities == tuple(sorted(self.parities))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.parities, dtype=np.int64)

    def tensor(self, *others: "GradedSpace") -> "GradedSpace":
        return tensor_spaces(self, *others)


def tensor_spaces(*spaces: GradedSpace) -> GradedSpace:
    par = np.zeros(1, dtype=np.int64)
    for s in spaces:
        par = (par[:, None] + s.array[None, :]).reshape(-1) % 2
    return GradedSpace(tuple(int(p) for p in par))


@dataclass(frozen=True)
class SuperOp:
    """Linear map ``domain -> codomain`` between graded spaces."""

    entries: np.ndarray
    codomain: GradedSpace
    domain: GradedSpace = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.domain is None:
            object.__setattr__(self, "domain", self.codomain)
        ent = np.asarray(self.entries, dtype=np.complex128)
        if ent.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(f"shape {ent.shape} does not match spaces ({self.codomain.dim}, {self.domain.dim})")
        object.__setattr__(self, "entries", ent)

    @property
    def parity(self) -> int | None:
        """0 or 1 for homogeneous maps, None otherwise (zero map counts as even)."""
        ent = self.entries
        scale = max(np.abs(ent).max(initial=0.0), 1.0)
        nz = np.abs(ent) > PARITY_ATOL * scale
        if not nz.any():
            return 0
        deg = (self.codomain.array[:, None] + self.domain.array[None, :]) % 2
        found = set(np.unique(deg[nz]).tolist())
        return found.pop() if len(found) == 1 else None

    def split_parity(self) -> tuple["SuperOp", "SuperOp"]:
        deg = (self.codomain.array[:, None] + self.domain.array[None, :]) % 2
        ev = np.where(deg == 0, self.entries, 0)
        od = np.where(deg == 1, self.entries, 0)
        return SuperOp(ev, self.codomain, self.domain), SuperOp(od, self.codomain, self.domain)

    def __matmul__(self, other: "SuperOp") -> "SuperOp":
        if self.domain != other.codomain:
            raise ValueError("incompatible graded spaces in composition")
        return SuperOp(self.entries @ other.entries, self.codomain, other.domain)

    def __add__(self, other: "SuperOp") -> "SuperOp":
        return SuperOp(self.entries + other.entries, self.codomain, self.domain)

    def __sub__(self, other: "SuperOp") -> "SuperOp":
        return SuperOp(self.entries - other.entries, self.codomain, self.domain)

    def __mul__(self, c) -> "SuperOp":
        return SuperOp(self.entries * c, self.codomain, self.domain)

    __rmul__ = __mul__

    @classmethod
    def identity(cls, V: GradedSpace) -> "SuperOp":
        return cls(np.eye(V.dim, dtype=complex), V)

    @classmethod
    def unit(cls, V: GradedSpace, a: int, b: int) -> "SuperOp":
        """Matrix unit ``E_ab`` (0-based indices)."""
        E = np.zeros((V.dim, V.dim), dtype=complex)
        E[a, b] = 1.0
        return cls(E, V)


def unit_matrix(d: int, a: int, b: int) -> np.ndarray:
    E = np.zeros((d, d), dtype=complex)
    E[a, b] = 1.0
    return E


# ---------------------------------------------------------------------------
# array-level primitives


def kron_arrays(A, B, A_dom, B_cod, B_dom) -> np.ndarray:
    """Graded Kronecker product of raw arrays given the needed parities."""
    return _kernels.graded_kron(A, B, np.asarray(A_dom), np.asarray(B_cod), np.asarray(B_dom))


def kron_graded(A: SuperOp, B: SuperOp) -> SuperOp:
    ent = kron_arrays(A.entries, B.entries, A.domain.array, B.codomain.array, B.domain.array)
    return SuperOp(ent, tensor_spaces(A.codomain, B.codomain), tensor_spaces(A.domain, B.domain))


def supertrace(A: SuperOp | np.ndarray, space: GradedSpace | None = None) -> complex:
    if isinstance(A, SuperOp):
        if A.domain != A.codomain:
            raise ValueError("supertrace needs an endomorphism")
        ent, space = A.entries, A.domain
    else:
        ent = np.asarray(A)
    sign = np.where(space.array % 2 == 0, 1.0, -1.0)
    return complex(np.sum(np.diag(ent) * sign))


def supertranspose(A: SuperOp) -> SuperOp:
    """``E_ab -> (-1)^{|a||b|+|a|} E_ba``."""
    if A.domain != A.codomain:
        raise ValueError("supertranspose is defined here for endomorphisms")
    p = A.domain.array
    expo = p[:, None] * p[None, :] + p[None, :]
    out = A.entries.T * np.where(expo % 2 == 0, 1.0, -1.0)
    return SuperOp(out, A.domain)


def supercommutator(A: SuperOp, B: SuperOp) -> SuperOp:
    pa, pb = A.parity, B.parity
    if pa is None or pb is None:
        raise ValueError("supercommutator needs homogeneous operators")
    return A @ B - B @ A * ((-1) ** (pa * pb))


def partial_supertrace(X: np.ndarray, aux: GradedSpace, rest: GradedSpace) -> np.ndarray:
    """Supertrace over the leading tensor factor ``aux`` of ``aux ⊗ rest``."""
    if X.shape != (aux.dim * rest.dim,) * 2:
        raise ValueError("shape mismatch in partial supertrace")
    return _kernels.partial_supertrace(X, aux.array, rest.array)


# ---------------------------------------------------------------------------
# factor permutations and embeddings


@lru_cache(maxsize=512)
def _perm_maps(parities: tuple[tuple[int, ...], ...], perm: tuple[int, ...]):
    dims = [len(p) for p in parities]
    src, sign = _kernels.factor_permutation(dims, [np.asarray(p) for p in parities], list(perm))
    inv = np.empty_like(src)
    inv[src] = np.arange(src.shape[0])
    src.setflags(write=False)
    sign.setflags(write=False)
    inv.setflags(write=False)
    return src, sign, inv


def permutation_operator(factors: Sequence[GradedSpace], perm: Sequence[int]) -> SuperOp:
    """Signed operator moving old factor ``perm[j]`` to new position ``j``."""
    key = tuple(f.parities for f in factors)
    src, sign, _ = _perm_maps(key, tuple(perm))
    D = src.shape[0]
    P = np.zeros((D, D), dtype=complex)
    P[np.arange(D), src] = sign
    return SuperOp(P, tensor_spaces(*[factors[p] for p in perm]), tensor_spaces(*factors))


def permute_vector(v: np.ndarray, factors: Sequence[GradedSpace], perm: Sequence[int]) -> np.ndarray:
    src, sign, _ = _perm_maps(tuple(f.parities for f in factors), tuple(perm))
    return sign * np.asarray(v)[src]


def flip(V: GradedSpace, W: GradedSpace) -> SuperOp:
    """Super flip ``V ⊗ W -> W ⊗ V``."""
    return permutation_operator([V, W], [1, 0])


def embed(
    X: np.ndarray,
    factors: Sequence[GradedSpace],
    positions: Sequence[int],
    cod_factors: Sequence[GradedSpace] | None = None,
) -> np.ndarray:
    """Place ``X`` acting on ``factors[positions]`` (in that order) into the full product.

    ``cod_factors`` gives the codomain spaces replacing ``factors[positions]``
    when ``X`` is not an endomorphism.
    """
    positions = list(positions)
    if len(set(positions)) != len(positions):
        raise ValueError("repeated factor position")
    rest = [i for i in range(len(factors)) if i not in positions]
    perm = tuple(positions + rest)
    dom_key = tuple(f.parities for f in factors)
    _, s_dom, inv_dom = _perm_maps(dom_key, perm)
    d_rest = int(np.prod([factors[i].dim for i in rest])) if rest else 1
    if cod_factors is None:
        inv_cod, s_cod = inv_dom, s_dom
    else:
        cod_list = list(factors)
        for p, c in zip(positions, cod_factors):
            cod_list[p] = c
        _, s_cod, inv_cod = _perm_maps(tuple(f.parities for f in cod_list), perm)
    Y = np.kron(np.asarray(X, dtype=complex), np.eye(d_rest)) if d_rest > 1 else np.asarray(X, dtype=complex)
    return Y[np.ix_(inv_cod, inv_dom)] * (s_cod[inv_cod][:, None] * s_dom[inv_dom][None, :])


def apply_embedded(X: np.ndarray, v: np.ndarray, factors: Sequence[GradedSpace], positions: Sequence[int]) -> np.ndarray:
    """``embed(X, factors, positions) @ v`` without forming the full matrix."""
    positions = list(positions)
    rest = [i for i in range(len(factors)) if i not in positions]
    src, sign, _ = _perm_maps(tuple(f.parities for f in factors), tuple(positions + rest))
    w = (sign * np.asarray(v)[src]).reshape(X.shape[1], -1)
    y = (np.asarray(X) @ w).reshape(-1)
    out = np.empty(y.shape, dtype=np.result_type(y, complex))
    out[src] = sign * y
    return out


# ---------------------------------------------------------------------------
# symmetrizers and wedge powers


def wedge_indices(k: int, m: int, n: int) -> list[tuple[int, ...]]:
    """Admissible multi-indices ``a_1<..<a_b <= m < a_{b+1} <= .. <= a_k`` (0-based), lexicographic."""
    out = []
    for b in range(0, min(k, m) + 1):
        for ev in itertools.combinations(range(m), b):
            for od in itertools.combinations_with_replacement(range(m, m + n), k - b):
                out.append(ev + od)
    return sorted(out)


@dataclass(frozen=True)
class Projectors:
    k: int
    space: GradedSpace
    sym: np.ndarray
    antisym: np.ndarray
    wedge_basis: tuple[tuple[int, ...], ...]
    inclusion: np.ndarray  # columns: orthonormal wedge basis inside V^{⊗k}

    @property
    def wedge_space(self) -> GradedSpace:
        par = self.space.parities
        return GradedSpace(tuple(sum(par[a] for a in idx) % 2 for idx in self.wedge_basis))

    @property
    def tensor_space(self) -> GradedSpace:
        return tensor_spaces(*([self.space] * self.k))


@lru_cache(maxsize=64)
def _projectors(k: int, parities: tuple[int, ...]) -> Projectors:
    V = GradedSpace(parities)
    if not V.is_standard:
        raise ValueError("wedge powers are built for standard C^{m|n}")
    factors = [V] * k
    D = V.dim**k
    sym = np.zeros((D, D), dtype=complex)
    anti = np.zeros((D, D), dtype=complex)
    for perm in itertools.permutations(range(k)):
        inversions = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        P = permutation_operator(factors, perm).entries
        sym += P
        anti += P * (-1) ** inversions
    sym /= math.factorial(k)
    anti /= math.factorial(k)
    basis = wedge_indices(k, V.m, V.n)
    cols = []
    for idx in basis:
        e = np.zeros(D, dtype=complex)
        e[np.ravel_multi_index(idx, (V.dim,) * k) if k else 0] = 1.0
        col = anti @ e
        cols.append(col / np.linalg.norm(col))
    J = np.array(cols).T if cols else np.zeros((D, 0), dtype=complex)
    for arr in (sym, anti, J):
        arr.setflags(write=False)
    return Projectors(k, V, sym, anti, tuple(basis), J)


def projectors(k: int, V: GradedSpace) -> Projectors:
    """Symmetrizer ``H_k``, antisymmetrizer ``A_k`` and the wedge basis of ``V^{⊗k}``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _projectors(k, V.parities)


def wedge_restrict(X: np.ndarray, k: int, V: GradedSpace, rest_dim: int = 1) -> np.ndarray:
    """Restrict an operator on ``V^{⊗k} ⊗ rest`` to ``Λ^k V ⊗ rest``.

    The caller is responsible for the operator preserving the subspace;
    see :func:`preserves_wedge` for the check.
    """
    J = projectors(k, V).inclusion
    Jr = np.kron(J, np.eye(rest_dim)) if rest_dim > 1 else J
    return Jr.conj().T @ X @ Jr


def preserves_wedge(X: np.ndarray, k: int, V: GradedSpace, rest_dim: int = 1) -> float:
    """Norm of ``(1 - A_k) X A_k`` relative to ``|X|``."""
    A = projectors(k, V).antisym
    Ar = np.kron(A, np.eye(rest_dim)) if rest_dim > 1 else A
    leak = X @ Ar - Ar @ X @ Ar
    return float(np.linalg.norm(leak) / max(np.linalg.norm(X), 1e-300))


def gl_generator(V: GradedSpace, k: int, a: int, b: int) -> np.ndarray:
    """Action of ``e_ab`` on ``V^{⊗k}`` as ``Σ_i E_ab^{(i)}``."""
    E = unit_matrix(V.dim, a, b)
    factors = [V] * k
    out = np.zeros((V.dim**k,) * 2, dtype=complex)
    for i in range(k):
        out += embed(E, factors, [i])
    return out
