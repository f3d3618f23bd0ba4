"""Highest-weight gl(m|n) modules, evaluation chains and their monodromy."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .graded import GradedSpace, embed, gl_generator, kron_arrays, projectors, tensor_spaces, unit_matrix
from .rational import RationalMatrixFunction
from .rmatrix import wedge_action

MAX_CHAIN_DIM = 4096


@dataclass
class HighestWeightModule:
    """Finite-dimensional module with action matrices ``action[a, b] = ρ(e_ab)``."""

    m: int
    n: int
    space: GradedSpace
    action: np.ndarray  # (N, N, d, d)
    hw_vector: np.ndarray
    label: str = ""

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def dim(self) -> int:
        return self.space.dim

    @cached_property
    def weight(self) -> tuple[complex, ...]:
        v = self.hw_vector
        out = []
        for a in range(self.N):
            w = self.action[a, a] @ v
            out.append(complex(np.vdot(v, w) / np.vdot(v, v)))
        return tuple(out)

    def int_weight(self) -> tuple[int, ...]:
        return tuple(int(round(w.real)) for w in self.weight)

    def singular_residual(self) -> float:
        """``|e_ab v| + |e_aa v - Λ_a v|`` over ``a<b`` relative to ``|v|``."""
        v = self.hw_vector
        res = 0.0
        for a in range(self.N):
            res += float(np.linalg.norm(self.action[a, a] @ v - self.weight[a] * v))
            for b in range(a + 1, self.N):
                res += float(np.linalg.norm(self.action[a, b] @ v))
        return res / float(np.linalg.norm(v))

    def commutator_residual(self) -> float:
        """Max deviation from ``[e_ab, e_cd] = δ_bc e_ad - (-1)^{(|a|+|b|)(|c|+|d|)} δ_ad e_cb``."""
        par = [0] * self.m + [1] * self.n
        worst = 0.0
        N = self.N
        for a in range(N):
            for b in range(N):
                for c in range(N):
                    for d in range(N):
                        s = (-1) ** (((par[a] + par[b]) * (par[c] + par[d])) % 2)
                        X, Y = self.action[a, b], self.action[c, d]
                        lhs = X @ Y - s * Y @ X
                        rhs = np.zeros_like(lhs)
                        if b == c:
                            rhs = rhs + self.action[a, d]
                        if a == d:
                            rhs = rhs - s * self.action[c, b]
                        worst = max(worst, float(np.abs(lhs - rhs).max(initial=0.0)))
        return worst


def vector_rep(m: int, n: int) -> HighestWeightModule:
    V = GradedSpace.standard(m, n)
    N = m + n
    act = np.zeros((N, N, N, N), dtype=complex)
    for a in range(N):
        for b in range(N):
            act[a, b] = unit_matrix(N, a, b)
    hw = np.zeros(N, dtype=complex)
    hw[0] = 1.0
    return HighestWeightModule(m, n, V, act, hw, "vector")


def wedge_rep(k: int, m: int, n: int) -> HighestWeightModule:
    """``Λ^k C^{m|n}`` on the orthonormal wedge basis; its first basis vector is highest."""
    V = GradedSpace.standard(m, n)
    Pk = projectors(k, V)
    N = m + n
    d = len(Pk.wedge_basis)
    if d == 0:
        raise ValueError(f"Λ^{k} C^{m}|{n} is zero")
    act = np.zeros((N, N, d, d), dtype=complex)
    for a in range(N):
        for b in range(N):
            act[a, b] = wedge_action(k, V, a, b)
    hw = np.zeros(d, dtype=complex)
    hw[0] = 1.0
    mod = HighestWeightModule(m, n, Pk.wedge_space, act, hw, f"wedge:{k}")
    if mod.singular_residual() > 1e-12:
        raise ArithmeticError("first wedge basis vector is not singular")
    return mod


def tensor_power_module(k: int, m: int, n: int) -> HighestWeightModule:
    """``(C^{m|n})^{⊗k}`` with ``e_ab -> Σ_i E_ab^{(i)}``; distinguished vector ``v_1^{⊗k}``."""
    V = GradedSpace.standard(m, n)
    N = m + n
    act = np.zeros((N, N, N**k, N**k), dtype=complex)
    for a in range(N):
        for b in range(N):
            act[a, b] = gl_generator(V, k, a, b)
    hw = np.zeros(N**k, dtype=complex)
    hw[0] = 1.0
    return HighestWeightModule(m, n, tensor_spaces(*([V] * k)), act, hw, f"tensor:{k}")


def cyclic_hw_module(ambient: HighestWeightModule, hw: np.ndarray, cap: int = MAX_CHAIN_DIM) -> HighestWeightModule:
    """Submodule generated by a singular weight vector ``hw`` of ``ambient``.

    Lowering operators are applied breadth-first; every weight space is
    orthonormalized separately so the resulting basis stays homogeneous.
    """
    N = ambient.N
    hw = np.asarray(hw, dtype=complex)
    hw = hw / np.linalg.norm(hw)
    diag = np.array([np.real(np.diag(ambient.action[a, a])) for a in range(N)]).T  # ambient basis is a weight basis

    def weight_of(v):
        idx = np.nonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
        ws = {tuple(np.round(diag[i], 9)) for i in idx}
        if len(ws) != 1:
            raise ValueError("vector is not a weight vector")
        return ws.pop(), idx

    spaces: dict[tuple, list[np.ndarray]] = {}
    order: list[np.ndarray] = []
    parities: list[int] = []
    queue = [hw]
    amb_par = ambient.space.array
    while queue:
        v = queue.pop(0)
        w, idx = weight_of(v)
        basis = spaces.setdefault(w, [])
        r = v.copy()
        for q in basis:
            r = r - q * np.vdot(q, r)
        if np.linalg.norm(r) <= 1e-10 * max(np.linalg.norm(v), 1.0):
            continue
        r = r / np.linalg.norm(r)
        pars = set(amb_par[idx].tolist())
        if len(pars) != 1:
            raise ValueError("generated vector is not homogeneous")
        basis.append(r)
        order.append(r)
        parities.append(pars.pop())
        if len(order) > cap:
            raise ValueError(f"cyclic module exceeds dimension cap {cap}")
        for a in range(N):
            for b in range(a + 1, N):
                x = ambient.action[b, a] @ r
                if np.linalg.norm(x) > 1e-12:
                    queue.append(x)
    B = np.array(order).T
    act = np.einsum("ji,abjk,kl->abil", B.conj(), ambient.action, B)
    e0 = np.zeros(B.shape[1], dtype=complex)
    e0[0] = 1.0
    return HighestWeightModule(ambient.m, ambient.n, GradedSpace(tuple(parities)), act, e0, "cyclic")


def parse_rep(spec: str, m: int, n: int) -> HighestWeightModule:
    """``vector``, ``wedge:k`` or ``cyclic:k`` (module generated by ``v_1^{⊗k}``)."""
    if spec == "vector":
        return vector_rep(m, n)
    kind, _, arg = spec.partition(":")
    if kind in ("wedge", "cyclic") and arg.isdigit() and int(arg) >= 1:
        k = int(arg)
        if kind == "wedge":
            return wedge_rep(k, m, n)
        if m == 0:
            raise ValueError("cyclic:k needs an even generator (m >= 1)")
        amb = tensor_power_module(k, m, n)
        mod = cyclic_hw_module(amb, amb.hw_vector)
        mod.label = spec
        return mod
    raise ValueError(f"unknown representation '{spec}'")


# ---------------------------------------------------------------------------
# chains


@dataclass
class ChainSpec:
    """Tensor product of evaluation modules ``M_1(z_1) ⊗ ... ⊗ M_ℓ(z_ℓ)`` with a diagonal twist."""

    m: int
    n: int
    sites: list[tuple[HighestWeightModule, complex]]
    twist: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.m < 0 or self.n < 0 or self.m + self.n == 0:
            raise ValueError("invalid (m|n)")
        if not self.sites:
            raise ValueError("a chain needs at least one site")
        for mod, _ in self.sites:
            if (mod.m, mod.n) != (self.m, self.n):
                raise ValueError("site module does not match (m|n)")
        self.sites = [(mod, complex(z)) for mod, z in self.sites]
        if self.twist is None:
            self.twist = np.ones(self.N, dtype=complex)
        self.twist = np.asarray(self.twist, dtype=complex).reshape(-1)
        if self.twist.shape != (self.N,):
            raise ValueError("twist must list N diagonal entries")
        if self.dim > MAX_CHAIN_DIM:
            raise ValueError(f"chain dimension {self.dim} exceeds cap {MAX_CHAIN_DIM}")

    @classmethod
    def vector_chain(cls, m: int, n: int, z: Sequence[complex], twist=None) -> "ChainSpec":
        return cls(m, n, [(vector_rep(m, n), zi) for zi in z], twist)

    def with_points(self, z: Sequence[complex], twist=None) -> "ChainSpec":
        return ChainSpec(self.m, self.n, [(mod, zi) for (mod, _), zi in zip(self.sites, z)], self.twist if twist is None else twist)

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def kappa(self) -> np.ndarray:
        return np.array([1.0] * self.m + [-1.0] * self.n)

    @property
    def aux(self) -> GradedSpace:
        return GradedSpace.standard(self.m, self.n)

    @property
    def points(self) -> np.ndarray:
        return np.array([z for _, z in self.sites], dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        """``(ℓ, N)`` array of site highest weights."""
        return np.array([mod.weight for mod, _ in self.sites], dtype=complex)

    @cached_property
    def site_spaces(self) -> list[GradedSpace]:
        return [mod.space for mod, _ in self.sites]

    @cached_property
    def space(self) -> GradedSpace:
        return tensor_spaces(*self.site_spaces)

    @property
    def dim(self) -> int:
        return int(np.prod([mod.dim for mod, _ in self.sites]))

    @cached_property
    def vacuum(self) -> np.ndarray:
        v = np.ones(1, dtype=complex)
        for mod, _ in self.sites:
            v = np.kron(v, mod.hw_vector)
        return v

    def gl_action(self, a: int, b: int) -> np.ndarray:
        """``e_ab`` on the whole chain (graded coproduct)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, (mod, _) in enumerate(self.sites):
            out += embed(mod.action[a, b], self.site_spaces, [i])
        return out

    @cached_property
    def residues(self) -> list[np.ndarray]:
        """``C_i = Σ_ab E_ab ⊗ (-1)^{|b|} ρ_i(e_ba)`` placed on ``V ⊗ H`` at site ``i``."""
        V = self.aux
        par = V.array
        factors = [V] + self.site_spaces
        out = []
        for i, (mod, _) in enumerate(self.sites):
            C = np.zeros((V.dim * mod.dim,) * 2, dtype=complex)
            for a in range(self.N):
                for b in range(self.N):
                    C += kron_arrays(unit_matrix(V.dim, a, b), mod.action[b, a] * (-1) ** par[b], par, mod.space.array, mod.space.array)
            out.append(embed(C, factors, [0, i + 1]))
        return out

    def monodromy(self) -> "Monodromy":
        return chain_monodromy(self)


class Monodromy:
    """Evaluated monodromy ``T(u)`` on ``V ⊗ H`` (auxiliary factor first).

    ``func`` maps a complex point to the full matrix.  ``rational`` is kept
    when the matrix-polynomial form is known.
    """

    def __init__(
        self,
        m: int,
        n: int,
        space: GradedSpace,
        func: Callable[[complex], np.ndarray],
        rational: RationalMatrixFunction | None = None,
        poles: Sequence[complex] = (),
    ):
        self.m, self.n = m, n
        self.space = space
        self._func = func
        self.rational = rational
        self.poles = tuple(complex(p) for p in poles)

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def aux(self) -> GradedSpace:
        return GradedSpace.standard(self.m, self.n)

    def __call__(self, u: complex) -> np.ndarray:
        return self._func(complex(u))

    def entry(self, a: int, b: int, u: complex) -> np.ndarray:
        """Operator ``T_ab(u)`` on ``H`` (0-based indices)."""
        return extract_block(self(u), self.aux, self.space, a, b)


def extract_block(X: np.ndarray, aux: GradedSpace, rest: GradedSpace, a: int, b: int) -> np.ndarray:
    """``X_ab`` from ``X = Σ E_ab ⊗ X_ab`` (graded tensor convention)."""
    d = rest.dim
    blk = X[a * d : (a + 1) * d, b * d : (b + 1) * d]
    p = rest.array
    if aux.parities[b]:
        blk = blk * np.where((p[:, None] + p[None, :]) % 2 == 0, 1.0, -1.0)
    return blk


def assemble_blocks(blocks: np.ndarray, aux: GradedSpace, rest: GradedSpace) -> np.ndarray:
    """Inverse of :func:`extract_block`; ``blocks`` has shape ``(N, N, d, d)``."""
    N, d = aux.dim, rest.dim
    out = np.zeros((N * d, N * d), dtype=complex)
    p = rest.array
    sgn = np.where((p[:, None] + p[None, :]) % 2 == 0, 1.0, -1.0)
    for a in range(N):
        for b in range(N):
            blk = blocks[a, b] * sgn if aux.parities[b] else blocks[a, b]
            out[a * d : (a + 1) * d, b * d : (b + 1) * d] = blk
    return out


def chain_monodromy(chain: ChainSpec) -> Monodromy:
    """``T(u) = T^{(0ℓ)}(u) ... T^{(01)}(u)`` with ``T^{(0i)}(u) = 1 + C_i/(u - z_i)``."""
    D = chain.N * chain.dim
    eye = np.eye(D, dtype=complex)
    rmf = RationalMatrixFunction(eye[None], [1.0])
    for C, (_, z) in reversed(list(zip(chain.residues, chain.sites))):
        site = RationalMatrixFunction(np.stack([C - z * eye, eye]), [-z, 1.0])
        rmf = rmf @ site
    rmf = rmf.reduce()
    return Monodromy(chain.m, chain.n, chain.space, rmf, rmf, chain.points)


def rtt_residual(mono: Monodromy, u: complex, v: complex) -> float:
    """``R^{(12)}(u-v) T^{(13)}(u) T^{(23)}(v) = T^{(23)}(v) T^{(13)}(u) R^{(12)}(u-v)``."""
    V, H = mono.aux, mono.space
    f = [V, V, H]
    from .rmatrix import r_eval

    R = embed(r_eval(V, u - v), f, [0, 1])
    T1 = embed(mono(u), f, [0, 2])
    T2 = embed(mono(v), f, [1, 2])
    lhs = R @ T1 @ T2
    rhs = T2 @ T1 @ R
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def ell_weight_residual(chain: ChainSpec, u: complex) -> float:
    """Deviation of ``T_aa(u) v^+`` from the product formula, plus ``T_ab v^+`` for ``a>b``."""
    mono = chain.monodromy()
    v = chain.vacuum
    kap = chain.kappa
    lam = chain.weights
    worst = 0.0
    for a in range(chain.N):
        expect = np.prod([(u - z + kap[a] * lam[i, a]) / (u - z) for i, z in enumerate(chain.points)])
        worst = max(worst, float(np.linalg.norm(mono.entry(a, a, u) @ v - expect * v)))
        for b in range(a):
            worst = max(worst, float(np.linalg.norm(mono.entry(a, b, u) @ v)))
    return worst


# ---------------------------------------------------------------------------
# fusion of the monodromy


def fused_product(mono: Monodromy, k: int, u: complex, order: str = "antisym") -> np.ndarray:
    """Ordered products of ``T^{(i, k+1)}`` on ``V^{⊗k} ⊗ H``.

    ``antisym``: ``T^{(k,k+1)}(u) ... T^{(1,k+1)}(u-k+1)``;
    ``sym``: ``T^{(1,k+1)}(u) ... T^{(k,k+1)}(u-k+1)``.
    """
    V = mono.aux
    factors = [V] * k + [mono.space]
    D = V.dim**k * mono.space.dim
    out = np.eye(D, dtype=complex)
    for i in range(1, k + 1):
        if order == "antisym":
            pos, arg = k - i, u - i + 1  # i-th factor from the left is T^{(k-i+1)}(u - i + 1)
        elif order == "sym":
            pos, arg = i - 1, u - i + 1
        else:
            raise ValueError(order)
        out = out @ embed(mono(arg), factors, [pos, k])
    return out


def fused_monodromy(mono: Monodromy, k: int, u: complex, check: bool = True) -> np.ndarray:
    """``T^{∧k}(u)`` on ``Λ^k V ⊗ H``."""
    if k == 0:
        return np.eye(mono.space.dim, dtype=complex)
    full = fused_product(mono, k, u)
    Pk = projectors(k, mono.aux)
    d = mono.space.dim
    if check:
        A = np.kron(Pk.antisym, np.eye(d))
        leak = np.linalg.norm(full @ A - A @ full @ A) / max(np.linalg.norm(full), 1e-300)
        if leak > 1e-8:
            raise ArithmeticError(f"fused monodromy leaves the wedge subspace (leak {leak:.2e})")
    J = np.kron(Pk.inclusion, np.eye(d))
    return J.conj().T @ full @ J


def polynomial_from_roots(roots: Sequence[complex]) -> np.ndarray:
    return P.polyfromroots(list(roots)) if len(roots) else np.array([1.0 + 0j])
