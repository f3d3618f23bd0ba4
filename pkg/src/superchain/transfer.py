"""Transfer matrices of the twisted XXX chain and the quantum Berezinian."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .graded import GradedSpace, partial_supertrace, projectors, tensor_spaces
from .modules import ChainSpec, Monodromy, fused_monodromy, fused_product


def gen_binomial(x: float, k: int) -> float:
    """``x (x-1) ... (x-k+1) / k!`` for any real ``x``; zero for ``k < 0``."""
    if k < 0:
        return 0.0
    return math.prod(x - i for i in range(k)) / math.factorial(k)


def factorial_ratio(N: int, k: int, l: int) -> float:
    """``(N-k)! / ((N-l)! (l-k)!)`` read as a falling factorial, valid for negative ``N``."""
    return gen_binomial(N - k, l - k)


def _as_mono(obj) -> Monodromy:
    return obj.monodromy() if isinstance(obj, ChainSpec) else obj


def _twist(obj, Q) -> np.ndarray:
    if Q is not None:
        return np.asarray(Q, dtype=complex).reshape(-1)
    if isinstance(obj, ChainSpec):
        return obj.twist
    return np.ones(obj.N, dtype=complex)


def twist_power(Q: np.ndarray, k: int) -> np.ndarray:
    """Diagonal of ``Q^{⊗k}``."""
    out = np.ones(1, dtype=complex)
    for _ in range(k):
        out = np.kron(out, Q)
    return out


def transfer_antisym(chain, k: int, u: complex, Q=None) -> np.ndarray:
    """``𝒯_{k,Q}(u) = str_{Λ^k}(Q^{∧k} T^{∧k}(u))`` on the chain space."""
    mono = _as_mono(chain)
    Q = _twist(chain, Q)
    H = mono.space
    if k == 0:
        return np.eye(H.dim, dtype=complex)
    Pk = projectors(k, mono.aux)
    J = Pk.inclusion
    Qw = J.conj().T @ np.diag(twist_power(Q, k)) @ J
    X = np.kron(Qw, np.eye(H.dim)) @ fused_monodromy(mono, k, u)
    return partial_supertrace(X, Pk.wedge_space, H)


def transfer_antisym_tensor(chain, k: int, u: complex, Q=None) -> np.ndarray:
    """Same operator computed as ``str_{V^{⊗k}}(A_k Q^{⊗k} T ... T)`` without restriction."""
    mono = _as_mono(chain)
    Q = _twist(chain, Q)
    H = mono.space
    if k == 0:
        return np.eye(H.dim, dtype=complex)
    Pk = projectors(k, mono.aux)
    X = np.kron(Pk.antisym * twist_power(Q, k)[None, :], np.eye(H.dim)) @ fused_product(mono, k, u)
    return partial_supertrace(X, Pk.tensor_space, H)


def transfer_sym(chain, k: int, u: complex, Q=None) -> np.ndarray:
    """``𝔗_{k,Q}(u) = str_{V^{⊗k}}(H_k Q^{(1)}..Q^{(k)} T^{(1,k+1)}(u) .. T^{(k,k+1)}(u-k+1))``."""
    mono = _as_mono(chain)
    Q = _twist(chain, Q)
    H = mono.space
    if k == 0:
        return np.eye(H.dim, dtype=complex)
    Pk = projectors(k, mono.aux)
    X = np.kron(Pk.sym * twist_power(Q, k)[None, :], np.eye(H.dim)) @ fused_product(mono, k, u, order="sym")
    return partial_supertrace(X, Pk.tensor_space, H)


def berezinian_series_check(chain, L: int, u: complex, Q=None) -> list[float]:
    """Residuals of ``Σ_k (-1)^k 𝒯_k(u) 𝔗_{l-k}(u-k) = δ_{l0}`` for ``l = 0..L``."""
    mono = _as_mono(chain)
    Q = _twist(chain, Q)
    d = mono.space.dim
    anti = [transfer_antisym(mono, k, u, Q) for k in range(L + 1)]
    sym = {(j, s): transfer_sym(mono, j, u - s, Q) for s in range(L + 1) for j in range(L + 1 - s)}
    out = []
    for l in range(L + 1):
        acc = np.zeros((d, d), dtype=complex)
        for k in range(l + 1):
            acc += (-1) ** k * anti[k] @ sym[(l - k, k)]
        target = np.eye(d) if l == 0 else np.zeros((d, d))
        scale = max(1.0, max(np.linalg.norm(anti[k]) * np.linalg.norm(sym[(l - k, k)]) for k in range(l + 1)))
        out.append(float(np.linalg.norm(acc - target) / scale))
    return out


# ---------------------------------------------------------------------------
# difference operators in the shift e^{-∂}


class OpFunc:
    """Operator-valued function of ``u`` supporting shifts and products."""

    __slots__ = ("f",)

    def __init__(self, f: Callable[[complex], np.ndarray]):
        self.f = f

    def __call__(self, u: complex) -> np.ndarray:
        return self.f(u)

    def shift(self, s: float) -> "OpFunc":
        f = self.f
        return OpFunc(lambda u: f(u - s))

    def __mul__(self, other) -> "OpFunc":
        f = self.f
        if isinstance(other, OpFunc):
            g = other.f
            return OpFunc(lambda u: f(u) @ g(u))
        return OpFunc(lambda u: f(u) * other)

    __rmul__ = __mul__

    def __add__(self, other: "OpFunc") -> "OpFunc":
        f, g = self.f, other.f
        return OpFunc(lambda u: f(u) + g(u))


class DiffOpSeries:
    """``Σ_k c_k(u) e^{-k∂}`` truncated at ``order``.

    Coefficients need ``*``, ``+`` and ``shift``; composition uses
    ``(f e^{-j∂})(g e^{-k∂}) = f(u) g(u-j) e^{-(j+k)∂}``.
    """

    def __init__(self, coeffs: Sequence, order: int):
        self.coeffs = [c for c in coeffs[: order + 1]] + [None] * max(0, order + 1 - len(coeffs))
        self.order = order

    def __matmul__(self, other: "DiffOpSeries") -> "DiffOpSeries":
        order = min(self.order, other.order)
        out: list = [None] * (order + 1)
        for j, f in enumerate(self.coeffs):
            if f is None:
                continue
            for k, g in enumerate(other.coeffs):
                if g is None or j + k > order:
                    continue
                term = f * g.shift(j)
                out[j + k] = term if out[j + k] is None else out[j + k] + term
        return DiffOpSeries(out, order)

    def __getitem__(self, k: int):
        return self.coeffs[k]


def dlq_operator(chain, l: int, u: complex, Q=None) -> list[np.ndarray]:
    """Coefficients of ``e^{-k∂}``, ``k=0..l``, in ``𝒟_{l,Q} = str(Π→(1 - Q^{(i)} T^{(i,l+1)} e^{-∂}) A_l)``."""
    mono = _as_mono(chain)
    Q = _twist(chain, Q)
    V, H = mono.aux, mono.space
    factors = [V] * l + [H]
    from .graded import embed

    Pl = projectors(l, V)
    d = H.dim
    eye = np.eye(V.dim**l * d, dtype=complex)
    series = DiffOpSeries([OpFunc(lambda _u: eye)], l)
    for i in range(l):
        qi = embed(np.diag(Q), factors[:l], [i]) if l else None

        def xi(x, i=i, qi=qi):
            return -np.kron(qi, np.eye(d)) @ embed(mono(x), factors, [i, l])

        series = series @ DiffOpSeries([OpFunc(lambda _u: eye), OpFunc(xi)], l)
    A = np.kron(Pl.antisym, np.eye(d))
    out = []
    for k in range(l + 1):
        c = series[k]
        mat = c(u) @ A if c is not None else np.zeros_like(A)
        out.append(partial_supertrace(mat, Pl.tensor_space, H))
    return out


def dlq_expected(chain, l: int, u: complex, Q=None) -> list[np.ndarray]:
    """``(-1)^k (N-k)!/((N-l)!(l-k)!) 𝒯_k(u)`` for ``k = 0..l``."""
    mono = _as_mono(chain)
    Nsup = mono.m - mono.n
    return [(-1) ** k * factorial_ratio(Nsup, k, l) * transfer_antisym(chain, k, u, Q) for k in range(l + 1)]


def s_transfer(chain, k: int, u: complex, Q=None) -> np.ndarray:
    """``𝒮_k = Σ_i (-1)^{k-i} (N-i)!/((N-k)!(k-i)!) 𝒯_i``."""
    mono = _as_mono(chain)
    Nsup = mono.m - mono.n
    d = mono.space.dim
    out = np.zeros((d, d), dtype=complex)
    for i in range(k + 1):
        c = (-1) ** (k - i) * factorial_ratio(Nsup, i, k)
        if c:
            out += c * transfer_antisym(chain, i, u, Q)
    return out


def s_transfer_relation_residual(chain, l: int, u: complex, ys: Sequence[float] = (0.0, 1.0, -0.5, 2.0), Q=None) -> float:
    """Check ``Σ_k (-1)^k C(N-k,l-k) 𝒮_k y^{l-k} = Σ_i (-1)^i C(N-i,l-i) 𝒯_i (y+1)^{l-i}``."""
    mono = _as_mono(chain)
    Nsup = mono.m - mono.n
    S = [s_transfer(chain, k, u, Q) for k in range(l + 1)]
    T = [transfer_antisym(chain, i, u, Q) for i in range(l + 1)]
    worst = 0.0
    for y in ys:
        lhs = sum((-1) ** k * factorial_ratio(Nsup, k, l) * S[k] * y ** (l - k) for k in range(l + 1))
        rhs = sum((-1) ** i * factorial_ratio(Nsup, i, l) * T[i] * (y + 1) ** (l - i) for i in range(l + 1))
        scale = max(1.0, float(np.linalg.norm(rhs)))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    return worst


def commutator_norm(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A @ B - B @ A) / max(np.linalg.norm(A) * np.linalg.norm(B), 1e-300))


def gl_invariance_residual(chain: ChainSpec, k: int, u: complex) -> float:
    """``[𝒯_{k,1}(u), e_ab] = 0`` for all ``a, b`` at trivial twist."""
    Tk = transfer_antisym(chain, k, u, np.ones(chain.N))
    worst = 0.0
    for a in range(chain.N):
        for b in range(chain.N):
            worst = max(worst, commutator_norm(Tk, chain.gl_action(a, b)))
    return worst


def cartan_invariance_residual(chain: ChainSpec, k: int, u: complex, Q=None) -> float:
    Tk = transfer_antisym(chain, k, u, Q)
    return max(commutator_norm(Tk, chain.gl_action(a, a)) for a in range(chain.N))


def asymptotic_supertrace(Q: np.ndarray, k: int, V: GradedSpace) -> complex:
    """``str(Q^{∧k})``, the large-``u`` limit of ``𝒯_{k,Q}``."""
    Pk = projectors(k, V)
    J = Pk.inclusion
    Qw = J.conj().T @ np.diag(twist_power(np.asarray(Q, dtype=complex), k)) @ J
    sign = np.where(Pk.wedge_space.array == 0, 1.0, -1.0)
    return complex(np.sum(np.diag(Qw) * sign))


def tensor_space_of(V: GradedSpace, k: int) -> GradedSpace:
    return tensor_spaces(*([V] * k))
