"""Nested Bethe ansatz for the gl(m|n) XXX chain.

Bethe parameters are passed level by level: ``t[a-1]`` lists the
variables ``t^a_1 .. t^a_{ξ^a}``.  Two independent constructions of the
off-shell Bethe vector are provided (a supertrace formula and the nested
recursion through gl(m-1|n)); they are cross-checked in the tests.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .graded import GradedSpace, apply_embedded, embed, kron_arrays, partial_supertrace, permute_vector, tensor_spaces, unit_matrix
from .modules import ChainSpec, Monodromy, assemble_blocks, extract_block
from .rational import RationalFunction
from .rmatrix import r_eval
from .transfer import DiffOpSeries, transfer_antisym, transfer_sym

logger = logging.getLogger(__name__)

Levels = Sequence[Sequence[complex]]


def max_workers() -> int:
    import os

    try:
        return max(1, int(os.environ.get("SUPERCHAIN_THREADS", "1")))
    except ValueError:
        return 1


def excitations(t: Levels) -> tuple[int, ...]:
    return tuple(len(level) for level in t)


def split_levels(xi: Sequence[int], flat: Sequence[complex]) -> list[list[complex]]:
    out, pos = [], 0
    for x in xi:
        out.append([complex(v) for v in flat[pos : pos + x]])
        pos += x
    if pos != len(flat):
        raise ValueError("number of Bethe parameters does not match the excitation profile")
    return out


def flatten_levels(t: Levels) -> tuple[np.ndarray, np.ndarray]:
    """Values and 0-based level indices in lexicographic order."""
    vals = [complex(v) for level in t for v in level]
    lev = [a for a, level in enumerate(t) for _ in level]
    return np.array(vals, dtype=complex), np.array(lev, dtype=np.int64)


def _check_profile(N: int, t: Levels):
    if len(t) != N - 1:
        raise ValueError(f"expected {N - 1} levels of Bethe parameters, got {len(t)}")


def parity_of(m: int, a: int) -> int:
    """Parity of the 1-based index ``a`` in gl(m|n)."""
    return 0 if a <= m else 1


# ---------------------------------------------------------------------------
# supertrace formula


def bv_hat_operator(mono: Monodromy, t: Levels) -> np.ndarray:
    """Unnormalized ``B̂_ξ(t)`` as an operator on the chain space."""
    _check_profile(mono.N, t)
    V, H = mono.aux, mono.space
    tau, lev = flatten_levels(t)
    K = tau.size
    if K == 0:
        return np.eye(H.dim, dtype=complex)
    factors = [V] * K + [H]
    X = np.eye(V.dim**K * H.dim, dtype=complex)
    for s in range(K):
        X = X @ embed(mono(tau[s]), factors, [s, K])
    for s in range(K):
        for s2 in range(s + 1, K):
            X = X @ embed(r_eval(V, tau[s2] - tau[s]), factors, [s2, s])
    E = np.ones((1, 1), dtype=complex)
    dom = np.zeros(1, dtype=np.int64)
    for a in lev:
        Ea = unit_matrix(V.dim, a + 1, a)
        E = kron_arrays(E, Ea, dom, V.array, V.array)
        dom = (dom[:, None] + V.array[None, :]).reshape(-1) % 2
    X = X @ np.kron(E, np.eye(H.dim))
    return partial_supertrace(X, tensor_spaces(*([V] * K)), H)


def bv_normalization(m: int, t: Levels) -> complex:
    """Scalar turning ``B̂`` into the normalized ``B``."""
    c = 1.0 + 0j
    for a, level in enumerate(t, start=1):
        sgn = (-1) ** parity_of(m, a + 1)
        for i in range(len(level)):
            for j in range(i + 1, len(level)):
                c /= level[j] - level[i] + sgn
    for a in range(len(t)):
        for b in range(a + 1, len(t)):
            for ti in t[a]:
                for tj in t[b]:
                    c /= tj - ti
    return c


def bv_hat_vector(mono: Monodromy, t: Levels, vacuum: np.ndarray) -> np.ndarray:
    """``B̂_ξ(t) v`` evaluated on the vector only.

    ``E_{21}^{⊗ξ^1} ⊗ ..`` has a single nonzero column, so the supertrace
    collapses to one matrix element and no operator on ``V^{⊗K} ⊗ H`` is formed.
    """
    _check_profile(mono.N, t)
    V, H = mono.aux, mono.space
    tau, lev = flatten_levels(t)
    K = tau.size
    vac = np.asarray(vacuum, dtype=complex)
    if K == 0:
        return vac.copy()
    factors = [V] * K + [H]
    E = np.ones((1, 1), dtype=complex)
    dom = np.zeros(1, dtype=np.int64)
    for a in lev:
        E = kron_arrays(E, unit_matrix(V.dim, a + 1, a), dom, V.array, V.array)
        dom = (dom[:, None] + V.array[None, :]).reshape(-1) % 2
    col = int(np.flatnonzero(np.any(E != 0, axis=0))[0])
    vec = np.kron(E[:, col], vac)
    for s in reversed(range(K)):
        for s2 in reversed(range(s + 1, K)):
            vec = apply_embedded(r_eval(V, tau[s2] - tau[s]), vec, factors, [s2, s])
    for s in reversed(range(K)):
        vec = apply_embedded(mono(tau[s]), vec, factors, [s, K])
    out = vec.reshape(-1, H.dim)[col]
    if dom[col]:
        # str sign (-1)^{|α|(1+|i|+|j|)} with j running over the (homogeneous) vacuum
        pv = int(H.array[int(np.argmax(np.abs(vac)))])
        out = out * np.where((1 + H.array + pv) % 2 == 1, -1.0, 1.0)
    return out


def bv_supertrace(mono: Monodromy, t: Levels, vacuum: np.ndarray) -> np.ndarray:
    """Normalized off-shell Bethe vector ``B_ξ(t) v`` from the supertrace formula."""
    return bv_normalization(mono.m, t) * bv_hat_vector(mono, t, vacuum)


# ---------------------------------------------------------------------------
# nested recursion


def lower_monodromy(mono: Monodromy, x: Sequence[complex]) -> Monodromy:
    """gl(m-1|n) monodromy on ``H ⊗ W^{⊗r}``: ``ψ(T)^{(0,H)} π(x_r)^{(0,W_1)} ... π(x_1)^{(0,W_r)}``."""
    if mono.m == 0:
        raise ValueError("recursion removes an even index; needs m >= 1")
    W = GradedSpace.standard(mono.m - 1, mono.n) if mono.N > 1 else None
    if W is None:
        raise ValueError("no lower rank left")
    H = mono.space
    r = len(x)
    factors = [W, H] + [W] * r
    newH = tensor_spaces(H, *([W] * r))
    sel = np.concatenate([np.arange(a * H.dim, (a + 1) * H.dim) for a in range(1, mono.N)])
    xs = [complex(v) for v in x]

    def func(u: complex) -> np.ndarray:
        top = mono(u)[np.ix_(sel, sel)]
        out = embed(top, factors, [0, 1])
        for i in range(r):
            xi = xs[r - 1 - i]
            out = out @ embed(r_eval(W, u - xi) / (u - xi), factors, [0, i + 2])
        return out

    return Monodromy(mono.m - 1, mono.n, newH, func, poles=tuple(mono.poles) + tuple(xs))


def _creation_row(full: np.ndarray, N: int, d: int) -> np.ndarray:
    """``B(u) = Σ_a E_{1,a+1} ⊗ T_{1,a+1}(u)`` as a map ``W ⊗ H -> H``."""
    return full[:d, d : N * d]


def apply_creation(
    blocks: Sequence[np.ndarray], W: GradedSpace, H: GradedSpace, vec: np.ndarray, r: int
) -> np.ndarray:
    """``B^{(1)} ... B^{(r)}`` applied to a vector of ``W^{⊗r} ⊗ H``; ``blocks[i]`` is ``B(u_{i+1})``."""
    out = vec
    for i in range(r, 0, -1):
        left = tensor_spaces(*([W] * (i - 1))) if i > 1 else GradedSpace.even(1)
        Bm = blocks[i - 1]
        cod = H.array
        dom = (W.array[:, None] + H.array[None, :]).reshape(-1) % 2
        full = kron_arrays(np.eye(left.dim), Bm, left.array, cod, dom)
        out = full @ out
    return out


def bv_recursive(mono: Monodromy, t: Levels, vacuum: np.ndarray) -> np.ndarray:
    """``B_ξ(t) v`` through the nested recursion (requires ``m >= 1`` at every nontrivial step)."""
    _check_profile(mono.N, t)
    if all(len(level) == 0 for level in t):
        return np.asarray(vacuum, dtype=complex)
    if mono.m == 0:
        raise ValueError("the nested recursion needs an even first index; use the supertrace formula")
    u = [complex(v) for v in t[0]]
    r = len(u)
    W = GradedSpace.standard(mono.m - 1, mono.n)
    H = mono.space
    w1 = np.zeros(W.dim, dtype=complex)
    w1[0] = 1.0
    vac = np.asarray(vacuum, dtype=complex)
    for _ in range(r):
        vac = np.kron(vac, w1)
    X = bv_recursive(lower_monodromy(mono, u), list(t[1:]), vac) if mono.N > 2 else vac
    # H ⊗ W_1 ⊗ .. ⊗ W_r -> W_r ⊗ .. ⊗ W_1 ⊗ H, so B(t_i) meets the slot carrying π(t_i)
    X = permute_vector(X, [H] + [W] * r, list(range(r, 0, -1)) + [0])
    blocks = [_creation_row(mono(x), mono.N, H.dim) for x in u]
    return apply_creation(blocks, W, H, X, r)


def offshell_factor(chain: ChainSpec, t: Levels) -> complex:
    """Polynomial prefactor turning ``B v`` into the off-shell Bethe vector."""
    c = 1.0 + 0j
    for level in t:
        for ti in level:
            for z in chain.points:
                c *= ti - z
    for a in range(len(t) - 1):
        for ti in t[a]:
            for tj in t[a + 1]:
                c *= tj - ti
    return c


def bv_offshell(chain: ChainSpec, t: Levels, method: str = "supertrace") -> np.ndarray:
    mono = chain.monodromy()
    fn = bv_supertrace if method == "supertrace" else bv_recursive
    return offshell_factor(chain, t) * fn(mono, t, chain.vacuum)


# ---------------------------------------------------------------------------
# Bethe ansatz equations


def _bae_data(chain: ChainSpec, xi: Sequence[int], Q=None):
    lev = np.array([a for a, x in enumerate(xi) for _ in range(x)], dtype=np.int64)
    q = chain.twist if Q is None else np.asarray(Q, dtype=complex)
    return lev, chain.points, chain.weights, q, chain.kappa


def bae_residual(chain: ChainSpec, t: Levels, Q=None) -> np.ndarray:
    flat, _ = flatten_levels(t)
    lev, z, lam, q, kap = _bae_data(chain, excitations(t), Q)
    return _kernels.bae_system(flat, lev, z, lam, q, kap)[0]


def bae_jacobian(chain: ChainSpec, t: Levels, Q=None) -> np.ndarray:
    flat, _ = flatten_levels(t)
    lev, z, lam, q, kap = _bae_data(chain, excitations(t), Q)
    return _kernels.bae_system(flat, lev, z, lam, q, kap)[1]


@dataclass
class SolutionReport:
    t: list[list[complex]]
    residual_norm: float
    converged: bool
    iterations: int
    off_diagonal: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def flat(self) -> np.ndarray:
        return flatten_levels(self.t)[0]

    def to_json(self) -> dict:
        return {
            "t": [[[v.real, v.imag] for v in level] for level in self.t],
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "off_diagonal": self.off_diagonal,
            "warnings": list(self.warnings),
        }


def canonical_order(t: Levels, m: int) -> list[list[complex]]:
    """Sort each level; the odd level ``m`` is sorted by real part so that the non-degeneracy condition holds."""
    def key(v):
        return (round(v.real, 9), round(v.imag, 9))

    return [sorted((complex(v) for v in level), key=key) for level in t]


def is_off_diagonal(t: Levels, m: int, tol: float = 1e-8, poles: Sequence[complex] = ()) -> tuple[bool, list[str]]:
    """Non-degeneracy test; ``poles`` are the chain points, where ``T(u)`` and hence ``B(t)`` blow up."""
    notes = []
    for a, level in enumerate(t, start=1):
        if any(abs(ti - z) < tol for ti in level for z in poles):
            notes.append(f"root at an inhomogeneity on level {a}")
    for a, level in enumerate(t, start=1):
        for i in range(len(level)):
            for j in range(i + 1, len(level)):
                if abs(level[i] - level[j]) < tol:
                    notes.append(f"coinciding roots at level {a}")
        if a < len(t):
            for ti in level:
                for tj in t[a]:
                    if abs(ti - tj) < tol:
                        notes.append(f"root shared by levels {a} and {a + 1}")
    if 1 <= m <= len(t):
        lv = t[m - 1]
        sgn = (-1) ** parity_of(m, m + 1)
        for i in range(len(lv)):
            for j in range(i + 1, len(lv)):
                if abs(lv[j] - lv[i] - sgn) < tol:
                    notes.append("roots on the excluded hyperplane of the odd level")
    return not notes, notes


def default_guesses(chain: ChainSpec, xi: Sequence[int], grid: int = 5, seed: int = 0, near: int = 25) -> list[np.ndarray]:
    """``grid × grid`` complex starting points around the inhomogeneities.

    ``near`` extra seeded starts put every root within ``~0.3`` of a randomly
    chosen chain point, where physical roots tend to sit.
    """
    z = chain.points
    re = np.linspace(z.real.min() - 2.0, z.real.max() + 2.0, grid)
    im = np.linspace(-1.5, 1.5, grid)
    K = int(sum(xi))
    rng = np.random.default_rng(seed)
    offs = np.array([0.37 * s + 0.21j * s for s in range(K)])
    out = []
    for x in re:
        for y in im:
            jitter = 1e-3 * (rng.standard_normal(K) + 1j * rng.standard_normal(K))
            out.append(x + 1j * y + offs + jitter)
    for _ in range(near):
        base = z[rng.integers(0, z.size, K)]
        out.append(base + 0.3 * (rng.standard_normal(K) + 1j * rng.standard_normal(K)))
    return out


def _regularizer(t: np.ndarray, lev: np.ndarray, z: np.ndarray, lam: np.ndarray, kap: np.ndarray):
    """Divisor ``D_i`` of the i-th cleared equation and ``∂_k D_i / D_i``.

    ``D_i`` collects factors vanishing on degenerate configurations (root at a
    point, coinciding roots, roots shared with a neighbouring level) and the
    factors common to both sides.  ``F / D`` has the same physical roots while
    the degenerate ones become poles, which keeps Newton away from them.
    """
    K = t.size
    D = np.ones(K, dtype=complex)
    g = np.zeros((K, K), dtype=complex)
    for i in range(K):
        a = lev[i]
        for j in range(z.size):
            shifts = {0j}
            c = kap[a] * lam[j, a]
            if c == kap[a + 1] * lam[j, a + 1]:
                shifts.add(complex(c))
            for c in shifts:
                f = t[i] - z[j] + c
                D[i] *= f
                g[i, i] += 1.0 / f
        for k in range(K):
            if k != i and abs(lev[k] - a) <= 1:
                f = t[i] - t[k]
                D[i] *= f
                g[i, i] += 1.0 / f
                g[i, k] -= 1.0 / f
    return D, g


def relative_residual(F: np.ndarray, scale: np.ndarray) -> float:
    """``‖F_i / (|lhs_i| + |rhs_i|)‖``; scale-free, so large roots are judged fairly."""
    return float(np.linalg.norm(F / np.maximum(scale, 1e-300)))


def newton(
    chain: ChainSpec, xi: Sequence[int], t0: np.ndarray, tol: float = 1e-12, max_iter: int = 50, Q=None, regularize: bool = True
):
    """Newton on ``F`` or, with ``regularize``, on ``F / D``.

    Convergence is judged on the relative residual of the cleared polynomial
    equations ``F``.  Returns ``(t, residual, converged, iterations)``.
    """
    lev, z, lam, q, kap = _bae_data(chain, xi, Q)
    t = np.array(t0, dtype=complex)
    res = np.inf

    def resid(t):
        F, J = _kernels.bae_system(t, lev, z, lam, q, kap)
        return F, J, relative_residual(F, _kernels.bae_scale(t, lev, z, lam, q, kap))

    for it in range(1, max_iter + 1):
        F, J, res = resid(t)
        if not np.isfinite(res):
            return t, res, False, it
        try:
            if regularize:
                D, g = _regularizer(t, lev, z, lam, kap)
                step = np.linalg.solve((J - F[:, None] * g) / D[:, None], F / D)
            else:
                step = np.linalg.solve(J, F)
        except (np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError):
            return t, res, False, it
        if not np.all(np.isfinite(step)):
            return t, res, False, it
        if res < tol:
            # one polishing step, kept only if it helps
            t2 = t - step
            res2 = resid(t2)[2]
            if res2 < res:
                t, res = t2, res2
            return t, res, True, it
        nrm = np.linalg.norm(step)
        if nrm > 10.0:
            step *= 10.0 / nrm
        t = t - step
    res = resid(t)[2]
    return t, res, res < tol, max_iter


def _repeated(q: np.ndarray, tol: float = 1e-12) -> bool:
    return any(abs(q[a] - q[b]) <= tol * (1 + abs(q[a])) for a in range(q.size) for b in range(a + 1, q.size))


CONTINUATION_STEPS = 20


def _continuation(chain: ChainSpec, xi, g: np.ndarray, q: np.ndarray, tol: float, max_iter: int, regularize: bool):
    """Solve at a generic twist, then follow the root back to ``q``.

    With repeated twist entries some roots escape to infinity (they belong to
    descendants); those tracks fail and are dropped.
    """
    q0 = q * (1.0 + (0.3 + 0.2j) * (np.arange(q.size) + 1) / q.size)
    t, res, ok, it = newton(chain, xi, g, tol, max_iter, q0, regularize)
    if not ok:
        return t, res, False, it
    total = it
    for s in np.linspace(0.0, 1.0, CONTINUATION_STEPS + 1)[1:]:
        t, res, ok, it = newton(chain, xi, t, tol, max_iter, (1 - s) * q0 + s * q, regularize)
        total += it
        if not ok:
            return t, res, False, total
    return t, res, True, total


def solve_bae(
    chain: ChainSpec,
    xi: Sequence[int],
    guesses: Sequence[np.ndarray] | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
    dedup: float = 1e-8,
    Q=None,
    seed: int = 0,
) -> list[SolutionReport]:
    """Multi-start Newton on the polynomial Bethe equations.

    Returns every distinct converged start plus nothing for the failures;
    ordering follows the guess order, so runs are reproducible.
    """
    xi = tuple(int(x) for x in xi)
    if len(xi) != chain.N - 1 or any(x < 0 for x in xi):
        raise ValueError("excitation profile must have N-1 non-negative entries")
    if sum(xi) == 0:
        return [SolutionReport([[] for _ in xi], 0.0, True, 0, True)]
    if guesses is None:
        guesses = default_guesses(chain, xi, seed=seed)
    K = sum(xi)
    for g in guesses:
        if len(g) != K:
            raise ValueError("guess length does not match the excitation profile")

    q = chain.twist if Q is None else np.asarray(Q, dtype=complex)

    def run(g):
        # regularized and plain Newton from the same start; the classification below sorts out the roots
        g = np.asarray(g, dtype=complex)
        out = []
        for reg in (True, False):
            if _repeated(q):
                out.append(_continuation(chain, xi, g, q, tol, max_iter, reg))
            else:
                out.append(newton(chain, xi, g, tol, max_iter, q, reg))
        return out

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = [r for pair in pool.map(run, guesses) for r in pair]
    found: list[SolutionReport] = []
    for t, res, ok, it in results:
        if not ok:
            continue
        levels = canonical_order(split_levels(xi, t), chain.m)
        flat = flatten_levels(levels)[0]
        if any(np.linalg.norm(flat - s.flat) < dedup * (1 + np.linalg.norm(flat)) for s in found):
            continue
        off, notes = is_off_diagonal(levels, chain.m, poles=chain.points)
        found.append(SolutionReport(levels, res, True, it, off, notes))
    return found


# ---------------------------------------------------------------------------
# eigenvalues


def chi_functions(chain: ChainSpec, t: Levels, Q=None) -> list[RationalFunction]:
    """``𝒳^a(u)`` for ``a = 1..N`` as exact rational functions."""
    N = chain.N
    q = chain.twist if Q is None else np.asarray(Q, dtype=complex)
    kap = chain.kappa
    lam = chain.weights
    z = chain.points
    levels = [[]] + [list(level) for level in t] + [[]]  # y_0 = y_N = 1
    out = []
    for a in range(N):
        k = kap[a]
        zeros = [tv - k for tv in levels[a]] + [tv + k for tv in levels[a + 1]]
        zeros += [z[i] - k * lam[i, a] for i in range(len(z))]
        poles = list(levels[a]) + list(levels[a + 1]) + list(z)
        out.append(RationalFunction.from_factors(q[a], zeros, poles))
    return out


def wedge_tuples(m: int, n: int, k: int) -> list[tuple[int, ...]]:
    """1-based ``a_1<..<a_b <= m < a_{b+1} <= .. <= a_k``."""
    from .graded import wedge_indices

    return [tuple(a + 1 for a in idx) for idx in wedge_indices(k, m, n)]


def eigenvalue_tk(chis: Sequence[RationalFunction], m: int, n: int, k: int, u: complex) -> complex:
    """``λ_k(u) = Σ_tuples Π_r κ_{a_r} 𝒳^{a_r}(u - r + 1)``."""
    total = 0j
    for tup in wedge_tuples(m, n, k):
        term = 1.0 + 0j
        for r, a in enumerate(tup):
            term *= (1 if a <= m else -1) * complex(chis[a - 1](u - r))
        total += term
    return total


def eigen_series_sum(chis: Sequence[RationalFunction], m: int, n: int, order: int) -> list[RationalFunction]:
    """Coefficients ``(-1)^k λ_k`` of ``e^{-k∂}`` built from the tuple sums."""
    out = []
    for k in range(order + 1):
        acc = RationalFunction.constant(0.0)
        for tup in wedge_tuples(m, n, k):
            term = RationalFunction.constant(1.0)
            for r, a in enumerate(tup):
                term = term * chis[a - 1].shift(r) * (1 if a <= m else -1)
            acc = acc + term
        out.append(acc * (-1) ** k)
    return out


def eigen_series_factorized(chis: Sequence[RationalFunction], m: int, n: int, order: int) -> list[RationalFunction]:
    """Coefficients of ``Π→_a (1 - 𝒳^a e^{-∂})^{κ_a}`` up to ``e^{-order ∂}``."""
    one = RationalFunction.constant(1.0)
    total = DiffOpSeries([one], order)
    for a, chi in enumerate(chis):
        if a < m:
            factor = DiffOpSeries([one, -chi], order)
        else:
            step = DiffOpSeries([None, chi], order)
            acc = DiffOpSeries([one], order)
            power = DiffOpSeries([one], order)
            for _ in range(order):
                power = power @ step
                acc = DiffOpSeries([_add(x, y) for x, y in zip(acc.coeffs, power.coeffs)], order)
            factor = acc
        total = total @ factor
    return [c if c is not None else RationalFunction.constant(0.0) for c in total.coeffs]


def _add(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return x + y


# ---------------------------------------------------------------------------
# checks on solutions


def sample_points(chain: ChainSpec, t: Levels, count: int, rng: np.random.Generator, min_gap: float = 0.3) -> list[complex]:
    """Random spectral points kept away from every pole of the problem."""
    bad = list(chain.points) + [v for level in t for v in level]
    out = []
    while len(out) < count:
        u = complex(rng.uniform(-2, 2), rng.uniform(0.3, 1.5))
        shifts = range(-4, 5)
        if all(abs(u - s - b) > min_gap for b in bad for s in shifts):
            out.append(u)
    return out


@dataclass
class EigenReport:
    t: list[list[complex]]
    norm: float
    residuals: dict[str, float]
    eigenvalues: dict[str, complex]
    degenerate: bool


def eigencheck_xxx(
    chain: ChainSpec, t: Levels, ks: Sequence[int] = (1, 2), samples: int = 3, seed: int = 0, Q=None, with_sym: bool = False
) -> EigenReport:
    """Relative residuals of ``𝒯_k(u) B v - λ_k(u) B v`` at random points."""
    rng = np.random.default_rng(seed)
    mono = chain.monodromy()
    q = chain.twist if Q is None else np.asarray(Q, dtype=complex)
    bv = bv_supertrace(mono, t, chain.vacuum)
    nrm = float(np.linalg.norm(bv))
    res: dict[str, float] = {}
    eig: dict[str, complex] = {}
    if nrm < 1e-10 * max(1.0, float(np.linalg.norm(chain.vacuum))):
        return EigenReport(list(map(list, t)), nrm, res, eig, True)
    chis = chi_functions(chain, t, q)
    series = eigen_series_sum(chis, chain.m, chain.n, max(ks))
    for u in sample_points(chain, t, samples, rng):
        for k in ks:
            Tk = transfer_antisym(mono, k, u, q)
            w = Tk @ bv
            lam = eigenvalue_tk(chis, chain.m, chain.n, k, u)
            key = f"k={k}"
            res[key] = max(res.get(key, 0.0), float(np.linalg.norm(w - lam * bv) / (nrm * max(1.0, abs(lam)))))
            proj = complex(np.vdot(bv, w) / np.vdot(bv, bv))
            res[f"proj k={k}"] = max(res.get(f"proj k={k}", 0.0), abs(proj - lam) / max(1.0, abs(lam)))
            res[f"series k={k}"] = max(
                res.get(f"series k={k}", 0.0), abs(complex(series[k](u)) * (-1) ** k - lam) / max(1.0, abs(lam))
            )
            eig[f"{key} u={u:.3f}"] = lam
            if with_sym:
                Sk = transfer_sym(mono, k, u, q)
                ws = Sk @ bv
                mu = complex(np.vdot(bv, ws) / np.vdot(bv, bv))
                res[f"sym k={k}"] = max(res.get(f"sym k={k}", 0.0), float(np.linalg.norm(ws - mu * bv) / (nrm * max(1.0, abs(mu)))))
    return EigenReport(list(map(list, t)), nrm, res, eig, False)


def series_agreement(chain: ChainSpec, t: Levels, order: int = 3, samples: int = 4, seed: int = 0, Q=None) -> float:
    """Max relative gap between tuple-sum and factorized difference-operator coefficients."""
    chis = chi_functions(chain, t, Q)
    a = eigen_series_sum(chis, chain.m, chain.n, order)
    b = eigen_series_factorized(chis, chain.m, chain.n, order)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u in sample_points(chain, t, samples, rng):
        for x, y in zip(a, b):
            vx, vy = complex(x(u)), complex(y(u))
            worst = max(worst, abs(vx - vy) / max(1.0, abs(vx)))
    return worst


def expected_singular_weight(chain: ChainSpec, xi: Sequence[int]) -> np.ndarray:
    lam = chain.weights.sum(axis=0)
    w = lam.copy()
    for a, x in enumerate(xi):
        w[a] -= x
        w[a + 1] += x
    return w


def singular_check(chain: ChainSpec, t: Levels) -> dict[str, float]:
    """``e_ab B v = 0`` for ``a < b`` and ``e_aa B v = w_a B v`` (trivial twist)."""
    mono = chain.monodromy()
    bv = bv_supertrace(mono, t, chain.vacuum)
    nrm = float(np.linalg.norm(bv))
    if nrm < 1e-10:
        raise ArithmeticError("Bethe vector vanishes; singular check is inconclusive")
    w = expected_singular_weight(chain, excitations(t))
    raising = 0.0
    weight = 0.0
    for a in range(chain.N):
        weight = max(weight, float(np.linalg.norm(chain.gl_action(a, a) @ bv - w[a] * bv)) / nrm)
        for b in range(a + 1, chain.N):
            raising = max(raising, float(np.linalg.norm(chain.gl_action(a, b) @ bv)) / nrm)
    return {"raising": raising, "weight": weight}


# ---------------------------------------------------------------------------
# gl(m|n) <-> gl(n|m)


def mirror_index(N: int, a: int) -> int:
    """0-based ``a -> a'``."""
    return N - 1 - a


def mirror_monodromy(mono: Monodromy) -> Monodromy:
    """gl(n|m) monodromy ``T̃`` whose pull-back along the duality is ``T``.

    ``T̃_{c'd'} = T_{dc} (-1)^{|d'||c'| + |c'|}`` with tilde parities.
    """
    m, n, N = mono.m, mono.n, mono.N
    aux = mono.aux
    aux_t = GradedSpace.standard(n, m)
    H = mono.space
    pt = aux_t.parities

    def func(u: complex) -> np.ndarray:
        full = mono(u)
        blocks = np.empty((N, N, H.dim, H.dim), dtype=complex)
        for c2 in range(N):
            for d2 in range(N):
                c, d = mirror_index(N, c2), mirror_index(N, d2)
                blocks[c2, d2] = extract_block(full, aux, H, d, c) * (-1) ** ((pt[d2] * pt[c2] + pt[c2]) % 2)
        return assemble_blocks(blocks, aux_t, H)

    return Monodromy(n, m, H, func, poles=mono.poles)


def mirror_levels(t: Levels) -> list[list[complex]]:
    return [list(reversed(level)) for level in reversed(t)]


def duality_transfer_check(chain: ChainSpec, ks: Sequence[int], u: complex) -> dict[str, float]:
    mono = chain.monodromy()
    mt = mirror_monodromy(mono)
    Q = chain.twist
    Qt = Q[::-1]
    out = {}
    for k in ks:
        a = transfer_antisym(mono, k, u, Q)
        b = transfer_sym(mt, k, u, Qt)
        out[f"antisym k={k}"] = float(np.linalg.norm(a - (-1) ** k * b) / max(np.linalg.norm(a), 1e-300))
        a = transfer_sym(mono, k, u, Q)
        b = transfer_antisym(mt, k, u, Qt)
        out[f"sym k={k}"] = float(np.linalg.norm(a - (-1) ** k * b) / max(np.linalg.norm(a), 1e-300))
    return out


def bar_normalization(m: int, t: Levels) -> complex:
    """Extra factor turning ``B`` into the symmetric ``B̄`` (odd level ``m`` only)."""
    c = 1.0 + 0j
    if 1 <= m <= len(t):
        lv = t[m - 1]
        sgn = (-1) ** parity_of(m, m + 1)
        for i in range(len(lv)):
            for j in range(i + 1, len(lv)):
                c /= lv[j] - lv[i] - sgn
    return c


def duality_bv_check(chain: ChainSpec, t: Levels) -> dict[str, float]:
    """Mirror test for Bethe vectors.

    ``B̂_ξ(t) v`` and the mirrored ``B̂̃_{ξ̄}(t̄) v`` agree up to sign.  The
    ratio is also reported for the normalized ``B`` and the symmetric ``B̄``;
    ``B`` keeps a unimodular ratio only while the odd level holds at most one
    root, ``B̄`` always does.
    """
    mono = chain.monodromy()
    mt = mirror_monodromy(mono)
    tm = mirror_levels(t)
    b1 = bv_hat_vector(mono, t, chain.vacuum)
    b2 = bv_hat_vector(mt, tm, chain.vacuum)
    n2 = float(np.vdot(b2, b2).real)
    if n2 < 1e-24:
        raise ArithmeticError("mirrored Bethe vector vanishes")
    ratio = complex(np.vdot(b2, b1) / n2)
    m, n = chain.m, chain.n
    plain = ratio * bv_normalization(m, t) / bv_normalization(n, tm)
    bar = plain * bar_normalization(m, t) / bar_normalization(n, tm)
    return {
        "proportionality": float(np.linalg.norm(b1 - ratio * b2) / max(np.linalg.norm(b1), 1e-300)),
        "hat_ratio_gap": abs(abs(ratio) - 1.0),
        "bar_ratio_gap": abs(abs(bar) - 1.0),
        "normalized_ratio_gap": abs(abs(plain) - 1.0),
        "ratio_re": ratio.real,
        "ratio_im": ratio.imag,
    }
