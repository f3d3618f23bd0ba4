"""Gaudin models: current action, transfer matrices, Bethe vectors and equations.

Operator-valued coefficients of differential operators in ``u`` are carried
as :class:`~superchain.pdo.Jet` objects at the sample point; the derivatives
of ``L(u)`` are exact because every entry is a sum of simple poles.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bethe import (
    Levels,
    _check_profile,
    _creation_row,
    apply_creation,
    canonical_order,
    excitations,
    expected_singular_weight,
    flatten_levels,
    max_workers,
    mirror_index,
    offshell_factor,
    split_levels,
)
from .graded import GradedSpace, embed, partial_supertrace, permute_vector, projectors, tensor_spaces
from .modules import ChainSpec, assemble_blocks, extract_block
from .pdo import Jet, PseudoDiffSeries, pdo_mul, power_first_order
from .rational import RationalFunction, simple_poles
from .rmatrix import flip_matrix
from .transfer import factorial_ratio

DEFAULT_ORDER = 4


@dataclass
class Current:
    """``L(u) = Σ_i C_i / (u - x_i)`` on ``V ⊗ H`` for gl(m|n)."""

    m: int
    n: int
    space: GradedSpace
    residues: list[np.ndarray]
    points: list[complex]

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def aux(self) -> GradedSpace:
        return GradedSpace.standard(self.m, self.n)

    def __call__(self, u: complex) -> np.ndarray:
        return self.jet(u, 1).value

    def jet(self, u: complex, length: int) -> Jet:
        D = self.residues[0].shape[0] if self.residues else self.N * self.space.dim
        d = np.zeros((length, D, D), dtype=complex)
        for C, x in zip(self.residues, self.points):
            w = complex(u) - x
            if w == 0:
                raise ZeroDivisionError(f"u coincides with the pole {x}")
            for s in range(length):
                d[s] += C * ((-1) ** s * math.factorial(s) / w ** (s + 1))
        return Jet(d)

    def entry(self, a: int, b: int, u: complex) -> np.ndarray:
        return extract_block(self(u), self.aux, self.space, a, b)


@dataclass
class GaudinSystem:
    """Evaluation modules ``M_1⟦z_1⟧ ⊗ .. ⊗ M_ℓ⟦z_ℓ⟧`` with a diagonal ``K``."""

    chain: ChainSpec
    K: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.K is None:
            self.K = np.zeros(self.chain.N, dtype=complex)
        self.K = np.asarray(self.K, dtype=complex).reshape(-1)
        if self.K.shape != (self.chain.N,):
            raise ValueError("K must list N diagonal entries")
        z = self.chain.points
        for i in range(z.size):
            for j in range(i):
                if abs(z[i] - z[j]) < 1e-12:
                    raise ValueError(f"evaluation points must be pairwise distinct (sites {j} and {i})")

    @classmethod
    def vector_system(cls, m: int, n: int, z: Sequence[complex], K=None) -> "GaudinSystem":
        return cls(ChainSpec.vector_chain(m, n, z), K)

    @property
    def m(self) -> int:
        return self.chain.m

    @property
    def n(self) -> int:
        return self.chain.n

    @property
    def N(self) -> int:
        return self.chain.N

    @property
    def current(self) -> Current:
        return Current(self.m, self.n, self.chain.space, list(self.chain.residues), list(self.chain.points))


def current_L(system: GaudinSystem, u0: complex) -> np.ndarray:
    """``L(u0) = Σ_ab E_ab ⊗ L_ab(u0)`` on ``V ⊗ H`` with ``L_ab = κ_b Σ_i e_ba^{(i)}/(u - z_i)``."""
    if any(abs(u0 - z) < 1e-14 for z in system.chain.points):
        raise ZeroDivisionError("u0 coincides with an evaluation point")
    return system.current(u0)


# ---------------------------------------------------------------------------
# Gaudin transfer matrices


def _ordered_product(cur: Current, K: np.ndarray, l: int, u0: complex, length: int) -> PseudoDiffSeries:
    """``Π→_{i=1..l} (∂ - K^{(i)} - L^{(i,l+1)}(u))`` with jet coefficients on ``V^{⊗l} ⊗ H``."""
    V, H = cur.aux, cur.space
    factors = [V] * l + [H]
    D = V.dim**l * H.dim
    eye = Jet.constant(np.eye(D), length)
    Ljet = cur.jet(u0, length)
    out = PseudoDiffSeries(0, [eye], l)
    for i in range(l):
        Ki = embed(np.diag(K), factors[:l], [i]) if l else None
        Kfull = np.kron(Ki, np.eye(H.dim))
        M = Ljet.map(lambda X: embed(X, factors, [i, l])) + Jet.constant(Kfull, length)
        out = pdo_mul(out, PseudoDiffSeries(1, [eye, -M], l))
    return out


def _traced(cur: Current, K: np.ndarray, l: int, u0: complex, length: int, which: str) -> list[Jet]:
    """Jets of the ``∂^{l-k}`` coefficients of ``str(Π(∂-K-L) X_l)``, ``X = A`` or ``H``."""
    V, H = cur.aux, cur.space
    if l == 0:
        return [Jet.constant(np.eye(H.dim), length)]
    Pl = projectors(l, V)
    X = np.kron(Pl.antisym if which == "antisym" else Pl.sym, np.eye(H.dim))
    prod = _ordered_product(cur, K, l, u0, length)
    tensor = Pl.tensor_space
    return [c.map(lambda Y: partial_supertrace(Y @ X, tensor, H)) for c in prod.coeffs]


@dataclass
class DiffOps:
    """``𝔇_{l,K}`` (or ``𝔻_{l,K}``) at a point: ``coeffs[k]`` multiplies ``∂^{l-k}``."""

    l: int
    coeffs: list[Jet]

    @property
    def values(self) -> list[np.ndarray]:
        return [c.value for c in self.coeffs]

    def G(self, k: int) -> np.ndarray:
        """``𝔊_{lk}`` with ``𝔇_l = Σ_k (-1)^k 𝔊_{lk} ∂^{l-k}``."""
        return (-1) ** k * self.coeffs[k].value

    def series(self) -> PseudoDiffSeries:
        return PseudoDiffSeries(self.l, list(self.coeffs), self.l)


def gaudin_diff_ops(system: GaudinSystem | Current, l: int, u0: complex, K=None, length: int | None = None, which: str = "antisym") -> DiffOps:
    """Coefficients of ``𝔇_{l,K}(u0, ∂)`` (``which="sym"`` gives ``𝔻_{l,K}``)."""
    if l < 0 or l > 3:
        raise ValueError("l must be in 0..3")
    cur = system.current if isinstance(system, GaudinSystem) else system
    if K is None:
        K = system.K if isinstance(system, GaudinSystem) else np.zeros(cur.N)
    if any(abs(u0 - x) < 1e-14 for x in cur.points):
        raise ZeroDivisionError("u0 coincides with a pole of L(u)")
    length = length if length is not None else l + 1
    return DiffOps(l, _traced(cur, np.asarray(K, dtype=complex), l, u0, length, which))


@dataclass
class Extraction:
    G: list[np.ndarray]  # 𝒢_r(u0), r = 0..R
    consistency: dict[str, float]

    @property
    def worst(self) -> float:
        return max(self.consistency.values(), default=0.0)


def berezinian_extract(system: GaudinSystem, R: int, u0: complex) -> Extraction:
    """``𝒢_r(u0) = (-1)^r 𝔊_{rr,K}(u0)`` for ``r <= R``.

    The lower coefficients of every ``𝔇_{k,K}`` must equal
    ``C(𝒩-r, k-r) 𝔊_{rr,K}``; their relative gaps are returned as a self-test.
    """
    if R > 3:
        raise ValueError("R must be at most 3")
    Nsup = system.m - system.n
    ops = [gaudin_diff_ops(system, k, u0) for k in range(R + 1)]
    diag = [ops[r].G(r) for r in range(R + 1)]
    cons: dict[str, float] = {}
    for k in range(1, R + 1):
        for r in range(k):
            want = factorial_ratio(Nsup, r, k) * diag[r]
            got = ops[k].G(r)
            scale = max(1.0, float(np.linalg.norm(diag[r])))
            cons[f"G[{k},{r}]"] = float(np.linalg.norm(got - want)) / scale
    return Extraction([(-1) ** r * diag[r] for r in range(R + 1)], cons)


def gaudin_transfer(system: GaudinSystem, r: int, u0: complex) -> np.ndarray:
    return (-1) ** r * gaudin_diff_ops(system, r, u0).G(r)


def compose(A: PseudoDiffSeries, B: PseudoDiffSeries) -> PseudoDiffSeries:
    return pdo_mul(A, B)


def sym_diff_check(system: GaudinSystem, L: int, u0: complex) -> list[float]:
    """Per-order residuals of ``(Σ_k w^k 𝔇_k)(Σ_k (-1)^k w^k 𝔻_k) = 1``, orders ``0..L``."""
    if L > 3:
        raise ValueError("L must be at most 3")
    length = 2 * L + 2
    cur = system.current
    Dk = [gaudin_diff_ops(cur, k, u0, system.K, length).series() for k in range(L + 1)]
    Hk = [gaudin_diff_ops(cur, k, u0, system.K, length, which="sym").series() for k in range(L + 1)]
    d = system.chain.dim
    out = []
    for order in range(L + 1):
        acc = None
        scale = 1.0
        for k in range(order + 1):
            term = compose(Dk[k], Hk[order - k]).scaled((-1) ** (order - k))
            scale = max(scale, max(float(np.linalg.norm(c.value)) for c in term.coeffs if c is not None))
            acc = term if acc is None else acc + term
        target = np.eye(d) if order == 0 else np.zeros((d, d))
        worst = 0.0
        for r, c in enumerate(acc.coeffs):
            val = c.value if c is not None else 0
            want = target if r == 0 else 0
            worst = max(worst, float(np.linalg.norm(val - want)))
        out.append(worst / scale)
    return out


def gaudin_commutators(system: GaudinSystem, rs: Sequence[int], u0: complex, v0: complex) -> float:
    """Largest relative ``[𝒢_r(u0), 𝒢_s(v0)]``."""
    A = {r: gaudin_transfer(system, r, u0) for r in rs}
    B = {r: gaudin_transfer(system, r, v0) for r in rs}
    worst = 0.0
    for r in rs:
        for s in rs:
            X, Y = A[r], B[s]
            den = max(float(np.linalg.norm(X) * np.linalg.norm(Y)), 1e-300)
            worst = max(worst, float(np.linalg.norm(X @ Y - Y @ X)) / den)
    return worst


def gl_invariance_gaudin(system: GaudinSystem, r: int, u0: complex) -> float:
    """``[𝒢_{r,0}(u0), e_ab] = 0`` at ``K = 0``."""
    G = gaudin_transfer(GaudinSystem(system.chain), r, u0)
    worst = 0.0
    for a in range(system.N):
        for b in range(system.N):
            E = system.chain.gl_action(a, b)
            worst = max(worst, float(np.linalg.norm(G @ E - E @ G)) / max(float(np.linalg.norm(G) * np.linalg.norm(E)), 1e-300))
    return worst


# ---------------------------------------------------------------------------
# gl(m|n) <-> gl(n|m)


def mirror_matrix(X: np.ndarray, m: int, n: int, H: GradedSpace) -> np.ndarray:
    """Matrix of ``ϑ``: ``X̃_{b'a'} = X_ab (-1)^{|a'||b'| + |b'|}`` (tilde parities)."""
    N = m + n
    aux, aux_t = GradedSpace.standard(m, n), GradedSpace.standard(n, m)
    pt = aux_t.parities
    blocks = np.empty((N, N, H.dim, H.dim), dtype=complex)
    for c2 in range(N):
        for d2 in range(N):
            c, d = mirror_index(N, c2), mirror_index(N, d2)
            blocks[c2, d2] = extract_block(X, aux, H, d, c) * (-1) ** ((pt[d2] * pt[c2] + pt[c2]) % 2)
    return assemble_blocks(blocks, aux_t, H)


def mirror_current(cur: Current) -> Current:
    return Current(cur.n, cur.m, cur.space, [mirror_matrix(C, cur.m, cur.n, cur.space) for C in cur.residues], list(cur.points))


def gaudin_duality_check(system: GaudinSystem, ls: Sequence[int], u0: complex) -> dict[str, float]:
    """``ϑ(𝔇_{l,K}) = (-1)^l 𝔻̃_{l,𝖪}`` and ``ϑ(𝔻_{l,K}) = (-1)^l 𝔇̃_{l,𝖪}`` coefficientwise."""
    cur = system.current
    mc = mirror_current(cur)
    Kt = system.K[::-1]
    out = {}
    for l in ls:
        for which, other in (("antisym", "sym"), ("sym", "antisym")):
            a = gaudin_diff_ops(cur, l, u0, system.K, which=which).values
            b = gaudin_diff_ops(mc, l, u0, Kt, which=other).values
            scale = max(1.0, max(float(np.linalg.norm(x)) for x in a))
            gap = max(float(np.linalg.norm(x - (-1) ** l * y)) for x, y in zip(a, b)) / scale
            out[f"{which} l={l}"] = gap
    return out


# ---------------------------------------------------------------------------
# Bethe ansatz equations


def _bae_terms(t: np.ndarray, lev: np.ndarray, system: GaudinSystem):
    """Constant, pole coefficients and pairwise weights of ``𝔎``."""
    kap = system.chain.kappa
    lam = system.chain.weights
    K = system.K
    n_eq = t.size
    const = np.array([K[a] - K[a + 1] for a in lev], dtype=complex)
    site_c = np.array([[kap[a] * lam[j, a] - kap[a + 1] * lam[j, a + 1] for j in range(lam.shape[0])] for a in lev], dtype=complex).reshape(n_eq, -1)
    W = np.zeros((n_eq, n_eq))
    for i in range(n_eq):
        a = lev[i]
        for k in range(n_eq):
            if k == i:
                continue
            b = lev[k]
            if b == a - 1:
                W[i, k] = kap[a]
            elif b == a:
                W[i, k] = -(kap[a] + kap[a + 1])
            elif b == a + 1:
                W[i, k] = kap[a + 1]
    return const, site_c, W


def gaudin_bae_system(system: GaudinSystem, xi: Sequence[int], t: np.ndarray):
    """``𝔎`` values, Jacobian and per-equation scale ``Σ |terms|``."""
    lev = np.array([a for a, x in enumerate(xi) for _ in range(x)], dtype=np.int64)
    t = np.asarray(t, dtype=complex)
    z = system.chain.points
    const, site_c, W = _bae_terms(t, lev, system)
    dz = t[:, None] - z[None, :]
    dt = t[:, None] - t[None, :]
    np.fill_diagonal(dt, 1.0)
    pair = W / dt
    F = const + (site_c / dz).sum(axis=1) + pair.sum(axis=1)
    scale = np.abs(const) + np.abs(site_c / dz).sum(axis=1) + np.abs(pair).sum(axis=1)
    J = W / dt**2
    np.fill_diagonal(J, 0.0)
    J[np.diag_indices_from(J)] = -(site_c / dz**2).sum(axis=1) - (W / dt**2).sum(axis=1)
    return F, J, scale


def gaudin_bae_residual(system: GaudinSystem, t: Levels) -> np.ndarray:
    """``𝔎^{a,i}(t; z; Λ)`` in lexicographic order."""
    flat, _ = flatten_levels(t)
    if flat.size == 0:
        return np.zeros(0, dtype=complex)
    xi = excitations(t)
    lev = np.repeat(np.arange(len(xi)), xi)
    z = system.chain.points
    if np.any(np.abs(flat[:, None] - z[None, :]) < 1e-14):
        raise ZeroDivisionError("a Bethe root coincides with an evaluation point")
    for i in range(flat.size):
        for k in range(i):
            if abs(lev[i] - lev[k]) <= 1 and abs(flat[i] - flat[k]) < 1e-14:
                raise ZeroDivisionError("coinciding Bethe roots on the same or adjacent levels")
    return gaudin_bae_system(system, xi, flat)[0]


@dataclass
class GaudinSolution:
    t: list[list[complex]]
    residual_norm: float
    converged: bool
    iterations: int
    isolated: bool
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
            "isolated": self.isolated,
            "off_diagonal": self.off_diagonal,
            "warnings": list(self.warnings),
        }


def _relative(system, xi, t):
    with np.errstate(all="ignore"):
        F, J, scale = gaudin_bae_system(system, xi, t)
        rel = float(np.linalg.norm(F / np.maximum(scale, 1e-300)))
    return F, J, rel


def gaudin_newton(system: GaudinSystem, xi: Sequence[int], t0: np.ndarray, tol: float = 1e-12, max_iter: int = 60):
    """Damped Newton with backtracking on the relative residual.

    At ``K = 0`` the equations decay like ``1/t``, so undamped steps from
    far starts drift to infinity.
    """
    t = np.array(t0, dtype=complex)
    F, J, res = _relative(system, xi, t)
    for it in range(1, max_iter + 1):
        if not np.isfinite(res):
            return t, res, False, it
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            return t, res, False, it
        if not np.all(np.isfinite(step)):
            return t, res, False, it
        if res < tol:
            F2, J2, r2 = _relative(system, xi, t - step)
            if r2 < res:
                t, res = t - step, r2
            return t, res, True, it
        nrm = np.linalg.norm(step)
        if nrm > 2.0:
            step *= 2.0 / nrm
        lam = 1.0
        for _ in range(12):
            F2, J2, r2 = _relative(system, xi, t - lam * step)
            if np.isfinite(r2) and r2 < res:
                break
            lam *= 0.5
        else:
            # no decrease along the direction; take the full step and hope
            lam = 1.0
            F2, J2, r2 = _relative(system, xi, t - step)
        t = t - lam * step
        F, J, res = F2, J2, r2
    return t, res, res < tol, max_iter


def _gaudin_guesses(system: GaudinSystem, xi: Sequence[int], grid: int = 5, seed: int = 0, near: int = 25, spread: int = 50) -> list[np.ndarray]:
    K = sum(xi)
    z = system.chain.points
    lo, hi = z.real.min() - 1.5, z.real.max() + 1.5
    rng = np.random.default_rng(seed)
    out = []
    xs = np.linspace(lo, hi, grid)
    ys = np.linspace(-1.0, 1.0, grid)
    for x in xs:
        for y in ys:
            base = complex(x, y)
            out.append(base + 0.37 * np.arange(K) * (1 + 0.5j))
    for _ in range(near):
        pick = z[rng.integers(0, z.size, K)]
        out.append(pick + 0.5 * (rng.normal(size=K) + 1j * rng.normal(size=K)))
    for _ in range(spread):
        out.append(rng.uniform(lo, hi, K) + 1j * rng.uniform(-1.0, 1.0, K))
    return out


def _cleared(system: GaudinSystem, xi, t: np.ndarray):
    """``P_i = 𝔎_i D_i`` with ``D_i = Π_j (t_i - z_j) Π_k (t_i - t_k)`` over interacting ``k``.

    Polynomial, so Newton is not repelled by the poles; its extra roots sit
    on the poles and are removed by polishing on the rational form.
    """
    F, J, _ = gaudin_bae_system(system, xi, t)
    lev = np.repeat(np.arange(len(xi)), xi)
    _, _, W = _bae_terms(t, lev, system)
    mask = W != 0
    dz = t[:, None] - system.chain.points[None, :]
    dt = t[:, None] - t[None, :]
    np.fill_diagonal(dt, 1.0)
    D = np.prod(dz, axis=1) * np.prod(np.where(mask, dt, 1.0), axis=1)
    g = np.where(mask, 1.0 / dt, 0.0)
    dD = -(D[:, None] * g)
    dD[np.diag_indices_from(dD)] = D * ((1.0 / dz).sum(axis=1) + g.sum(axis=1))
    return F * D, J * D[:, None] + F[:, None] * dD


def cleared_newton(system: GaudinSystem, xi, t0: np.ndarray, tol: float = 1e-12, max_iter: int = 60):
    """Newton on the cleared equations, then polishing on ``𝔎`` itself."""
    t = np.array(t0, dtype=complex)
    for _ in range(max_iter):
        with np.errstate(all="ignore"):
            P, JP = _cleared(system, xi, t)
            try:
                step = np.linalg.solve(JP, P)
            except np.linalg.LinAlgError:
                return t, np.inf, False, 0
        if not np.all(np.isfinite(step)):
            return t, np.inf, False, 0
        nrm = np.linalg.norm(step)
        if nrm > 2.0:
            step *= 2.0 / nrm
        t = t - step
        if nrm < 1e-13 * (1 + np.linalg.norm(t)):
            break
    return gaudin_newton(system, xi, t, tol, max_iter)


def _both(system: GaudinSystem, xi, g, tol: float, max_iter: int):
    return [gaudin_newton(system, xi, g, tol, max_iter), cleared_newton(system, xi, g, tol, max_iter)]


GAUDIN_CONTINUATION_STEPS = 20


def _track(system: GaudinSystem, xi, t: np.ndarray, shift: np.ndarray, tol: float, max_iter: int):
    """Follow a root from ``K + shift`` back to ``K``."""
    total = 0
    res = 0.0
    for s in np.linspace(0.0, 1.0, GAUDIN_CONTINUATION_STEPS + 1)[1:]:
        t, res, ok, it = gaudin_newton(GaudinSystem(system.chain, system.K + (1 - s) * shift), xi, t, tol, max_iter)
        total += it
        if not ok:
            return t, res, False, total
    return t, res, True, total


def _classify(system: GaudinSystem, xi, results, dedup: float) -> list[GaudinSolution]:
    found: list[GaudinSolution] = []
    z = system.chain.points
    lev = np.repeat(np.arange(len(xi)), xi)
    for t, res, ok, it in results:
        if not ok:
            continue
        levels = canonical_order(split_levels(xi, t), system.m)
        flat = flatten_levels(levels)[0]
        if any(np.linalg.norm(flat - s.flat) < dedup * (1 + np.linalg.norm(flat)) for s in found):
            continue
        notes = []
        if np.any(np.abs(flat[:, None] - z[None, :]) < 1e-8):
            notes.append("root at an evaluation point")
        for i in range(flat.size):
            for k in range(i):
                if lev[i] == lev[k] and abs(flat[i] - flat[k]) < 1e-8:
                    notes.append("coinciding roots on one level")
        _, J, scale = gaudin_bae_system(system, xi, flat)
        sv = np.linalg.svd(J / np.maximum(scale, 1e-300)[:, None], compute_uv=False)
        isolated = bool(sv[-1] > 1e-8 * max(1.0, sv[0]))
        if not isolated:
            notes.append("singular Jacobian (not isolated)")
        found.append(GaudinSolution(levels, res, True, it, isolated, not notes, notes))
    return found


def solve_gaudin_bae(
    system: GaudinSystem, xi: Sequence[int], guesses=None, tol: float = 1e-12, max_iter: int = 60, dedup: float = 1e-8, seed: int = 0
) -> list[GaudinSolution]:
    """Multi-start Newton on ``𝔎 = 0``.

    Every start runs Newton on the rational form and on the cleared
    polynomial form; the two reach different roots.

    If ``K_a = K_{a+1}`` on an excited level the equations lose their
    constant term and Newton drifts to infinity.  The roots are then found
    at a generic shift of ``K`` and tracked back; tracks that escape belong
    to descendants and are dropped.
    """
    xi = tuple(int(x) for x in xi)
    if len(xi) != system.N - 1 or any(x < 0 for x in xi):
        raise ValueError("excitation profile must have N-1 non-negative entries")
    if sum(xi) == 0:
        return [GaudinSolution([[] for _ in xi], 0.0, True, 0, True, True)]
    if guesses is None:
        guesses = _gaudin_guesses(system, xi, seed=seed)
    degenerate = any(x and abs(system.K[a] - system.K[a + 1]) < 1e-12 for a, x in enumerate(xi))
    if degenerate:
        shift = (0.7 + 0.4j) * np.arange(system.N)
        generic = GaudinSystem(system.chain, system.K + shift)
        starts = solve_gaudin_bae(generic, xi, guesses, tol, max_iter, dedup, seed)
        with ThreadPoolExecutor(max_workers=max_workers()) as pool:
            results = list(pool.map(lambda s: _track(system, xi, s.flat, shift, tol, max_iter), starts))
        return _classify(system, xi, results, dedup)
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = [r for pair in pool.map(lambda g: _both(system, xi, g, tol, max_iter), guesses) for r in pair]
    return _classify(system, xi, results, dedup)


# ---------------------------------------------------------------------------
# Bethe vectors


def lower_current(cur: Current, x: Sequence[complex]) -> Current:
    """gl(m-1|n) current on ``H ⊗ W^{⊗r}``: ``ψ(L)^{(0,H)} + Σ_i P^{(0,W_i)} / (u - x_{r+1-i})``."""
    if cur.m == 0:
        raise ValueError("the recursion removes an even index; needs m >= 1")
    if cur.N < 2:
        raise ValueError("no lower rank left")
    W = GradedSpace.standard(cur.m - 1, cur.n)
    H = cur.space
    r = len(x)
    factors = [W, H] + [W] * r
    sel = np.concatenate([np.arange(a * H.dim, (a + 1) * H.dim) for a in range(1, cur.N)])
    residues = [embed(C[np.ix_(sel, sel)], factors, [0, 1]) for C in cur.residues]
    points = list(cur.points)
    P = flip_matrix(W)
    for i in range(r):
        residues.append(embed(P, factors, [0, i + 2]))
        points.append(complex(x[r - 1 - i]))
    return Current(cur.m - 1, cur.n, tensor_spaces(H, *([W] * r)), residues, points)


def gaudin_bv_current(cur: Current, t: Levels, vacuum: np.ndarray) -> np.ndarray:
    """``𝔽_ξ(t) v`` by the nested recursion with ``F(u) = Σ_a E_{1,a+1} ⊗ L_{1,a+1}(u)``."""
    _check_profile(cur.N, t)
    vac = np.asarray(vacuum, dtype=complex)
    if all(len(level) == 0 for level in t):
        return vac
    if cur.m == 0:
        raise ValueError("the nested recursion needs an even first index")
    u = [complex(v) for v in t[0]]
    r = len(u)
    W = GradedSpace.standard(cur.m - 1, cur.n)
    H = cur.space
    w1 = np.zeros(W.dim, dtype=complex)
    w1[0] = 1.0
    low = vac
    for _ in range(r):
        low = np.kron(low, w1)
    X = gaudin_bv_current(lower_current(cur, u), list(t[1:]), low) if cur.N > 2 else low
    X = permute_vector(X, [H] + [W] * r, list(range(r, 0, -1)) + [0])
    blocks = [_creation_row(cur(x), cur.N, H.dim) for x in u]
    return apply_creation(blocks, W, H, X, r)


def gaudin_bv(system: GaudinSystem, t: Levels, offshell: bool = False) -> np.ndarray:
    """``𝔽_ξ(t) v^+``; with ``offshell`` the polynomial prefactor is included."""
    vec = gaudin_bv_current(system.current, t, system.chain.vacuum)
    return offshell_factor(system.chain, t) * vec if offshell else vec


# ---------------------------------------------------------------------------
# eigenvalues


def chi_gaudin(system: GaudinSystem, t: Levels) -> list[RationalFunction]:
    """``𝔛^a(u) = K_a + κ_a (Σ_j Λ_j^a/(u - z_j) + y'_{a-1}/y_{a-1} - y'_a/y_a)``."""
    kap = system.chain.kappa
    lam = system.chain.weights
    z = system.chain.points
    levels = [[]] + [list(level) for level in t] + [[]]
    out = []
    for a in range(system.N):
        f = RationalFunction.constant(system.K[a])
        for j, zj in enumerate(z):
            if lam[j, a] != 0:
                f = f + RationalFunction.from_factors(kap[a] * lam[j, a], poles=[zj])
        if levels[a]:
            f = f + simple_poles(levels[a], kap[a])
        if levels[a + 1]:
            f = f + simple_poles(levels[a + 1], -kap[a])
        out.append(f)
    return out


def eigen_pdo(system: GaudinSystem, t: Levels, order: int = DEFAULT_ORDER) -> PseudoDiffSeries:
    """``Π→_a (∂ - 𝔛^a)^{κ_a}`` to ``order`` terms below the leading power ``∂^𝒩``."""
    total = None
    for a, chi in enumerate(chi_gaudin(system, t)):
        factor = power_first_order(chi, int(system.chain.kappa[a]), order)
        total = factor if total is None else pdo_mul(total, factor)
    return total


def gaudin_eigenvalues(system: GaudinSystem, t: Levels, R: int, u0: complex) -> list[complex]:
    """``μ_r(u0)``, the ``∂^{𝒩-r}`` coefficients, ``r = 0..R``."""
    series = eigen_pdo(system, t, max(R, 1))
    return [0j if series.coeffs[r] is None else complex(series.coeffs[r](u0)) for r in range(R + 1)]


def _sample_points(system: GaudinSystem, t: Levels, count: int, rng: np.random.Generator, min_gap: float = 0.3) -> list[complex]:
    bad = list(system.chain.points) + [v for level in t for v in level]
    out: list[complex] = []
    while len(out) < count:
        u = complex(rng.uniform(-2, 2), rng.uniform(0.3, 1.5))
        if all(abs(u - b) > min_gap for b in bad):
            out.append(u)
    return out


@dataclass
class GaudinEigenReport:
    t: list[list[complex]]
    norm: float
    residuals: dict[str, float]
    eigenvalues: dict[str, complex]
    degenerate: bool


def gaudin_eigencheck(system: GaudinSystem, t: Levels, R: int = 2, samples: int = 3, seed: int = 0) -> GaudinEigenReport:
    """Relative residuals of ``𝒢_r(u0) 𝔽v - μ_r(u0) 𝔽v`` for ``1 <= r <= R``."""
    rng = np.random.default_rng(seed)
    bv = gaudin_bv(system, t)
    nrm = float(np.linalg.norm(bv))
    res: dict[str, float] = {}
    eig: dict[str, complex] = {}
    if nrm < 1e-10 * max(1.0, float(np.linalg.norm(system.chain.vacuum))):
        return GaudinEigenReport(list(map(list, t)), nrm, res, eig, True)
    series = eigen_pdo(system, t, max(R, 1))
    for u in _sample_points(system, t, samples, rng):
        ext = berezinian_extract(system, R, u)
        for r in range(1, R + 1):
            mu = complex(series.coeffs[r](u)) if series.coeffs[r] is not None else 0j
            w = ext.G[r] @ bv
            key = f"r={r}"
            res[key] = max(res.get(key, 0.0), float(np.linalg.norm(w - mu * bv)) / (nrm * max(1.0, abs(mu))))
            eig[f"{key} u={u:.3f}"] = mu
        res["extraction"] = max(res.get("extraction", 0.0), ext.worst)
    return GaudinEigenReport(list(map(list, t)), nrm, res, eig, False)


def gaudin_singular_check(system: GaudinSystem, t: Levels) -> dict[str, float]:
    """At ``K = 0``: ``e_ab 𝔽v = 0`` for ``a < b`` and the weight of the singular vector."""
    chain = system.chain
    bv = gaudin_bv(system, t)
    nrm = float(np.linalg.norm(bv))
    if nrm < 1e-10:
        raise ArithmeticError("Bethe vector vanishes; singular check is inconclusive")
    w = expected_singular_weight(chain, excitations(t))
    raising = weight = 0.0
    for a in range(chain.N):
        weight = max(weight, float(np.linalg.norm(chain.gl_action(a, a) @ bv - w[a] * bv)) / nrm)
        for b in range(a + 1, chain.N):
            raising = max(raising, float(np.linalg.norm(chain.gl_action(a, b) @ bv)) / nrm)
    return {"raising": raising, "weight": weight}


# ---------------------------------------------------------------------------
# classical limit of the XXX chain


def xxx_bae_ratio(chain: ChainSpec, t: Levels, Q) -> np.ndarray:
    """``𝒬^{a,i}(t; z; Λ)``; the XXX Bethe equations read ``𝒬 = 1``."""
    q = np.asarray(Q, dtype=complex)
    kap = chain.kappa
    lam = chain.weights
    z = chain.points
    out = []
    for a, level in enumerate(t):
        below = t[a - 1] if a > 0 else []
        above = t[a + 1] if a + 1 < len(t) else []
        for i, ti in enumerate(level):
            r = q[a] / q[a + 1]
            for j, zj in enumerate(z):
                r *= (ti - zj + kap[a] * lam[j, a]) / (ti - zj + kap[a + 1] * lam[j, a + 1])
            for tj in below:
                r *= (ti - tj + kap[a]) / (ti - tj)
            for j, tj in enumerate(level):
                if j != i:
                    r *= (ti - tj - kap[a]) / (ti - tj + kap[a + 1])
            for tj in above:
                r *= (ti - tj) / (ti - tj - kap[a + 1])
            out.append(r)
    return np.array(out, dtype=complex)


def fit_slope(eps: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log value`` against ``log ε``."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.maximum(np.asarray(values, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def _scaled(system: GaudinSystem, eps: float) -> ChainSpec:
    return system.chain.with_points(system.chain.points / eps, twist=1.0 + eps * system.K)


def asym1_remainders(system: GaudinSystem, u: complex, eps_list: Sequence[float]) -> list[float]:
    """``‖T(u/ε; z/ε) - 1 - ε L(u; z)‖`` for each ``ε``."""
    L = system.current(u)
    out = []
    for eps in eps_list:
        T = _scaled(system, eps).monodromy()(u / eps)
        out.append(float(np.linalg.norm(T - np.eye(T.shape[0]) - eps * L)))
    return out


def asym3_remainders(system: GaudinSystem, t: Levels, eps_list: Sequence[float]) -> list[float]:
    """``‖B(t/ε) v |_{z/ε} - ε^{|ξ|} 𝔽(t) v‖`` with both vectors from the nested recursion."""
    from .bethe import bv_recursive

    F = gaudin_bv(system, t)
    k = sum(len(level) for level in t)
    out = []
    for eps in eps_list:
        chain = _scaled(system, eps)
        ts = [[v / eps for v in level] for level in t]
        B = bv_recursive(chain.monodromy(), ts, chain.vacuum)
        out.append(float(np.linalg.norm(B - eps**k * F)))
    return out


def asym4_remainders(system: GaudinSystem, t: Levels, eps_list: Sequence[float]) -> list[float]:
    """``max_i |𝒬^{a,i}(t/ε; z/ε) - 1 - ε 𝔎^{a,i}(t; z)|`` with ``Q = 1 + εK``."""
    Kf = gaudin_bae_residual(system, t)
    out = []
    for eps in eps_list:
        chain = _scaled(system, eps)
        ts = [[v / eps for v in level] for level in t]
        Qr = xxx_bae_ratio(chain, ts, chain.twist)
        out.append(float(np.max(np.abs(Qr - 1.0 - eps * Kf))) if Kf.size else 0.0)
    return out


@dataclass
class LimitReport:
    eps: list[float]
    remainders: dict[str, list[float]]
    slopes: dict[str, float]
    expected: dict[str, int]

    def passed(self, band: float = 0.1) -> bool:
        """Every fitted slope within ``band`` of its expected order."""
        return all(abs(s - self.expected[k]) <= band for k, s in self.slopes.items())


def classical_limit_check(
    system: GaudinSystem, t: Levels, u: complex, eps_list: Sequence[float] = (1e-1, 1e-2, 1e-3)
) -> LimitReport:
    """Remainder slopes for the monodromy, the Bethe vector and the Bethe equations."""
    eps = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be decreasing")
    rem = {
        "asym1": asym1_remainders(system, u, eps),
        "asym3": asym3_remainders(system, t, eps),
        "asym4": asym4_remainders(system, t, eps),
    }
    slopes = {k: fit_slope(eps, v) for k, v in rem.items() if any(x > 0 for x in v)}
    # the Bethe-vector remainder is O(ε^{|ξ|+1}); the others are O(ε²)
    k = sum(len(level) for level in t)
    return LimitReport(eps, rem, slopes, {"asym1": 2, "asym3": k + 1, "asym4": 2})
