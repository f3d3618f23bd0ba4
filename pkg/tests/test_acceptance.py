"""Acceptance criteria 1-10.

Each test prints one line ``CRITERION <k> PASS|FAIL ...`` with the worst
residual, the tolerance, and the runtime against its budget.  The file also
runs standalone: ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, make_chain, random_levels  # noqa: E402
from superchain import bethe, gaudin, rmatrix, transfer  # noqa: E402
from superchain.graded import GradedSpace, projectors  # noqa: E402


class Tally:
    """Worst value per criterion plus the failing items."""

    def __init__(self, tol: float, mode: str = "below"):
        self.tol = tol
        self.mode = mode
        self.worst = 0.0 if mode == "below" else None
        self.failures: list[str] = []
        self.count = 0

    def add(self, name: str, value: float):
        self.count += 1
        value = float(value)
        if self.mode == "below":
            ok = np.isfinite(value) and value < self.tol
            self.worst = max(self.worst, value) if np.isfinite(value) else float("inf")
        else:
            lo, hi = self.tol
            ok = lo <= value <= hi
            self.worst = value if self.worst is None or abs(value - (lo + hi) / 2) > abs(self.worst - (lo + hi) / 2) else self.worst
        if not ok:
            self.failures.append(f"{name}={value:.3e}")

    def require(self, name: str, condition: bool):
        self.count += 1
        if not condition:
            self.failures.append(name)


def announce(num: int, title: str, tally: Tally, seconds: float, budget: float):
    ok = not tally.failures and seconds < budget
    if tally.mode == "below":
        val = f"worst={tally.worst:.2e} tol={tally.tol:.0e}"
    else:
        val = f"extreme slope={tally.worst:.4f} band=[{tally.tol[0]}, {tally.tol[1]}]"
    line = f"CRITERION {num:>2} {'PASS' if ok else 'FAIL'}  {title}: {val} checks={tally.count} time={seconds:.1f}s/{budget:.0f}s"
    if tally.failures:
        line += "  failing: " + ", ".join(tally.failures[:5])
    if seconds >= budget:
        line += "  (over time budget)"
    ACCEPTANCE_LINES[num] = line
    print(line)
    assert not tally.failures, line
    assert seconds < budget, line


def shapes(max_N: int):
    return [(m, N - m) for N in range(1, max_N + 1) for m in range(N + 1)]


def wedge_nonzero(k: int, V: GradedSpace) -> bool:
    return bool(projectors(k, V).wedge_basis)


# --------------------------------------------------------------------------- 1


def test_criterion_01_rmatrix_and_fusion():
    t0 = time.perf_counter()
    tally = Tally(1e-9)
    u, v = 0.37 + 0.21j, -0.81 + 0.52j
    for m, n in shapes(4):
        V = GradedSpace.standard(m, n)
        tally.add(f"ybe({m}|{n})", rmatrix.ybe_residual(V, u, v))
        for k in (1, 2, 3):
            if not wedge_nonzero(k, V):
                continue
            for name, val in rmatrix.fusion_product_check(k, V, u).items():
                tally.add(f"{name}({m}|{n},k={k})", val)
            for l in (1, 2, 3):
                if wedge_nonzero(l, V):
                    tally.add(f"fused-ybe({m}|{n},{k},{l})", rmatrix.fused_ybe_residual(k, l, V, u, v))
    announce(1, "Yang-Baxter, fusion products, factorizations, inversion", tally, time.perf_counter() - t0, 10)


# --------------------------------------------------------------------------- 2

XXX_CHAINS = [
    (1, 1, ["vector", "vector"], [0.1, 0.9], [1.3, 0.4]),
    (1, 1, ["vector", "wedge:2", "vector"], [0.1, 0.8, -0.5], [0.7, 1.9]),
    (2, 1, ["vector", "wedge:2"], [0.1, 0.8], [1.7, 0.6, 1.1]),
    (1, 2, ["vector", "vector", "vector"], [0.1, 0.9, -0.4], [1.2, 0.5, 2.1]),
    (3, 0, ["vector", "vector"], [0.1, 0.9], [1.4, 0.6, 0.9]),
    (2, 0, ["vector", "vector", "vector"], [0.1, 0.9, -0.4], [1.5, 0.3]),
]


def test_criterion_02_commutativity():
    t0 = time.perf_counter()
    tally = Tally(1e-9)
    rng = np.random.default_rng(2)
    for m, n, reps, z, q in XXX_CHAINS:
        c = make_chain(m, n, reps, z, q)
        mono = c.monodromy()
        for s in range(3):
            u0, v0 = (complex(rng.uniform(-1.5, 1.5), rng.uniform(0.3, 1.3)) for _ in range(2))
            ops = {}
            for k in (1, 2):
                ops[f"T{k}(u)"] = transfer.transfer_antisym(mono, k, u0, c.twist)
                ops[f"T{k}(v)"] = transfer.transfer_antisym(mono, k, v0, c.twist)
                ops[f"S{k}(u)"] = transfer.transfer_sym(mono, k, u0, c.twist)
                ops[f"S{k}(v)"] = transfer.transfer_sym(mono, k, v0, c.twist)
            for a in ("T1(u)", "T2(u)", "S1(u)", "S2(u)"):
                for b in ("T1(v)", "T2(v)", "S1(v)", "S2(v)"):
                    tally.add(f"[{a},{b}]({m}|{n},s={s})", transfer.commutator_norm(ops[a], ops[b]))
    announce(2, "transfer matrices commute", tally, time.perf_counter() - t0, 30)


# --------------------------------------------------------------------------- 3


def test_criterion_03_berezinian_identities():
    t0 = time.perf_counter()
    tally = Tally(1e-9)
    chains = [XXX_CHAINS[0], XXX_CHAINS[2], XXX_CHAINS[3]]  # superdimensions 0, 1, -1
    for m, n, reps, z, q in chains:
        c = make_chain(m, n, reps, z, q)
        mono = c.monodromy()
        u0 = 0.43 + 0.61j
        for l, val in enumerate(transfer.berezinian_series_check(mono, 3, u0, c.twist)):
            tally.add(f"convolution({m}|{n},l={l})", val)
        for l in (1, 2, 3):
            got = transfer.dlq_operator(mono, l, u0, c.twist)
            want = transfer.dlq_expected(mono, l, u0, c.twist)
            scale = max(1.0, max(float(np.linalg.norm(w)) for w in want))
            tally.add(f"difference-operator({m}|{n},l={l})", max(float(np.linalg.norm(g - w)) for g, w in zip(got, want)) / scale)
    tally.require("a chain with superdimension 0 is included", any(m == n for m, n, *_ in chains))
    announce(3, "Berezinian convolution and difference-operator coefficients", tally, time.perf_counter() - t0, 30)


# --------------------------------------------------------------------------- 4

# supertrace and recursion differ by one sign per pair of odd-level roots
PINNED_SIGN = {((1, 1), (1,)): 1, ((1, 1), (2,)): -1, ((2, 1), (1, 1)): 1}


def test_criterion_04_supertrace_vs_recursion():
    t0 = time.perf_counter()
    tally = Tally(1e-8)
    rng = np.random.default_rng(4)
    cases = [
        (1, 1, ["vector", "vector"], [0.1, 0.9], (1,)),
        (1, 1, ["vector", "vector"], [0.1, 0.9], (2,)),
        (2, 1, ["vector", "wedge:2"], [0.1, 0.8], (1, 1)),
    ]
    for m, n, reps, z, xi in cases:
        c = make_chain(m, n, reps, z)
        mono = c.monodromy()
        sign = PINNED_SIGN[((m, n), xi)]
        for s in range(5):
            t = random_levels(rng, xi, m, avoid=c.points)
            ok, _ = bethe.is_off_diagonal(t, m, poles=c.points)
            tally.require(f"off-diagonal sample ({m}|{n},{xi},{s})", ok)
            a = bethe.bv_supertrace(mono, t, c.vacuum)
            b = bethe.bv_recursive(mono, t, c.vacuum)
            tally.add(f"({m}|{n},{xi},s={s})", np.linalg.norm(b - sign * a) / np.linalg.norm(a))
    announce(4, "supertrace and recursive Bethe vectors agree", tally, time.perf_counter() - t0, 60)


# --------------------------------------------------------------------------- 5


def xxx_eigen_checks(tally: Tally, c, xi, guesses=None, expect=None):
    sols = bethe.solve_bae(c, xi, guesses=guesses)
    good = [s for s in sols if s.converged and s.off_diagonal]
    tally.require(f"{c.m}|{c.n} {xi}: converged off-diagonal solutions found", bool(good))
    if expect is not None:
        tally.require(f"{c.m}|{c.n} {xi}: {expect} solutions (found {len(good)})", len(good) == expect)
    for i, s in enumerate(good):
        rep = bethe.eigencheck_xxx(c, s.t, (1, 2), samples=3)
        tally.require(f"{c.m}|{c.n} sol {i} non-zero Bethe vector", not rep.degenerate)
        for key, val in rep.residuals.items():
            tally.add(f"{c.m}|{c.n} sol {i} {key}", val)
        tally.add(f"{c.m}|{c.n} sol {i} factorized series", bethe.series_agreement(c, s.t, 3))
    return good


def test_criterion_05_xxx_eigencheck():
    t0 = time.perf_counter()
    tally = Tally(1e-8)
    c = make_chain(1, 1, ["vector", "vector"], [0.1, 0.9], [1.3, 0.4])
    # the ℓ=2 vector chain has a 2-dimensional one-magnon weight space
    grid = bethe.default_guesses(c, [1], grid=5, near=0)
    xxx_eigen_checks(tally, c, [1], guesses=grid, expect=2)
    xxx_eigen_checks(tally, make_chain(2, 1, ["vector", "wedge:2"], [0.1, 0.8], [1.7, 0.6, 1.1]), [1, 1])
    announce(5, "XXX Bethe vectors are eigenvectors", tally, time.perf_counter() - t0, 120)


# --------------------------------------------------------------------------- 6


def test_criterion_06_singular_vectors():
    t0 = time.perf_counter()
    tally = Tally(1e-8)
    systems = [(1, 1, ["vector", "vector"], [0.1, 0.9], [1]), (2, 1, ["vector", "wedge:2"], [0.1, 0.8], [1, 1])]
    for m, n, reps, z, xi in systems:
        c = make_chain(m, n, reps, z)  # Q = 1
        good = [s for s in bethe.solve_bae(c, xi) if s.converged and s.off_diagonal]
        tally.require(f"{m}|{n}: on-shell solution at Q=1", bool(good))
        for i, s in enumerate(good):
            for key, val in bethe.singular_check(c, s.t).items():
                tally.add(f"{m}|{n} sol {i} {key}", val)
    announce(6, "on-shell vectors are singular at Q=1", tally, time.perf_counter() - t0, 60)


# --------------------------------------------------------------------------- 7


def test_criterion_07_duality():
    t0 = time.perf_counter()
    tally = Tally(1e-9)
    rng = np.random.default_rng(7)
    u0 = 0.31 + 0.74j
    for m, n, q in [(1, 1, [1.3, 0.4]), (2, 1, [1.7, 0.6, 1.1]), (1, 2, [1.2, 0.5, 2.1])]:
        c = make_chain(m, n, ["vector", "vector"], [0.1, 0.9], q)
        for key, val in bethe.duality_transfer_check(c, (1, 2), u0).items():
            tally.add(f"{m}|{n} {key}", val)
    profiles = [(1, 1, (1,)), (1, 1, (2,)), (2, 1, (1, 1)), (1, 2, (1, 1))]
    for m, n, xi in profiles:
        c = make_chain(m, n, ["vector", "vector"], [0.1, 0.9])
        for s in range(3):
            t = random_levels(rng, xi, m, avoid=c.points)
            res = bethe.duality_bv_check(c, t)
            tally.add(f"{m}|{n} {xi} proportional", res["proportionality"])
            tally.add(f"{m}|{n} {xi} |ratio B̂|-1", res["hat_ratio_gap"])
            tally.add(f"{m}|{n} {xi} |ratio B̄|-1", res["bar_ratio_gap"])
            if xi[m - 1] <= 1:
                tally.add(f"{m}|{n} {xi} |ratio B|-1", res["normalized_ratio_gap"])
    announce(7, "gl(m|n) <-> gl(n|m) correspondence", tally, time.perf_counter() - t0, 60)


# --------------------------------------------------------------------------- 8

GAUDIN = [
    (1, 1, ["vector", "vector"], [0.1, 0.9], [1.3, 0.4]),
    (2, 1, ["vector", "wedge:2"], [0.1, 0.8], [1.7, 0.6, 1.1]),
    (1, 2, ["vector", "vector"], [0.1, 0.9], [1.2, 0.5, 2.1]),
]


def test_criterion_08_gaudin_extraction():
    t0 = time.perf_counter()
    extraction = Tally(1e-10)
    rest = Tally(1e-9)
    u0, v0 = 0.35 + 0.6j, -0.8 + 0.45j
    for m, n, reps, z, K in GAUDIN:
        s = gaudin.GaudinSystem(make_chain(m, n, reps, z), K)
        for key, val in gaudin.berezinian_extract(s, 3, u0).consistency.items():
            extraction.add(f"{m}|{n} {key}", val)
        rest.add(f"{m}|{n} commutators", gaudin.gaudin_commutators(s, (1, 2, 3), u0, v0))
        for order, val in enumerate(gaudin.sym_diff_check(s, 2, u0)):
            rest.add(f"{m}|{n} inverse series w^{order}", val)
    merged = Tally(1e-9)
    merged.worst = max(extraction.worst, rest.worst)
    merged.count = extraction.count + rest.count
    merged.failures = extraction.failures + rest.failures
    title = f"Gaudin extraction (worst {extraction.worst:.1e} < 1e-10), commutators and inverse series (worst {rest.worst:.1e} < 1e-9)"
    announce(8, title, merged, time.perf_counter() - t0, 60)


# --------------------------------------------------------------------------- 9


def test_criterion_09_gaudin_eigencheck():
    t0 = time.perf_counter()
    tally = Tally(1e-8)
    s = gaudin.GaudinSystem(make_chain(1, 1, ["vector", "vector"], [0.1, 0.9]), [1.3, 0.4])
    good = [x for x in gaudin.solve_gaudin_bae(s, [1]) if x.converged and x.off_diagonal]
    tally.require(f"two Bethe roots (found {len(good)})", len(good) == 2)
    for i, x in enumerate(good):
        rep = gaudin.gaudin_eigencheck(s, x.t, 2, samples=3)
        tally.require(f"sol {i} non-zero Bethe vector", not rep.degenerate)
        for key, val in rep.residuals.items():
            if key.startswith("r="):
                tally.add(f"sol {i} {key}", val)
    s0 = gaudin.GaudinSystem(s.chain)
    good0 = [x for x in gaudin.solve_gaudin_bae(s0, [1]) if x.converged and x.off_diagonal]
    tally.require("on-shell solution at K=0", bool(good0))
    for i, x in enumerate(good0):
        for key, val in gaudin.gaudin_singular_check(s0, x.t).items():
            tally.add(f"K=0 sol {i} {key}", val)
    announce(9, "Gaudin Bethe vectors are eigenvectors; singular at K=0", tally, time.perf_counter() - t0, 120)


# --------------------------------------------------------------------------- 10


def test_criterion_10_classical_limit():
    t0 = time.perf_counter()
    tally = Tally((1.9, 2.1), mode="band")
    rng = np.random.default_rng(10)
    systems = [
        (["vector", "vector"], [0.1, 0.9], [1.3, 0.4]),
        (["vector", "wedge:2", "vector"], [0.1, 0.8, -0.5], [0.7, 1.9]),
    ]
    for reps, z, K in systems:
        s = gaudin.GaudinSystem(make_chain(1, 1, reps, z), K)
        t = random_levels(rng, (1,), 1, avoid=s.chain.points)
        u = complex(rng.uniform(-1, 1), rng.uniform(0.4, 1.2))
        rep = gaudin.classical_limit_check(s, t, u, (1e-1, 1e-2, 1e-3))
        for key in ("asym1", "asym3", "asym4"):
            tally.require(f"{key} fitted on {len(reps)} sites", key in rep.slopes)
            if key in rep.slopes:
                tally.add(f"{key} ({len(reps)} sites)", rep.slopes[key])
    announce(10, "classical-limit remainder slopes", tally, time.perf_counter() - t0, 60)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
