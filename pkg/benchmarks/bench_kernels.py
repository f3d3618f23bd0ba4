"""Compare the numba kernels with their numpy twins.

Two measurements:

* kernel level: each ``*_numpy`` function against its compiled twin on the
  same inputs, in one process (compilation is excluded by a warm-up call);
* pipeline level: the same workload run in fresh interpreters with
  ``SUPERCHAIN_JIT=1`` and ``SUPERCHAIN_JIT=0``.

Usage::

    python benchmarks/bench_kernels.py [--repeat 20] [--json out.json] [--skip-pipeline]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from superchain import _kernels as K

PIPELINE = """
import time
import numpy as np
from superchain.modules import ChainSpec, parse_rep
from superchain import bethe, transfer
from superchain import _kernels
t0 = time.perf_counter()
m, n = 2, 1
chain = ChainSpec(m, n, [(parse_rep("vector", m, n), 0.1), (parse_rep("wedge:2", m, n), 0.8)], [1.7, 0.6, 1.1])
mono = chain.monodromy()
for u in (0.3 + 0.4j, -0.5 + 0.9j):
    transfer.transfer_antisym(mono, 2, u, chain.twist)
    transfer.transfer_sym(mono, 2, u, chain.twist)
bethe.solve_bae(chain, [1, 1])
print(_kernels.JIT_ENABLED, time.perf_counter() - t0)
"""


def kernel_cases(rng: np.random.Generator):
    dims = [3, 3, 3, 4]
    par = [np.array([0, 0, 1]), np.array([0, 0, 1]), np.array([0, 0, 1]), np.array([0, 1, 1, 0])]
    perm = [3, 1, 0, 2]
    A = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    B = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    pa, pb = np.array([0, 0, 1, 0, 0, 1, 1, 1, 0]), np.array([0, 1, 1, 0] * 3)
    X = rng.normal(size=(108, 108)) + 1j * rng.normal(size=(108, 108))
    t = rng.normal(size=6) + 1j * rng.normal(size=6)
    lev = np.array([0, 0, 0, 1, 1, 1])
    z = np.array([0.1, 0.8, -0.4, 1.3], dtype=complex)
    lam = np.array([[1, 0, 0], [1, 1, 0], [1, 0, 0], [1, 1, 0]], dtype=complex)
    q = np.array([1.7, 0.6, 1.1], dtype=complex)
    kap = np.array([1.0, 1.0, -1.0])
    offsets = np.concatenate([[0], np.cumsum(dims)[:-1]]).astype(np.int64)
    flat = np.concatenate(par).astype(np.int64)
    return {
        "factor_permutation": (
            lambda: K.factor_permutation_numpy(dims, par, perm),
            lambda: K._factor_permutation_jit(np.array(dims), flat, offsets, np.array(perm)),
        ),
        "graded_kron": (lambda: K.graded_kron_numpy(A, B, pa, pb, pb), lambda: K._graded_kron_jit(A, B, pa, pb, pb)),
        "partial_supertrace": (
            lambda: K.partial_supertrace_numpy(X, pa, pb),
            lambda: K._partial_supertrace_jit(X, pa, pb),
        ),
        "bae_system": (
            lambda: K.bae_system_numpy(t, lev, z, lam, q, kap),
            lambda: K._bae_system_jit(t, lev, z, lam, q, kap),
        ),
    }


def bench_kernels(repeat: int) -> dict[str, dict[str, float]]:
    out = {}
    for name, (f_np, f_jit) in kernel_cases(np.random.default_rng(0)).items():
        f_jit()  # compile
        a, b = f_np(), f_jit()
        agree = all(np.allclose(x, y) for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        t_np = min(timeit.repeat(f_np, number=1, repeat=repeat))
        t_jit = min(timeit.repeat(f_jit, number=1, repeat=repeat))
        out[name] = {"numpy_s": t_np, "numba_s": t_jit, "speedup": t_np / t_jit, "agree": agree}
    return out


def bench_pipeline() -> dict[str, float]:
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, SUPERCHAIN_JIT=flag)
        res = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
        enabled, seconds = res.stdout.split()
        out["numba" if enabled == "True" else "numpy"] = float(seconds)
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--json", help="also write the results here")
    p.add_argument("--skip-pipeline", action="store_true")
    args = p.parse_args(argv)
    if not K.JIT_ENABLED:
        print("numba path unavailable (SUPERCHAIN_JIT=0 or numba missing); kernel comparison skipped")
        kernels = {}
    else:
        kernels = bench_kernels(args.repeat)
        print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
        for name, r in kernels.items():
            print(f"{name:<22}{1e3 * r['numpy_s']:>12.3f}{1e3 * r['numba_s']:>12.3f}{r['speedup']:>10.1f}  {r['agree']}")
    pipeline = {} if args.skip_pipeline else bench_pipeline()
    for path, seconds in pipeline.items():
        print(f"pipeline ({path}, includes import and compilation): {seconds:.2f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": kernels, "pipeline": pipeline}, fh, indent=2, sort_keys=True)
    return 0 if all(r["agree"] for r in kernels.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
