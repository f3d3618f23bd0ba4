"""Command-line front end: JSON config in, JSON or CSV report out.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import bethe, gaudin, rmatrix, transfer
from .graded import GradedSpace
from .modules import ChainSpec, parse_rep, rtt_residual

log = logging.getLogger("superchain")

SCHEMA_VERSION = 1
COMMANDS = (
    "check-ybe",
    "check-fusion",
    "check-transfer",
    "solve-bae",
    "verify-xxx",
    "verify-gaudin",
    "check-duality",
    "limit-sweep",
)

_COMPLEX = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["m", "n", "sites", "xi"],
    "additionalProperties": False,
    "properties": {
        "m": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 0},
        "sites": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["rep", "z"],
                "additionalProperties": False,
                "properties": {
                    "rep": {"type": "string", "pattern": "^(vector|wedge:[1-9][0-9]*|cyclic:[1-9][0-9]*)$"},
                    "z": _COMPLEX,
                },
            },
        },
        "twist": {"type": "array", "items": _COMPLEX},
        "xi": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "seed": {"type": "integer", "minimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "slope_band": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
    },
}

DEFAULTS = {"seed": 0, "tol": 1e-8, "samples": 3, "slope_band": 0.1, "eps": [1e-1, 1e-2, 1e-3]}


class ConfigError(Exception):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message


@dataclass
class RunConfig:
    m: int
    n: int
    sites: list[tuple[str, complex]]
    twist: list[complex] | None
    xi: list[int]
    seed: int
    tol: float
    samples: int
    slope_band: float
    eps: list[float]
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def N(self) -> int:
        return self.m + self.n

    def chain(self, twist=None) -> ChainSpec:
        mods = []
        for i, (rep, z) in enumerate(self.sites):
            try:
                mods.append((parse_rep(rep, self.m, self.n), z))
            except ValueError as exc:
                raise ConfigError(f"/sites/{i}/rep", str(exc)) from exc
        try:
            return ChainSpec(self.m, self.n, mods, twist)
        except ValueError as exc:
            raise ConfigError("/sites", str(exc)) from exc

    def xxx_chain(self) -> ChainSpec:
        return self.chain(self.twist if self.twist is not None else np.ones(self.N))

    def gaudin_system(self) -> gaudin.GaudinSystem:
        K = self.twist if self.twist is not None else np.zeros(self.N)
        try:
            return gaudin.GaudinSystem(self.chain(), K)
        except ValueError as exc:
            raise ConfigError("/sites", str(exc)) from exc

    def hash(self) -> str:
        return config_hash(self.raw)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def config_hash(raw: dict) -> str:
    return hashlib.sha256(json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def validate_config(raw: Any) -> RunConfig:
    """Schema validation plus the cross-field rules; errors carry a JSON pointer."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        ptr = _pointer(err.absolute_path)
        if err.validator == "required":
            missing = [p for p in err.validator_value if p not in err.instance]
            ptr = f"{ptr}/{missing[0]}"
        raise ConfigError(ptr, err.message)
    m, n = raw["m"], raw["n"]
    N = m + n
    if N == 0:
        raise ConfigError("/m", "m + n must be positive")
    if len(raw["xi"]) != N - 1:
        raise ConfigError("/xi", f"expected {N - 1} entries, got {len(raw['xi'])}")
    twist = raw.get("twist")
    if twist is not None and len(twist) != N:
        raise ConfigError("/twist", f"expected {N} diagonal entries, got {len(twist)}")
    opts = {k: raw.get(k, v) for k, v in DEFAULTS.items()}
    eps = [float(e) for e in opts["eps"]]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("/eps", "values must be strictly decreasing")
    return RunConfig(
        m=m,
        n=n,
        sites=[(s["rep"], complex(*s["z"])) for s in raw["sites"]],
        twist=None if twist is None else [complex(*q) for q in twist],
        xi=list(raw["xi"]),
        seed=int(opts["seed"]),
        tol=float(opts["tol"]),
        samples=int(opts["samples"]),
        slope_band=float(opts["slope_band"]),
        eps=eps,
        raw=raw,
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("", f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from exc
    return validate_config(raw)


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    command: str
    config_hash: str
    checks: list[dict] = field(default_factory=list)
    solutions: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def residual(self, name: str, value: float, tol: float):
        value = float(value)
        self.checks.append({"name": name, "residual": value, "tolerance": tol, "pass": bool(np.isfinite(value) and value < tol)})

    def slope(self, name: str, value: float, expected: float, band: float):
        value = float(value)
        self.checks.append(
            {"name": name, "slope": value, "expected": expected, "tolerance": band, "pass": bool(abs(value - expected) <= band)}
        )

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config_hash": self.config_hash,
            "pass": self.passed,
            "checks": self.checks,
            "solutions": self.solutions,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        return cls(data["command"], data["config_hash"], list(data["checks"]), list(data["solutions"]), data["wall_time"])


def emit_report(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "tol", "pass"])
        for c in report.checks:
            value = c["residual"] if "residual" in c else c["slope"]
            w.writerow([c["name"], repr(value), repr(c["tolerance"]), str(c["pass"]).lower()])
        return buf.getvalue()
    raise ValueError(f"unknown format '{fmt}'")


# ---------------------------------------------------------------------------
# command pipelines


def _points(rng: np.random.Generator, count: int) -> list[complex]:
    return [complex(rng.uniform(-1.5, 1.5), rng.uniform(0.4, 1.4)) for _ in range(count)]


def _random_levels(cfg: RunConfig, rng: np.random.Generator) -> list[list[complex]]:
    """Off-diagonal parameters well away from the chain points."""
    z = np.array([s[1] for s in cfg.sites])
    while True:
        t = [[complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.0, 1.0)) for _ in range(x)] for x in cfg.xi]
        t = bethe.canonical_order(t, cfg.m)
        flat = [v for level in t for v in level]
        far = all(abs(v - p) > 0.2 for v in flat for p in z)
        spread = all(abs(a - b) > 0.2 and abs(abs(a - b) - 1) > 0.2 for i, a in enumerate(flat) for b in flat[:i])
        if far and spread:
            return t


def cmd_check_ybe(cfg: RunConfig, rep: Report):
    V = GradedSpace.standard(cfg.m, cfg.n)
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.samples):
        u, v = _points(rng, 2)
        rep.residual(f"ybe sample={i}", rmatrix.ybe_residual(V, u, v), cfg.tol)
        rep.residual(f"unitarity sample={i}", rmatrix.unitarity_residual(V, u), cfg.tol)
    chain = cfg.xxx_chain()
    mono = chain.monodromy()
    for i in range(cfg.samples):
        u, v = _points(rng, 2)
        rep.residual(f"rtt sample={i}", rtt_residual(mono, u, v), cfg.tol)


def cmd_check_fusion(cfg: RunConfig, rep: Report):
    V = GradedSpace.standard(cfg.m, cfg.n)
    rng = np.random.default_rng(cfg.seed)
    kmax = 3 if V.dim <= 3 else 2
    for k in range(1, kmax + 1):
        for name, val in rmatrix.fusion_product_check(k, V, _points(rng, 1)[0]).items():
            rep.residual(f"k={k} {name}", val, cfg.tol)
    for k in range(1, kmax):
        for l in range(1, kmax):
            u, v = _points(rng, 2)
            rep.residual(f"fused ybe k={k} l={l}", rmatrix.fused_ybe_residual(k, l, V, u, v), cfg.tol)


def cmd_check_transfer(cfg: RunConfig, rep: Report):
    chain = cfg.xxx_chain()
    mono = chain.monodromy()
    rng = np.random.default_rng(cfg.seed)
    Q = chain.twist
    for i in range(cfg.samples):
        u, v = _points(rng, 2)
        ops = {}
        for k in (1, 2):
            ops[f"T{k}(u)"] = transfer.transfer_antisym(mono, k, u, Q)
            ops[f"T{k}(v)"] = transfer.transfer_antisym(mono, k, v, Q)
            ops[f"S{k}(v)"] = transfer.transfer_sym(mono, k, v, Q)
        for a in ("T1(u)", "T2(u)"):
            for b in ("T1(v)", "T2(v)", "S1(v)", "S2(v)"):
                rep.residual(f"[{a},{b}] sample={i}", transfer.commutator_norm(ops[a], ops[b]), cfg.tol)
    u = _points(rng, 1)[0]
    for l, val in enumerate(transfer.berezinian_series_check(mono, 3, u, Q)):
        rep.residual(f"berezinian convolution l={l}", val, cfg.tol)
    for l in (1, 2, 3):
        got = transfer.dlq_operator(mono, l, u, Q)
        want = transfer.dlq_expected(mono, l, u, Q)
        scale = max(1.0, max(float(np.linalg.norm(w)) for w in want))
        gap = max(float(np.linalg.norm(g - w)) for g, w in zip(got, want)) / scale
        rep.residual(f"difference operator l={l}", gap, cfg.tol)


def _solutions(cfg: RunConfig, chain: ChainSpec):
    return bethe.solve_bae(chain, cfg.xi, seed=cfg.seed)


def cmd_solve_bae(cfg: RunConfig, rep: Report):
    chain = cfg.xxx_chain()
    sols = _solutions(cfg, chain)
    rep.solutions = [s.to_json() for s in sols]
    for i, s in enumerate(sols):
        rep.residual(f"solution {i} relative residual", s.residual_norm, cfg.tol)


def cmd_verify_xxx(cfg: RunConfig, rep: Report):
    chain = cfg.xxx_chain()
    sols = _solutions(cfg, chain)
    rep.solutions = [s.to_json() for s in sols]
    good = [s for s in sols if s.off_diagonal]
    if not good:
        rep.residual("off-diagonal solutions found", float("inf"), cfg.tol)
        return
    trivial = np.allclose(chain.twist, chain.twist[0])
    for i, s in enumerate(good):
        er = bethe.eigencheck_xxx(chain, s.t, (1, 2), samples=cfg.samples, seed=cfg.seed)
        if er.degenerate:
            rep.residual(f"solution {i} Bethe vector norm", float("inf"), cfg.tol)
            continue
        for name, val in er.residuals.items():
            rep.residual(f"solution {i} {name}", val, cfg.tol)
        rep.residual(f"solution {i} series agreement", bethe.series_agreement(chain, s.t, 3, cfg.samples, cfg.seed), cfg.tol)
        if trivial:
            for name, val in bethe.singular_check(chain, s.t).items():
                rep.residual(f"solution {i} singular {name}", val, cfg.tol)


def cmd_verify_gaudin(cfg: RunConfig, rep: Report):
    system = cfg.gaudin_system()
    rng = np.random.default_rng(cfg.seed)
    u, v = _points(rng, 2)
    ext = gaudin.berezinian_extract(system, 3, u)
    for name, val in ext.consistency.items():
        rep.residual(f"extraction {name}", val, cfg.tol)
    rep.residual("commutators r,s<=3", gaudin.gaudin_commutators(system, (1, 2, 3), u, v), cfg.tol)
    for order, val in enumerate(gaudin.sym_diff_check(system, 2, u)):
        rep.residual(f"inverse series w^{order}", val, cfg.tol)
    sols = gaudin.solve_gaudin_bae(system, cfg.xi, seed=cfg.seed)
    rep.solutions = [s.to_json() for s in sols]
    good = [s for s in sols if s.off_diagonal]
    if not good:
        rep.residual("off-diagonal solutions found", float("inf"), cfg.tol)
        return
    zero_K = not np.any(system.K)
    for i, s in enumerate(good):
        er = gaudin.gaudin_eigencheck(system, s.t, 2, samples=cfg.samples, seed=cfg.seed)
        if er.degenerate:
            rep.residual(f"solution {i} Bethe vector norm", float("inf"), cfg.tol)
            continue
        for name, val in er.residuals.items():
            rep.residual(f"solution {i} {name}", val, cfg.tol)
        if zero_K:
            for name, val in gaudin.gaudin_singular_check(system, s.t).items():
                rep.residual(f"solution {i} singular {name}", val, cfg.tol)


def cmd_check_duality(cfg: RunConfig, rep: Report):
    chain = cfg.xxx_chain()
    rng = np.random.default_rng(cfg.seed)
    u = _points(rng, 1)[0]
    for name, val in bethe.duality_transfer_check(chain, (1, 2), u).items():
        rep.residual(f"transfer {name}", val, cfg.tol)
    for i in range(cfg.samples):
        t = _random_levels(cfg, rng)
        res = bethe.duality_bv_check(chain, t)
        rep.residual(f"bethe vector proportionality sample={i}", res["proportionality"], cfg.tol)
        rep.residual(f"bethe vector |ratio|-1 sample={i}", res["hat_ratio_gap"], cfg.tol)
        rep.residual(f"symmetric bethe vector |ratio|-1 sample={i}", res["bar_ratio_gap"], cfg.tol)
        # the normalized vector keeps a unimodular ratio only with at most one odd-level root
        if not 1 <= cfg.m <= len(t) or len(t[cfg.m - 1]) <= 1:
            rep.residual(f"normalized bethe vector |ratio|-1 sample={i}", res["normalized_ratio_gap"], cfg.tol)
    system = cfg.gaudin_system()
    for name, val in gaudin.gaudin_duality_check(system, (1, 2), u).items():
        rep.residual(f"gaudin {name}", val, cfg.tol)


def cmd_limit_sweep(cfg: RunConfig, rep: Report):
    system = cfg.gaudin_system()
    rng = np.random.default_rng(cfg.seed)
    u = _points(rng, 1)[0]
    t = _random_levels(cfg, rng)
    lim = gaudin.classical_limit_check(system, t, u, cfg.eps)
    for name, slope in lim.slopes.items():
        rep.slope(name, slope, lim.expected[name], cfg.slope_band)


PIPELINES: dict[str, Callable[[RunConfig, Report], None]] = {
    "check-ybe": cmd_check_ybe,
    "check-fusion": cmd_check_fusion,
    "check-transfer": cmd_check_transfer,
    "solve-bae": cmd_solve_bae,
    "verify-xxx": cmd_verify_xxx,
    "verify-gaudin": cmd_verify_gaudin,
    "check-duality": cmd_check_duality,
    "limit-sweep": cmd_limit_sweep,
}


def run_command(cmd: str, cfg: RunConfig) -> Report:
    if cmd not in PIPELINES:
        raise ValueError(f"unknown command '{cmd}'")
    rep = Report(cmd, cfg.hash())
    start = time.perf_counter()
    PIPELINES[cmd](cfg, rep)
    rep.wall_time = time.perf_counter() - start
    return rep


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="superchain", description="Verification and solving workflows for gl(m|n) XXX and Gaudin models.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--tol", type=float, help="override the tolerance from the config")
    p.add_argument("--samples", type=int, help="override the number of sample points")
    p.add_argument("--seed", type=int, help="override the seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        raw = dict(cfg.raw)
        for key in ("tol", "samples", "seed"):
            val = getattr(args, key)
            if val is not None:
                raw[key] = val
        cfg = validate_config(raw)
        report = run_command(args.command, cfg)
    except ConfigError as exc:
        print(f"config error at {exc.pointer or '/'}: {exc.message}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced with the originating command
        log.exception("internal error")
        print(f"internal error in {args.command}: {exc}", file=sys.stderr)
        return 3
    text = emit_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
