import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from superchain import cli

ROOT = Path(__file__).resolve().parents[1]
REPORT_SCHEMA = json.loads((ROOT / "docs" / "report_schema.json").read_text())

GL11 = {
    "m": 1,
    "n": 1,
    "sites": [{"rep": "vector", "z": [0.1, 0.0]}, {"rep": "vector", "z": [0.9, 0.0]}],
    "twist": [[1.3, 0.0], [0.4, 0.0]],
    "xi": [1],
    "seed": 0,
    "tol": 1e-8,
    "samples": 2,
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_minimal_config_parses(tmp_path):
    cfg = cli.load_config(write(tmp_path, {"m": 1, "n": 1, "sites": [{"rep": "vector", "z": [0, 0]}], "xi": [0]}))
    assert (cfg.m, cfg.n, cfg.xi) == (1, 1, [0])
    assert cfg.tol == cli.DEFAULTS["tol"]


def test_missing_xi_names_pointer():
    bad = dict(GL11)
    del bad["xi"]
    with pytest.raises(cli.ConfigError) as exc:
        cli.validate_config(bad)
    assert exc.value.pointer == "/xi"


@pytest.mark.parametrize("patch,pointer", [
    ({"xi": [1, 1]}, "/xi"),
    ({"twist": [[1, 0]]}, "/twist"),
    ({"tol": -1}, "/tol"),
    ({"sites": [{"rep": "spinor", "z": [0, 0]}]}, "/sites/0/rep"),
    ({"sites": [{"rep": "vector", "z": [0]}]}, "/sites/0/z"),
    ({"eps": [1e-3, 1e-2]}, "/eps"),
])
def test_validation_pointers(patch, pointer):
    with pytest.raises(cli.ConfigError) as exc:
        cli.validate_config({**GL11, **patch})
    assert exc.value.pointer == pointer


def test_gaudin_point_collision_is_config_error():
    cfg = cli.validate_config({**GL11, "sites": [{"rep": "vector", "z": [0.2, 0]}, {"rep": "vector", "z": [0.2, 0]}]})
    with pytest.raises(cli.ConfigError):
        cfg.gaudin_system()


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(cli.ConfigError):
        cli.load_config(p)


def test_check_ybe_passes():
    rep = cli.run_command("check-ybe", cli.validate_config(GL11))
    assert rep.passed
    assert all(c["residual"] < 1e-10 for c in rep.checks)


def test_verify_xxx_reference_config():
    rep = cli.run_command("verify-xxx", cli.validate_config(GL11))
    assert rep.passed
    assert len(rep.solutions) == 2
    assert sum(1 for c in rep.checks if c["name"].endswith(" k=1") and "proj" not in c["name"] and "series" not in c["name"]) == 2


def test_unknown_command():
    with pytest.raises(ValueError):
        cli.run_command("frobnicate", cli.validate_config(GL11))
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", "--config", "x.json"])
    assert exc.value.code != 0


def test_json_round_trip_and_schema():
    rep = cli.run_command("check-ybe", cli.validate_config(GL11))
    data = json.loads(cli.emit_report(rep, "json"))
    jsonschema.validate(data, REPORT_SCHEMA)
    back = cli.Report.from_json(data)
    assert back.to_json() == rep.to_json()


def test_csv_rows():
    rep = cli.run_command("check-ybe", cli.validate_config(GL11))
    rows = list(csv.reader(io.StringIO(cli.emit_report(rep, "csv"))))
    assert rows[0] == ["name", "value", "tol", "pass"]
    assert len(rows) - 1 == len(rep.checks)


def test_config_hash_stable():
    a = cli.validate_config(GL11).hash()
    b = cli.validate_config(json.loads(json.dumps(GL11))).hash()
    assert a == b
    assert a != cli.validate_config({**GL11, "seed": 1}).hash()


def test_determinism_modulo_wall_time():
    cfg = cli.validate_config(GL11)
    a = cli.run_command("solve-bae", cfg).to_json()
    b = cli.run_command("solve-bae", cfg).to_json()
    a.pop("wall_time")
    b.pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_tolerance_comes_from_config():
    rep = cli.run_command("check-ybe", cli.validate_config({**GL11, "tol": 1e-30}))
    assert all(c["tolerance"] == 1e-30 for c in rep.checks)
    assert not rep.passed


def test_limit_sweep_reports_slopes():
    rep = cli.run_command("limit-sweep", cli.validate_config(GL11))
    assert {c["name"] for c in rep.checks} == {"asym1", "asym3", "asym4"}
    assert rep.passed


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "superchain.cli", *args], capture_output=True, text=True, cwd=ROOT)


def test_exit_codes(tmp_path):
    good = write(tmp_path, GL11)
    assert run_cli("check-ybe", "--config", str(good)).returncode == 0
    assert run_cli("check-ybe", "--config", str(good), "--tol", "1e-30").returncode == 1
    bad = write(tmp_path, {"m": 1}, "bad.json")
    res = run_cli("check-ybe", "--config", str(bad))
    assert res.returncode == 2
    assert "/n" in res.stderr or "/sites" in res.stderr or "/xi" in res.stderr


def test_out_file_and_csv(tmp_path):
    out = tmp_path / "r.csv"
    res = run_cli("check-ybe", "--config", str(write(tmp_path, GL11)), "--format", "csv", "--out", str(out))
    assert res.returncode == 0
    assert out.read_text().startswith("name,value,tol,pass")


def test_internal_error_exit_code(tmp_path, monkeypatch):
    def boom(cfg, rep):
        raise RuntimeError("kaboom")

    monkeypatch.setitem(cli.PIPELINES, "check-ybe", boom)
    assert cli.main(["check-ybe", "--config", str(write(tmp_path, GL11))]) == 3
