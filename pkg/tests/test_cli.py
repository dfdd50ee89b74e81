"""Command-line surface: constants table, simulate + manifest, batteries."""

from __future__ import annotations

import csv
import io
import json
import os

import pytest

from rggcross.cli import main
from rggcross.theory import c_d_closed, c_d_prime_closed


def _sparse_config(**kw):
    doc = {
        "schema": 1,
        "window": "cube",
        "dimension": 3,
        "regime": {"kind": "sparse", "c": 2.0},
        "t_values": [200],
        "replications": 60,
        "regions": [
            {"shape": "rectangle", "lo": [0.2, 0.2], "hi": [0.5, 0.5]},
            {"shape": "rectangle", "lo": [0.5, 0.5], "hi": [0.8, 0.8]},
        ],
        "seed": 11,
        "record_stress": False,
    }
    doc.update(kw)
    return doc


def _write(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_constants_table(capsys):
    code = main(["constants", "--d", "3..4", "--mc-samples", "200000",
                 "--seed", "3"])
    assert code == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["d"] for r in rows] == ["3", "4"]
    for row in rows:
        d = int(row["d"])
        closed = float(row["c_d_closed"])
        assert closed == pytest.approx(c_d_closed(d), rel=1e-12)
        assert abs(float(row["c_d_mc"]) - closed) \
            <= 4.0 * float(row["c_d_mc_se"])
        closed_p = float(row["c_d_prime_closed"])
        assert closed_p == pytest.approx(c_d_prime_closed(d), rel=1e-12)
        assert abs(float(row["c_d_prime_mc"]) - closed_p) \
            <= 4.0 * float(row["c_d_prime_mc_se"])


def test_constants_rejects_low_dimension(capsys):
    assert main(["constants", "--d", "2"]) == 2


def test_simulate_writes_records_and_manifest(tmp_path):
    cfg = _write(tmp_path, _sparse_config())
    code = main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)])
    assert code == 0
    records = (tmp_path / "records.csv").read_text().splitlines()
    assert len(records) == 1 + 60
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 11
    assert manifest["outputs"]["records"] == "records.csv"


def test_simulate_rerun_from_manifest_byte_identical(tmp_path):
    cfg = _write(tmp_path, _sparse_config())
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    first = (tmp_path / "records.csv").read_bytes()
    manifest_path = str(tmp_path / "manifest.json")
    out2 = tmp_path / "rerun"
    assert main(["simulate", "--config", manifest_path,
                 "--out-dir", str(out2)]) == 0
    assert (out2 / "records.csv").read_bytes() == first


def test_simulate_seed_override_changes_records(tmp_path):
    cfg = _write(tmp_path, _sparse_config())
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path),
                 "--prefix", "a_"]) == 0
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path),
                 "--prefix", "b_", "--seed", "12"]) == 0
    a = (tmp_path / "a_records.csv").read_bytes()
    b = (tmp_path / "b_records.csv").read_bytes()
    assert a != b
    manifest = json.loads((tmp_path / "b_manifest.json").read_text())
    assert manifest["config"]["seed"] == 12


def test_simulate_rejects_unknown_key_without_partial_files(tmp_path, capsys):
    cfg = _write(tmp_path, _sparse_config(replicas=5))
    out = tmp_path / "out"
    code = main(["simulate", "--config", cfg, "--out-dir", str(out)])
    assert code == 2
    err = capsys.readouterr().err
    assert "replicas" in err
    assert not (out / "records.csv").exists()
    assert not (out / "manifest.json").exists()


def test_simulate_rejects_garbage_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["simulate", "--config", str(path),
                 "--out-dir", str(tmp_path / "o")]) == 2


def test_simulate_rejects_bad_values(tmp_path, capsys):
    for patch, key in [({"replications": 0}, "replications"),
                       ({"t_values": []}, "t_values"),
                       ({"regime": {"kind": "sparse", "c": -1.0}}, "regime"),
                       ({"schema": 2}, "schema"),
                       ({"level": 3.0}, "level")]:
        cfg = _write(tmp_path, _sparse_config(**patch), name="c.json")
        assert main(["simulate", "--config", cfg,
                     "--out-dir", str(tmp_path)]) == 2
        assert key in capsys.readouterr().err


def test_manifest_hash_mismatch_rejected(tmp_path):
    cfg = _write(tmp_path, _sparse_config())
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    manifest_path = tmp_path / "manifest.json"
    doc = json.loads(manifest_path.read_text())
    doc["config"]["seed"] = 999   # tamper without updating the hash
    manifest_path.write_text(json.dumps(doc))
    assert main(["simulate", "--config", str(manifest_path),
                 "--out-dir", str(tmp_path)]) == 2


def test_poisson_test_refuses_thermodynamic(tmp_path):
    doc = _sparse_config(regime={"kind": "thermodynamic", "c": 1.0})
    cfg = _write(tmp_path, doc)
    assert main(["poisson-test", "--config", cfg,
                 "--out-dir", str(tmp_path)]) == 2


def test_clt_test_refuses_sparse(tmp_path):
    cfg = _write(tmp_path, _sparse_config())
    assert main(["clt-test", "--config", cfg,
                 "--out-dir", str(tmp_path)]) == 2


def test_poisson_test_writes_reports(tmp_path):
    cfg = _write(tmp_path, _sparse_config(replications=150))
    code = main(["poisson-test", "--config", cfg, "--out-dir", str(tmp_path)])
    assert code in (0, 1)   # small sample; only the plumbing is asserted
    lines = (tmp_path / "poisson_reports.jsonl").read_text().splitlines()
    assert len(lines) >= 3
    names = [json.loads(line)["name"] for line in lines]
    assert "dispersion" in names


def test_clt_test_runs_small(tmp_path):
    doc = _sparse_config(regime={"kind": "thermodynamic", "c": 1.0},
                         t_values=[150], replications=520,
                         record_stress=True, regions=[])
    cfg = _write(tmp_path, doc)
    code = main(["clt-test", "--config", cfg, "--out-dir", str(tmp_path),
                 "--threads", "2"])
    assert code in (0, 1)
    lines = (tmp_path / "clt_reports.jsonl").read_text().splitlines()
    assert len(lines) == 1
    doc = json.loads(lines[0])
    assert "cov_reference" in doc["details"]


def test_missing_config_is_usage_error():
    assert main(["poisson-test"]) == 2


def test_calibrate_mode(capsys):
    code = main(["poisson-test", "--calibrate"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["ok"] is True
    assert set(out["rates"]) == {"dispersion", "poisson_gof", "independence",
                                 "local_intensity", "clt"}


def test_env_var_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("RGGCROSS_OUT_DIR", str(tmp_path / "envout"))
    cfg = _write(tmp_path, _sparse_config(replications=20))
    assert main(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "envout" / "records.csv").exists()
