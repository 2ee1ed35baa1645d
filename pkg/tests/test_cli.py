import copy
import csv
import json
import math
import subprocess
import sys

import pytest

from bergman_jet import cli
from bergman_jet.errors import ConditioningError

DISC = {
    "schema_version": "1",
    "seed": 0,
    "geometry": {"domain": {"kind": "unit-disc", "n": 1}, "k": 1},
    "weights": {"p": 2, "family": {"q": [2, 3, 5], "s_grid": {"start": -20, "stop": 0, "step": 0.5}}},
    "jet": [{"exponent": [1], "re": 1.0}],
    "lemmas": {"battery": [{"check": "default"}]},
}


def run(tmp_path, command, config, name="out"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(config))
    out = tmp_path / name
    return cli.main([command, "--config", str(path), "--out", str(out)]), out


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# schema_version=1 fingerprint=")
    return list(csv.DictReader(lines[1:]))


def test_metric_disc(tmp_path):
    code, out = run(tmp_path, "metric", DISC)
    assert code == 0
    doc = json.loads((out / "metric.json").read_text())
    assert doc["metric"]["value"]["re"] == pytest.approx(math.pi)
    assert doc["verdict"] == "PASS" and doc["schema"]["schema_version"] == "1"


def test_missing_geometry_is_config_error(tmp_path):
    cfg = copy.deepcopy(DISC)
    del cfg["geometry"]
    assert run(tmp_path, "metric", cfg)[0] == 2


def test_unreadable_config(tmp_path):
    assert cli.main(["metric", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_shell_beyond_t_max_is_range_error(tmp_path):
    cfg = copy.deepcopy(DISC)
    cfg["shell"] = {"t_schedule": [0.5]}
    assert run(tmp_path, "metric", cfg)[0] == 3


def test_conditioning_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ConditioningError("singular", pivot=3)
    monkeypatch.setattr(cli, "verify_optimal_bound", boom)
    assert run(tmp_path, "extend", DISC)[0] == 4


def test_extend_cases(tmp_path):
    code, out = run(tmp_path, "extend", DISC)
    doc = json.loads((out / "extension.json").read_text())["extension"]
    assert code == 0 and doc["ratio"] == pytest.approx(1.0, rel=1e-12)
    zero = copy.deepcopy(DISC)
    zero["jet"] = []
    code, out = run(tmp_path, "extend", zero, "zero")
    assert code == 0 and json.loads((out / "extension.json").read_text())["extension"]["ratio"] == 0.0
    pd = copy.deepcopy(DISC)
    pd["geometry"] = {"domain": {"kind": "polydisc", "n": 2, "radii": [1, 1]}, "k": 1}
    pd["weights"] = {"p": 2, "phi": {"kind": "norm2", "c": 0.25}}
    pd["jet"] = [{"exponent": [1, 0], "re": 1.0}, {"exponent": [1, 1], "re": 0.5}]
    assert run(tmp_path, "extend", pd, "pd")[0] == 0


def test_sweep_outputs(tmp_path):
    code, out = run(tmp_path, "sweep", DISC)
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 3 * 41
    board = read_csv(out / "scoreboard.csv")
    assert all(r["status"] == "PASS" for r in board)
    limit = json.loads((out / "sweep.json").read_text())["reports"][-1]
    assert limit["name"] == "limit_bound"
    assert limit["delta_observed"] == pytest.approx(1 / 5, abs=1e-4)


def test_sweep_flat_family(tmp_path):
    cfg = copy.deepcopy(DISC)
    cfg["weights"]["family"]["q"] = [0]
    code, out = run(tmp_path, "sweep", cfg)
    assert code == 0
    vals = {float(r["norm"]) for r in read_csv(out / "sweep.csv")}
    assert max(vals) - min(vals) < 1e-12


def test_lemmas(tmp_path):
    assert run(tmp_path, "lemmas", DISC)[0] == 0
    bad = copy.deepcopy(DISC)
    bad["lemmas"] = {"battery": [{"check": "kernel", "F": {"kind": "exponential", "a": 2.0, "b": 1.0},
                                  "C": 1.0, "q": 2, "s_grid": [-20, -10]}]}
    code, out = run(tmp_path, "lemmas", bad, "bad")
    assert code == 5
    assert read_csv(out / "lemmas.csv")[0]["status"] == "CONTRACT-VIOLATION"
    empty = copy.deepcopy(DISC)
    empty["lemmas"] = {"battery": []}
    assert run(tmp_path, "lemmas", empty, "empty")[0] == 2


def test_outputs_are_byte_identical(tmp_path):
    for cmd in ("sweep", "lemmas", "extend", "metric"):
        _, a = run(tmp_path, cmd, DISC, f"{cmd}_a")
        _, b = run(tmp_path, cmd, DISC, f"{cmd}_b")
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes()


def test_module_entry_point(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(DISC))
    proc = subprocess.run([sys.executable, "-m", "bergman_jet", "extend", "--config", str(path),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
