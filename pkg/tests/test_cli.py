import csv
import json
import subprocess
import sys

import pytest

from cdasim.cli import EXIT_CONFIG, main
from cdasim.experiments import list_presets

CONFIG = {
    "name": "cli-tiny",
    "trials": 2,
    "seed": 5,
    "session": {
        "duration": 60,
        "period": 30,
        "demand": {"lo": 10, "hi": 190, "count": 4},
        "supply": {"lo": 10, "hi": 190, "count": 4},
    },
    "buyers": {"ZIC": 2, "SHVR": 2},
    "sellers": {"ZIC": 2, "SHVR": 2},
    "compare": [["ZIC", "SHVR"]],
}


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(CONFIG))
    return p


def test_presets_lists_everything(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in list_presets():
        assert name in out


def test_presets_json(capsys):
    assert main(["presets", "--json"]) == 0
    rows = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert {r["name"] for r in rows} == set(list_presets())


def test_validate_ok(config_file, capsys):
    assert main(["validate", str(config_file)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_reports_field_paths(tmp_path, capsys):
    bad = json.loads(json.dumps(CONFIG))
    bad["session"]["period"] = 90
    bad["buyers"] = {"XYZ": 4}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    assert main(["validate", str(p)]) == EXIT_CONFIG
    out = capsys.readouterr().out
    assert "session.period" in out and "buyers.XYZ" in out


def test_validate_unreadable(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["validate", str(p)]) == EXIT_CONFIG
    assert main(["validate", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_run_unknown_experiment(tmp_path):
    assert main(["run", "no-such-thing", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_run_config(config_file, tmp_path, capsys):
    out = tmp_path / "res"
    assert main(["run", str(config_file), "--trials", "1", "--out", str(out), "-q"]) == 0
    assert "ZIC" in capsys.readouterr().out
    root = out / "cli-tiny"
    with open(root / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["strategy"] for r in rows} == {"ZIC", "SHVR"}
    assert (root / "experiment.json").exists()


def test_run_preset_override(tmp_path):
    out = tmp_path / "res"
    code = main(["run", "zipp-heterogeneous", "--trials", "1", "--seed", "9",
                 "--out", str(out), "-q"])
    assert code == 0
    meta = json.loads((out / "zipp-heterogeneous" / "experiment.json").read_text())
    assert meta["trials"] == 1 and meta["seed"] == 9


def test_profile_strategies(tmp_path):
    out = tmp_path / "rt.csv"
    assert main(["profile-strategies", "--calls", "3000", "--out", str(out),
                 "GVWY", "ZIP", "AA"]) == 0
    with open(out, newline="") as fh:
        us = {r["strategy"]: float(r["microseconds"]) for r in csv.DictReader(fh)}
    assert set(us) == {"GVWY", "ZIP", "AA"}
    # the giveaway trader does almost nothing per call
    assert us["GVWY"] < us["ZIP"] and us["GVWY"] < us["AA"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cdasim", "presets"], capture_output=True,
                       text=True, check=False)
    assert r.returncode == 0
    assert "zipp-heterogeneous" in r.stdout
