import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from extremal_bases import __version__
from extremal_bases.cli import main

DOMAINS = Path(__file__).resolve().parent.parent / "domains"
CE = str(DOMAINS / "counterexample.json")


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_version():
    res = subprocess.run([sys.executable, "-m", "extremal_bases", "--version"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip().endswith(__version__)


def test_distance(capsys):
    code, out, _ = _run(capsys, "distance", "--domain", CE, "--point", "0,0,0.1",
                        "--direction", "1,1i,0")
    assert code == 0
    assert out["disc"] == pytest.approx(math.sqrt(0.99 / 0.875), rel=1e-9)
    assert out["euclidean"] == pytest.approx(0.9, abs=1e-10)
    assert out["direction"][0][0] == pytest.approx(1 / math.sqrt(2))
    assert out["ray"] >= out["disc"]


@pytest.mark.parametrize("kind", ["minimal", "maximal", "mixed:1"])
def test_basis(capsys, kind):
    code, out, _ = _run(capsys, "basis", "--domain", CE, "--point", "0,0,0.1", "--kind", kind)
    assert code == 0
    assert out["kind"] == kind
    assert out["radii"][0] == pytest.approx(0.9, abs=1e-10)
    assert len(out["tangency_residuals"]) == 3


def test_counterexample_with_scan(capsys):
    code, out, _ = _run(capsys, "counterexample", "--scan", "2000")
    assert code == 0
    assert out["verdict"] == "PROPERTY_STAR_FAILS"
    assert out["scan"]["disagreements"] == []


def test_validate_writes_report(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dimensions": [2], "domains_per_dim": 1, "points_per_domain": 1,
                               "directions_per_point": 2, "counterexample_deltas": [0.1],
                               "ball_radii": [1.0]}))
    code, out, _ = _run(capsys, "validate", "--config", str(cfg), "--out", str(tmp_path / "r"))
    assert code == 0 and out["passed"]
    assert (tmp_path / "r" / "report.json").exists() and (tmp_path / "r" / "samples.csv").exists()


def test_validate_failing_threshold_exit_code(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dimensions": [2], "domains_per_dim": 1, "points_per_domain": 1,
                               "directions_per_point": 2, "counterexample_deltas": [0.1],
                               "ball_radii": [1.0], "thresholds": {"disc_vs_E": 1.0}}))
    code, out, _ = _run(capsys, "validate", "--config", str(cfg))
    assert code == 1 and not out["passed"]


@pytest.mark.parametrize("argv", [
    ["distance", "--domain", CE, "--point", "0,0", "--direction", "1,0,0"],
    ["distance", "--domain", CE, "--point", "0,0,0", "--direction", "0,0,0"],
    ["basis", "--domain", CE, "--point", "0,0,2", "--kind", "minimal"],
    ["basis", "--domain", "/nonexistent.json", "--point", "0,0,0", "--kind", "minimal"],
    ["basis", "--domain", CE, "--point", "0,0,0", "--kind", "mixed:7"],
    ["counterexample", "--beta1", "0.1"],
])
def test_bad_input_exit_code(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bad_kind_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["basis", "--domain", CE, "--point", "0,0,0", "--kind", "widest"])
    assert exc.value.code == 2
