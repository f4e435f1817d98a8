import csv
import math
import json
import subprocess
import sys

import pytest

from pluripot import __version__
from pluripot.cli import main


def scenario(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith(f"# pluripot {__version__}")
    return lines[0], list(csv.reader(lines[1:]))


def test_lelong_cusp(tmp_path):
    out = tmp_path / "l.csv"
    assert main(["run", scenario(tmp_path, {"command": "lelong", "family": "cusp", "n": 3, "k": 2}), "--out", str(out)]) == 0
    comment, rows = read_csv(out)
    assert '"family": "cusp"' in comment
    assert rows[0] == ["kind", "r", "value", "aux"]
    assert rows[-1][0] == "estimate" and abs(float(rows[-1][2]) - 2 / 3) < 0.02


def test_indicators_row(tmp_path):
    out = tmp_path / "i.csv"
    assert main(["run", scenario(tmp_path, {"command": "indicators", "space": "P1xP1", "a": 1, "b": 1}), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[-1] == "2,1"


def test_malformed_json_exit_2_no_output(tmp_path):
    out = tmp_path / "bad.csv"
    assert main(["run", scenario(tmp_path, "{oops"), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize(
    "doc",
    [
        {"command": "nope"},
        {"command": "lelong", "family": "bogus"},
        {"command": "lelong", "family": "cusp", "n": 2, "k": 5},
        {"command": "envelope", "gamma": 3},
        {"command": "dyn", "h": ["x^2", "y^2"]},
        [1, 2],
    ],
)
def test_validation_errors_exit_2(tmp_path, doc):
    out = tmp_path / "o.csv"
    assert main(["run", scenario(tmp_path, doc), "--out", str(out)]) == 2
    assert not out.exists()


def test_io_error_exit_1(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["indicators", "--out", str(blocker / "x.csv")]) == 1


def test_tolerance_failure_exit_3(tmp_path):
    doc = {"command": "lelong", "family": "cusp", "n": 2, "k": 1, "expect": "1", "tol": 0.02}
    assert main(["run", scenario(tmp_path, doc), "--out", str(tmp_path / "o.csv")]) == 3


def test_param_overrides_and_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["lelong", "-p", "family=greenp1", "-p", "n=1", "-p", "m=1", "-p", "k=3", "-p", "Q=t0^4", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    comment, rows = read_csv(a)
    assert '"seed": 5' in comment
    exact = [r for r in rows if r[0] == "exact"][0]
    assert exact[3] == "2/3"


def test_other_commands(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["dyn", "-p", 'h=["x^3+y","x"]', "-p", "n_max=3", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert [r[1] for r in rows[1:]] == ["2/3"] * 3
    assert main(["transfer", "-p", "points=20", "--out", str(tmp_path / "t.csv")]) == 0
    assert main(["envelope", "-p", "gamma=1/2", "-p", "mode=radial", "--out", str(tmp_path / "r.csv")]) == 0
    assert main(["envelope", "-p", "gamma=1", "-p", "masses=true", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert abs(float(dict(rows[1:])["dirac_mass"]) - 1) < 0.05
    assert main(["eval", "-p", "family=conic", "-p", 'points=[[1,1,1],[1,0,0]]', "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert rows[1][1] == "-inf"
    assert abs(float(rows[2][1]) - math.log(2) / 4) < 1e-12


def test_ma_check_green(tmp_path):
    out = tmp_path / "m.csv"
    base = ["ma", "-p", "family=conic", "--grid-h", "0.1", "--out", str(out)]
    assert main(base + ["-p", 'weights=["1/4","1/4","1/4","1/4"]']) == 0
    _, rows = read_csv(out)
    assert ["check_green", "pass"] in rows
    assert main(base + ["-p", 'weights=["1/2","1/6","1/6","1/6"]']) == 3
    _, rows = read_csv(out)
    assert ["check_green", "fail"] in rows


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pluripot.cli", "indicators"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[-1] == "1,1"
