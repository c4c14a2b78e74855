import csv
import io as _io
import json
import math
import subprocess
import sys

import pytest

from bellshape import io
from bellshape.cli import run


def write(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def run_capture(capsys, argv):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(_io.StringIO(text)))


def test_verify_binomial(tmp_path, capsys):
    spec = write(tmp_path / "binomial.json", {"family": "binomial", "n": 12, "p": 0.3})
    code, out, _ = run_capture(capsys, ["verify", "--spec", spec, "--n-max", "10"])
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] and rep["counts"] == list(range(11))
    assert rep["format_version"] == io.FORMAT_VERSION


def test_verify_two_bumps(tmp_path, capsys):
    seq = tmp_path / "two_bumps.csv"
    seq.write_text("k,value\n0,1\n1,0\n2,1\n", encoding="utf-8")
    code, out, _ = run_capture(capsys, ["verify", "--seq", str(seq), "--n-max", "1"])
    assert code == 1 and json.loads(out)["failure_order"] == 1


def test_invert_const_one(capsys):
    code, out, _ = run_capture(capsys, ["invert", "--t", "1.5707963", "--n-list", "1", "--const-one"])
    r = rows(out)
    assert code == 0 and r[0] == ["n", "Re", "Im", "abs_error_vs_direct"]
    n, re, im, err = r[1]
    assert n == "1" and abs(float(re) - 1) < 1e-10 and abs(float(im)) < 1e-10 and float(err) < 1e-10


def test_construct_round_trip(tmp_path, capsys):
    spec = write(tmp_path / "s.json", {"family": "poisson", "lam": 2.0, "tol": 1e-14})
    out = tmp_path / "p.csv"
    assert run(["construct", "--spec", spec, "--out", str(out)]) == 0
    back = io.read_sequence(out)
    assert io.sidecar_path(out).exists()
    assert back(2) == pytest.approx(2 * math.exp(-2), rel=1e-15)
    assert back.deficit < 1e-13


def test_construct_stdout_17_digits(tmp_path, capsys):
    spec = write(tmp_path / "s.json", {"family": "binomial", "n": 3, "p": 0.3})
    code, out, _ = run_capture(capsys, ["construct", "--spec", spec])
    r = rows(out)
    assert code == 0 and r[0] == ["k", "value"] and len(r) == 5
    assert float(r[2][1]) == pytest.approx(3 * 0.3 * 0.49, rel=1e-15)


def test_gf_eval(capsys):
    code, out, _ = run_capture(capsys, ["gf-eval", "--closed", "geometric", "--param", "q=0.5",
                                        "--n-points", "8"])
    r = rows(out)
    assert code == 0 and len(r) == 9
    t, re, im = map(float, r[1])
    z = complex(math.cos(t), math.sin(t))
    assert complex(re, im) == pytest.approx(1 / (1 - 0.5 * z), abs=1e-15)


def test_phi_probe(capsys):
    code, out, _ = run_capture(capsys, ["phi-probe", "--walk", "diagonal", "--s=-0.5,4"])
    r = rows(out)
    assert code == 0
    assert float(r[1][1]) == pytest.approx(-1, abs=1e-4)
    assert float(r[2][1]) == pytest.approx(math.atan(0.75) / math.pi, abs=1e-4)


def test_split(capsys):
    code, out, _ = run_capture(capsys, ["split", "--walk", "diagonal"])
    d = json.loads(out)
    assert code == 0 and d["admissible"] and not d["infinitely_divisible"]
    assert "pf" in d["pf_amcm"]


def test_example(tmp_path, capsys):
    report = tmp_path / "r.json"
    code = run(["example", "--walk", "diagonal", "--y", "2", "--horizon", "4000",
                "--out", str(tmp_path / "pmf.csv"), "--report", str(report)])
    d = io.read_json(report)
    assert code == 0 and d["verification"]["verdict"] and d["index_map"] == "half_shifted"


def test_usage_errors(tmp_path, capsys):
    assert run(["verify", "--spec", str(tmp_path / "missing.json")]) == 2
    assert run(["no-such-command"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert run(["construct", "--spec", str(bad)]) == 2
    assert run(["construct", "--spec", write(tmp_path / "u.json", {"family": "cauchy"})]) == 2
    assert run(["gf-eval", "--closed", "nope"]) == 2


def test_numeric_failure(tmp_path, capsys):
    spec = write(tmp_path / "g.json", {"family": "geometric", "q": 0.99, "window": [0, 5], "tol": 1e-12})
    assert run(["construct", "--spec", spec]) == 3


def test_deterministic_output(tmp_path):
    spec = write(tmp_path / "s.json", {"family": "negative_binomial", "lam": 2.0, "p": 0.5})
    cmd = [sys.executable, "-m", "bellshape", "verify", "--spec", spec, "--n-max", "6"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
    cmd = [sys.executable, "-m", "bellshape", "gf-eval", "--spec", spec, "--n-points", "16"]
    assert subprocess.run(cmd, capture_output=True).stdout == subprocess.run(cmd, capture_output=True).stdout
