import json
import math
import subprocess
import sys

import pytest

from tanlab.cli import UsageError, main, parse_complex
from tanlab.core import TangentMap, evaluate
from tanlab.rotation import multiplier


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "text, value",
    [
        ("1+0i", 1),
        ("0.5 + 0i", 0.5),
        ("-1.5-2i", -1.5 - 2j),
        ("2i", 2j),
        ("i", 1j),
        ("-i", -1j),
        ("1e-3+4.5e2j", 1e-3 + 450j),
        (".5", 0.5),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "1+2", "i1", "1 2i"])
def test_parse_complex_rejects(text):
    with pytest.raises(UsageError):
        parse_complex(text)


def test_eval(capsys):
    code, out, err = run(capsys, "eval", "--lambda", "1+0i", "--z", "0.7853981633974483")
    assert code == 0 and err == ""
    data = json.loads(out)
    assert list(data) == ["lambda", "z", "value", "derivative", "asymptotic_values"]
    assert abs(data["value"][0] - 1) < 1e-15 and abs(data["derivative"][0] - 2) < 1e-14


def test_eval_theta_matches_library(capsys):
    code, out, _ = run(capsys, "eval", "--theta", "golden", "--z", "0.1")
    assert code == 0
    ref = evaluate(TangentMap(multiplier((math.sqrt(5) - 1) / 2)), 0.1)
    v = json.loads(out)["value"]
    assert abs(complex(*v) - ref) < 1e-15


def test_eval_errors(capsys):
    code, _, err = run(capsys, "eval", "--lambda", "0", "--z", "1")
    assert code == 2 and "lambda must be nonzero" in err
    code, _, _ = run(capsys, "eval", "--lambda", "one", "--z", "1")
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--bogus"])
    assert exc.value.code == 2


def test_cf(capsys):
    code, out, err = run(capsys, "cf", "--quadratic", "golden", "--depth", "30")
    assert code == 0 and err == ""
    data = json.loads(out)
    assert data["quotients"] == [1] * 30 and data["max_quotient"] == 1
    assert data["convergents"][:3] == [[1, 1], [1, 2], [2, 3]]
    b = data["brjuno_partials"]
    assert all(y > x for x, y in zip(b, b[1:]))
    assert json.loads(run(capsys, "cf", "--quadratic", "sqrt2m1", "--depth", "20")[1])["quotients"] == [2] * 20
    code, out, _ = run(capsys, "cf", "--x", "0.25")
    data = json.loads(out)
    assert code == 0 and data["rational"] is True and data["quotients"] == [4]
    assert data["brjuno_partials"] is None


def test_siegel_exit_codes(capsys, tmp_path):
    code, _, err = run(capsys, "siegel", "--theta", "0.5", "--out", tmp_path)
    assert code == 3 and "n=3" in err
    code, _, err = run(capsys, "siegel", "--quadratic", "golden", "--coeffs", "10", "--out", tmp_path)
    assert code == 4 and "InsufficientData" in err


@pytest.mark.slow
def test_siegel_run(capsys, tmp_path):
    args = ["siegel", "--quadratic", "golden", "--coeffs", "200", "--rhos", "0.5,0.9,0.95,0.995",
            "--samples", "1024", "--out", tmp_path]
    code, out, err = run(capsys, *args)
    assert code == 0 and err == ""
    assert json.loads(out)["verdict"] == "UnboundedLikely"
    report = (tmp_path / "siegel.json").read_bytes()
    traces = (tmp_path / "traces.csv").read_bytes()
    manifest = json.loads((tmp_path / "siegel.manifest.json").read_text())
    assert manifest["subcommand"] == "siegel" and manifest["tool_version"]
    assert list(manifest)[:5] == ["subcommand", "config", "input_hashes", "tool_version", "wall_clock_seconds"]
    # identical flags reproduce the primary outputs byte for byte
    assert run(capsys, *args)[0] == 0
    assert (tmp_path / "siegel.json").read_bytes() == report
    assert (tmp_path / "traces.csv").read_bytes() == traces


def test_scan(capsys, tmp_path):
    args = ["scan", "--lambda", "0.5+0i", "--rect=-1.2,-1.2,1.2,1.2", "--res", "64", "--out", tmp_path]
    code, out, err = run(capsys, *args)
    assert code == 0 and err == ""
    hist = json.loads(out)
    assert max(hist, key=hist.get).startswith("AttractedToCycle(period=1")
    ppm = (tmp_path / "scan.ppm").read_bytes()
    assert ppm.startswith(b"P6\n64 64\n255\n")
    assert (tmp_path / "scan.legend.json").exists() and (tmp_path / "scan.manifest.json").exists()
    assert run(capsys, *args, "--threads", "4")[0] == 0
    assert (tmp_path / "scan.ppm").read_bytes() == ppm


def test_scan_single_cell(capsys, tmp_path):
    code, _, _ = run(capsys, "scan", "--lambda", "0.5", "--res", "1", "--out", tmp_path, "--no-png")
    assert code == 0
    assert (tmp_path / "scan.ppm").read_bytes().startswith(b"P6\n1 1\n255\n")


def test_scan_unwritable(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "scan", "--lambda", "0.5", "--res", "4", "--out", blocker / "sub")
    assert code == 5 and err


def test_param_scan(capsys, tmp_path):
    code, out, err = run(capsys, "param-scan", "--res", "8", "--eps", "0.5", "--out", tmp_path)
    assert code == 0 and err == ""
    lines = (tmp_path / "param_scan.csv").read_text().splitlines()
    assert lines[0] == "theta,period,|multiplier|,siegel_flag" and len(lines) == 9


def _write_curve(path, pts):
    path.write_text("re,im\n" + "".join(f"{z.real},{z.imag}\n" for z in pts))


def test_lift(capsys, tmp_path):
    curve = tmp_path / "seg.csv"
    _write_curve(curve, [1, 2])
    for base, end in ((math.pi / 4, math.atan(2)), (math.pi / 4 + math.pi, math.atan(2) + math.pi)):
        code, out, err = run(capsys, "lift", "--lambda", "1", "--curve", curve, "--base", repr(base), "--out", tmp_path)
        assert code == 0 and err == ""
        assert abs(json.loads(out)["end"][0] - end) < 1e-12
        last = (tmp_path / "lift.csv").read_text().splitlines()[-1].split(",")
        assert abs(float(last[1]) - end) < 1e-12
    manifest = json.loads((tmp_path / "lift.manifest.json").read_text())
    assert manifest["extra"]["max_roundtrip_deviation"] < 1e-12
    assert len(next(iter(manifest["input_hashes"].values()))) == 64


def test_lift_clearance(capsys, tmp_path):
    curve = tmp_path / "bad.csv"
    _write_curve(curve, [0.5 + 1j, -0.5 + 1j])
    # the curve passes through the omitted value i
    code, _, err = run(capsys, "lift", "--lambda", "1", "--curve", curve, "--base", "0.4", "--out", tmp_path)
    assert code == 6 and "within 0" in err


def test_bounded_scan_candidate_parsing(capsys, tmp_path):
    code, out, err = run(
        capsys, "bounded-scan", "--candidates", "0.5,cf:3/4", "--coeffs", "64",
        "--rhos", "0.3,0.5,0.7", "--out", tmp_path,
    )
    assert code == 0 and err == ""
    data = json.loads(out)
    assert data["heuristic"] is True
    labels = [r[0] for r in data["ranking"]]
    assert "cf:3/4" in labels


def test_console_script_quiet_on_success(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tanlab.cli", "cf", "--quadratic", "golden", "--depth", "5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stderr == ""
    assert json.loads(proc.stdout)["quotients"] == [1] * 5
