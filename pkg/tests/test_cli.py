import argparse
import csv
import io
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from rvflow import cli


def run(*argv):
    return cli.run_capture(list(argv))


@pytest.mark.parametrize("text,expected", [
    ("0.3+0.2i", 0.3 + 0.2j), ("1-i", 1 - 1j), ("-2.5", -2.5), ("3i", 3j), ("-i", -1j),
    ("1e-3+2e-1i", 0.001 + 0.2j), ("+1.5-0.25i", 1.5 - 0.25j), ("i", 1j),
])
def test_parse_complex(text, expected):
    assert cli.parse_complex(text) == expected


@pytest.mark.parametrize("text", ["", "0.3 + 0.2i", "1+2j", "abc", "1+2", "i1", "2i3"])
def test_parse_complex_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_complex(text)


def test_format_complex_round_trip():
    for z in (0.3 + 0.2j, 1 - 1j, -2.5 + 0j, 1 / 3 - 2j / 7):
        assert cli.parse_complex(cli.format_complex(z)) == z


def test_geom_poincare_plain():
    code, out, err = run("geom", "poincare", "--t", "1", "--r", "0")
    assert code == 0
    assert float(out) == pytest.approx(1 / math.tanh(1), rel=1e-15)
    assert out.startswith("1.3130")
    assert err.startswith("# config ")
    cfg = json.loads(err[len("# config "):])
    assert cfg["t"] == 1.0 and cfg["tail_tol"] == 1e-16


def test_geom_json():
    code, out, _ = run("geom", "lambert", "--d1", "1", "--format", "json")
    d = json.loads(out)
    assert code == 0 and set(d) == {"value", "inputs", "formula_id"}
    assert d["value"] == pytest.approx(math.asinh(1 / math.sinh(1)))


@pytest.mark.parametrize("verb", sorted(cli._GEOM))
def test_every_geom_verb_runs(verb):
    values = {"--R": "3", "--re-l": "0.1", "--epsilon": "0.5", "--r": "0.5", "--d": "1", "--d1": "1",
              "--ell-u": "1", "--t": "1", "--n": "2", "--N": "2", "--D": "0.5", "--P": "1.5",
              "--chi": "2", "--eps": "1", "--delta": "0.5", "--A": "1", "--B": "1"}
    opts, _, _ = cli._GEOM[verb]
    argv = ["geom", verb]
    for flag, default, _ in opts:
        if default is None:
            argv += [flag, values[flag]]
    code, out, err = run(*argv)
    assert code == 0, err
    assert math.isfinite(float(out))


def test_flow_csv():
    code, out, _ = run("flow", "--z0", "0.3+0.2i", "--target", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["t", "re", "im"]
    t, re, im = map(float, rows[-1])
    assert abs(complex(re, im) - 1) < 1e-6


def test_flow_with_noise_and_file(tmp_path):
    path = tmp_path / "traj.csv"
    code, out, _ = run("flow", "--z0", "1.2+0.1i", "--noise-amplitude", "1", "--seed", "3",
                       "--t-max", "30", "--out", str(path))
    assert code == 0
    assert json.loads(out)["written"] == str(path)
    assert path.read_text().startswith("t,re,im\n")


def test_output_is_byte_identical():
    for argv in (["flow", "--z0", "0.3+0.2i", "--target", "1"],
                 ["pair", "strip", "--c", "1.3+0.4i", "--s", "1"],
                 ["schwarzian", "univalent", "--c", "2.5", "--n-samples", "500", "--seed", "9"]):
        assert run(*argv) == run(*argv)


@pytest.mark.parametrize("argv", [
    ["flow", "--z0", "0.3 + 0.2i"],
    ["flow"],
    ["nonsense"],
    ["geom", "poincare", "--t", "abc"],
    ["pair", "strip"],
    ["converge", "ahlfors-weill", "--k", "0.5"],
    ["geom", "shadow-distance", "--R", "1", "--ell-u", "0"],
    ["verify", "no_such_suite"],
])
def test_usage_errors_exit_2(argv):
    code, out, err = run(*argv)
    assert code == 2 and out == "" and err.strip()


def test_fixed_points_json():
    code, out, _ = run("fixed-points")
    d = json.loads(out)
    assert code == 0
    assert [p["location"]["re"] for p in d["fixed_points"]] == [-1, 0, 1, 2]
    assert {p["class"] for p in d["fixed_points"]} == {"SADDLE", "UNSTABLE", "STABLE"}


def test_portrait_files(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run("portrait", "--re-min", "0", "--re-max", "2", "--im-min", "0", "--im-max", "2",
                       "--nx", "5", "--ny", "5")
    assert code == 0
    paths = json.loads(out)
    ET.parse(paths["svg"])
    rows = list(csv.DictReader(open(paths["csv"])))
    assert len(rows) == 25
    for row in rows:
        z = complex(float(row["re"]), float(row["im"]))
        if abs(z - 1) < 0.9:
            assert row["label"] == "1"


def test_portrait_degenerate_grid(tmp_path):
    code, out, _ = run("portrait", "--nx", "1", "--ny", "1", "--re-min", "1.1", "--re-max", "1.3",
                       "--im-min", "0", "--im-max", "0.2", "--out-dir", str(tmp_path), "--name", "one")
    assert code == 0
    assert (tmp_path / "one.svg").read_text().count("<line") == 1
    assert (tmp_path / "one.csv").read_text().splitlines() == ["re,im,label", "1.2000000000000002,0.10000000000000001,1"]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nt_max = 2\nmethod=rk4\n")
    code, out, err = run("--config", str(cfg), "flow", "--z0", "0.5")
    resolved = json.loads(err[len("# config "):])
    assert code == 0 and resolved["t_max"] == 2.0 and resolved["method"] == "rk4"
    assert float(out.splitlines()[-1].split(",")[0]) == pytest.approx(2.0)
    code, _, err = run("--config", str(cfg), "flow", "--z0", "0.5", "--t-max", "1")
    assert json.loads(err[len("# config "):])["t_max"] == 1.0


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key=1\n")
    assert run("--config", str(bad), "flow", "--z0", "0.5")[0] == 2
    bad.write_text("t_max=abc\n")
    assert run("--config", str(bad), "flow", "--z0", "0.5")[0] == 2
    assert run("--config", str(tmp_path / "missing.cfg"), "flow", "--z0", "0.5")[0] == 2


def test_schwarzian_verbs():
    code, out, _ = run("schwarzian", "closed-form", "--c", "2")
    assert json.loads(out)["C"] == {"re": -1.5, "im": 0.0}
    code, out, _ = run("schwarzian", "univalent", "--c", "2.5", "--n-samples", "2000")
    d = json.loads(out)
    assert d["disk"] is d["strip"] is d["empirical"] is False
    code, out, _ = run("schwarzian", "mobius-check", "--c", "1.2", "--mobius", "0,1,1,3", "--z", "i")
    assert json.loads(out)["defect"] < 1e-5
    code, out, _ = run("schwarzian", "numeric", "--c", "0", "--z", "i")
    assert json.loads(out)["S"]["re"] == pytest.approx(-0.5, rel=1e-6)
    code, out, _ = run("schwarzian", "s-invariance", "--coef", "0.5", "--s", "2", "--z", "1+i")
    assert json.loads(out)["defect"] < 1e-15
    assert run("schwarzian", "numeric", "--c", "1", "--z", "-i")[0] == 2


def test_pair_verbs():
    assert json.loads(run("pair", "f-ell", "--c", "2")[1]) == {"F_ell": 1.5}
    assert json.loads(run("pair", "f-l", "--c", "i")[1])["F_L"] == {"re": 0.0, "im": -0.5}
    assert json.loads(run("pair", "dc", "--c", "1+i")[1])["dc"]["re"] == pytest.approx(1.5)
    assert json.loads(run("pair", "bers", "--ell", "1", "--L", "2.1")[1])["satisfies"] is False
    assert json.loads(run("pair", "aux", "--eta", "0.5", "--re-l", "0.2")[1])["bound"] == pytest.approx(0.1)
    d = json.loads(run("pair", "pullback", "--c", "1.3+0.2i", "--s", "0.5")[1])
    assert set(d) == {"value_re", "value_im", "est_error", "n_evals"}


def test_converge_certificates():
    for argv in (["converge", "ahlfors-weill", "--k", "0.25"],
                 ["converge", "tail", "--d", "0.3", "--c", "0.5"],
                 ["converge", "wolpert", "--l2-norm", "0.1", "--contraction", "0.5"],
                 ["converge", "banach", "--factor", "0.4", "--center", "1", "--x0", "1.9"]):
        code, out, _ = run(*argv)
        d = json.loads(out)
        assert code == 0 and set(d) == {"bound", "inputs", "formula_id"}
    d = json.loads(run("converge", "ahlfors-weill", "--k", "0.25")[1])
    assert d["bound"] == pytest.approx(0.5 * math.log(3), abs=1e-14)
    d = json.loads(run("converge", "wolpert", "--l2-norm", "0.7", "--contraction", "0.5")[1])
    assert d["bound"] is None


def test_verify_single_suite():
    code, out, _ = run("verify", "convergence_bounds", "--seed", "42")
    d = json.loads(out)
    assert code == 0 and d["suite"] == "convergence_bounds" and d["n_failed"] == 0 and d["seed"] == 42


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rvflow.cli", "geom", "poincare", "--t", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("1.3130")


def test_help_exits_zero():
    assert run("--help")[0] == 0
