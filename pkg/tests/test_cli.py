import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import kawahara.acceptance as acceptance
from kawahara.cli import main
from kawahara.special_kernel import kernel_constants


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_meta(doc):
    return {k: v for k, v in doc.items() if k != "metadata"}


def test_kernel_eval_json(capsys):
    code, out, _ = run(capsys, "kernel", "eval", "--x", "0,2.5")
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1 and doc["kind"] == "kernel_eval"
    assert doc["value"][0] == pytest.approx(kernel_constants().B0, abs=1e-12)
    assert doc["value"][1] == pytest.approx(0.047953257580014742747, abs=1e-10)
    assert list(doc) == sorted(doc)


def test_kernel_selftest(capsys, tmp_path):
    rep = tmp_path / "selftest.json"
    code, _, _ = run(capsys, "kernel", "selftest", "--report", str(rep))
    doc = json.loads(rep.read_text())
    assert code == 0 and doc["passed"]
    assert all(c["passed"] for c in doc["checks"].values())


def test_frac_csv_round_trip(capsys, tmp_path):
    src = tmp_path / "in.csv"
    t = np.linspace(0, 1, 65)
    with src.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u"])
        w.writerows(zip(t.tolist(), t.tolist()))
    dst = tmp_path / "out.csv"
    code, _, _ = run(capsys, "frac", "--input", str(src), "--column", "u", "--alpha", "0.5", "--output", str(dst))
    assert code == 0
    rows = list(csv.reader(dst.open()))
    assert rows[0] == ["t", "u", "I_0.5[u]"]
    last = float(rows[-1][2])
    assert last == pytest.approx(4 / (3 * math.sqrt(math.pi)), abs=1e-12)


def test_frac_rejects_uneven_time(capsys, tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("t,u\n0,0\n0.1,1\n0.3,2\n")
    code, _, err = run(capsys, "frac", "--input", str(src), "--column", "u", "--alpha", "0.5")
    assert code == 2 and json.loads(err)["error"]["kind"] == "config"


def test_missing_file_exit_code(capsys, tmp_path):
    missing = tmp_path / "nope.toml"
    code, _, err = run(capsys, "solve", "--config", str(missing))
    doc = json.loads(err)
    assert code == 2 and doc["error"]["kind"] == "missing_file"
    assert doc["error"]["path"] == str(missing)


def test_bad_config_exit_code(capsys, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('side = "up"\n')
    code, _, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 2
    cfg.write_text("side = \n")
    code, _, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 2


def test_forcing_constants(capsys):
    code, out, _ = run(capsys, "forcing", "constants", "--side", "right", "--lambda", "1.0")
    doc = json.loads(out)
    assert code == 0
    text = json.dumps(doc)
    assert str(round(math.sqrt(5) - 1, 6))[:6] in text


def test_forcing_fields_csv(capsys, tmp_path):
    dst = tmp_path / "field.csv"
    code, _, _ = run(capsys, "forcing", "fields", "--side", "left", "--lambda", "-0.25", "--n", "41",
                     "--x=-1,0", "--output", str(dst))
    assert code == 0
    rows = list(csv.reader(dst.open()))
    assert len(rows) >= 42


def test_evolve_outputs(capsys, tmp_path):
    out = tmp_path / "ev"
    code, _, _ = run(capsys, "evolve", "--T", "0.01", "--dt", "1e-3", "--N", "256", "--L", "20",
                     "--snapshots", "3", "--output", str(out))
    assert code == 0
    assert (out / "snapshots.csv").exists() and (out / "snapshots.svg").exists()
    cons = json.loads((out / "conservation.json").read_text())
    assert cons["schema_version"] == 1


SOLVE_TOML = """\
side = "right"
T = 1.0
n = 401
N = 1024
output = "{out}"
[data]
profile = "gaussian"
center = -3.0
width = 0.35
"""


def test_solve_manufactured_right(capsys, tmp_path):
    cfg = tmp_path / "solve.toml"
    cfg.write_text(SOLVE_TOML.format(out=tmp_path / "run"))
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["relative_error"] <= 1e-3
    diag = json.loads((tmp_path / "run" / "diagnostics.json").read_text())
    assert diag["solver"]["periodic_wrap_error"] <= 1e-3
    for name in doc["files"]:
        assert (tmp_path / "run" / name).exists()


def test_probe_blocks_csv_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "probe", "blocks", "--samples", "24", "--output", str(a), "--jobs", "2")[0] == 0
    assert run(capsys, "probe", "blocks", "--samples", "24", "--output", str(b), "--jobs", "1")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    header = next(csv.reader(a.open()))
    assert header == ["part", "regressor", "fitted", "claimed"]


def test_probe_bilinear_json_is_deterministic(capsys, tmp_path):
    docs = []
    for jobs in ("1", "2"):
        path = tmp_path / f"p{jobs}.json"
        code, _, _ = run(capsys, "probe", "bilinear", "--samples", "3", "--lemma-samples", "4",
                         "--jobs", jobs, "--output", str(path))
        assert code == 0
        docs.append(strip_meta(json.loads(path.read_text())))
    assert docs[0] == docs[1]


def test_verify_quick_subset(capsys, tmp_path):
    rep = tmp_path / "v.json"
    code, _, err = run(capsys, "verify", "quick", "--only", "1,2", "--report", str(rep))
    assert code == 0
    assert "criterion  1 PASS" in err and "criterion  2 PASS" in err
    doc = json.loads(rep.read_text())
    assert doc["passed"] and [c["number"] for c in doc["criteria"]] == [1, 2]


def test_verify_fails_on_corrupted_constant(capsys, monkeypatch):
    # negative control: a wrong B(0) must be caught and reported with exit code 1
    good = kernel_constants()

    class Bad:
        def __getattr__(self, name):
            return getattr(good, name)

        B0 = good.B0 * (1 + 1e-6)

    monkeypatch.setattr(acceptance, "kernel_constants", lambda: Bad())
    code, _, err = run(capsys, "verify", "quick", "--only", "1")
    assert code == 1
    assert "FAIL" in err


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "kawahara.cli", "kernel", "eval", "--x", "0"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"][0] == pytest.approx(kernel_constants().B0)
