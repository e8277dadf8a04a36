import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pcal import Grid, write_field
from pcal.cli import main
from pcal.harness import CSV_COLUMNS
from pcal.random_fields import random_scalar

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDEN = ROOT / "golden"


@pytest.fixture(scope="module")
def holder_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "holder"
    code = main(["run", str(CONFIGS / "holder_besov_n1.cfg"), "-o", str(out), "--set", "golden=none"])
    assert code == 0
    return out


def test_run_matching_golden_exits_zero(tmp_path, capsys):
    code = main(["run", str(CONFIGS / "taylor_green.cfg"), "-o", str(tmp_path / "tg")])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS max_error_below_1e-10" in out and "golden comparison:" in out
    for name in ("config.echo", "rows.csv", "report.json", "constants.json", "checks/exact.json", "summary.txt"):
        assert (tmp_path / "tg" / name).exists()


def test_compare_identical_and_perturbed(holder_run, tmp_path, capsys):
    assert main(["compare", str(holder_run), str(GOLDEN / "holder_besov_n1")]) == 0
    bad = tmp_path / "bad"
    shutil.copytree(GOLDEN / "holder_besov_n1", bad)
    consts = json.loads((bad / "constants.json").read_text())
    key = sorted(consts)[0]
    consts[key] *= 1.5
    (bad / "constants.json").write_text(json.dumps(consts))
    capsys.readouterr()
    assert main(["compare", str(holder_run), str(bad)]) == 1
    assert key in capsys.readouterr().out


def test_compare_exact_mismatch_and_missing_file(holder_run, tmp_path):
    bad = tmp_path / "bad"
    shutil.copytree(GOLDEN / "holder_besov_n1", bad)
    checks = json.loads((bad / "checks" / "exact.json").read_text())
    checks[sorted(checks)[0]] = False
    (bad / "checks" / "exact.json").write_text(json.dumps(checks))
    assert main(["compare", str(holder_run), str(bad)]) == 1
    (bad / "checks" / "exact.json").write_text((GOLDEN / "holder_besov_n1" / "checks" / "exact.json").read_text())
    (bad / "extra.json").write_text("{}")
    assert main(["compare", str(holder_run), str(bad)]) == 1


def test_compare_extra_run_file_only_warns(holder_run, capsys):
    # the golden holds two files; every other run file is reported as extra
    assert main(["compare", str(holder_run), str(GOLDEN / "holder_besov_n1")]) == 0
    assert "extra file in run directory" in capsys.readouterr().out


def test_run_golden_failure_exits_one(tmp_path):
    bad = tmp_path / "gold"
    shutil.copytree(GOLDEN / "taylor_green", bad)
    (bad / "checks" / "exact.json").write_text(json.dumps({"max_error_below_1e-10": False}))
    assert main(["run", str(CONFIGS / "taylor_green.cfg"), "-o", str(tmp_path / "run"), "-g", str(bad)]) == 1


def test_config_errors_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("experiment = taylor_green\ngrid.N = 100\n")
    assert main(["run", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "absent.cfg")]) == 2
    assert main(["run", str(CONFIGS / "taylor_green.cfg"), "--set", "novalue"]) == 2


def test_empty_sweep_writes_header_only(tmp_path):
    out = tmp_path / "empty"
    assert main(["run", str(CONFIGS / "pressure_sobolev.cfg"), "-o", str(out),
                 "--set", "golden=none", "--set", "sweep.seeds=0"]) == 0
    assert (out / "rows.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_runs_are_deterministic(tmp_path):
    texts = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", str(CONFIGS / "pressure_besov.cfg"), "-o", str(out), "--set", "golden=none",
                     "--set", "sweep.seeds=3", "--set", "grid.N=64"]) == 0
        texts.append(((out / "rows.csv").read_bytes(), (out / "constants.json").read_bytes()))
    assert texts[0] == texts[1]


def test_echo_reproduces_the_run(tmp_path):
    out = tmp_path / "one"
    assert main(["run", str(CONFIGS / "formula_equivalence.cfg"), "-o", str(out), "--set", "golden=none",
                 "--set", "sweep.seeds=2", "--set", "grid.N=32"]) == 0
    again = tmp_path / "two"
    assert main(["run", str(out / "config.echo"), "-o", str(again)]) == 0
    assert (out / "rows.csv").read_bytes() == (again / "rows.csv").read_bytes()


def test_list(capsys):
    assert main(["list"]) == 0
    names = {line.split()[0] for line in capsys.readouterr().out.splitlines()}
    assert {"taylor_green", "divcurl", "inflate_s1", "l1_failure"} <= names


def test_profile_dump(capsys):
    assert main(["profile-dump", "--t-max", "2", "--count", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,low_pass,annulus" and len(lines) == 6


def test_field_dump(tmp_path, capsys):
    f = random_scalar(Grid(2, 16), 3, band=4)
    write_field(tmp_path / "f.bin", f)
    assert main(["field-dump", str(tmp_path / "f.bin")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["N"] == 16 and info["dim"] == 2
    assert info["rms"] == pytest.approx(float(np.sqrt(np.mean(f.samples ** 2))))


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pcal.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "taylor_green" in proc.stdout
