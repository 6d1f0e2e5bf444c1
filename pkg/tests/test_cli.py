import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from muskat.cli import run_command
from muskat.io import dump_json, linear_data_to_dict
from muskat.manufactured import exact_forward, random_state
from muskat.spectral import DomainSpec

BASE = """
[domain]
d = 1
nx = 32
nz = 33

[solver]
gamma = 1.0

[forcing]
phi0 = [{mode = [1], amplitude = 0.01}]
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_tw(tmp_path):
    out = tmp_path / "r"
    assert run_command(["tw", "--config", write(tmp_path, BASE), "--out", str(out)]) == 0
    doc = json.loads((out / "tw_solution.json").read_text())
    assert doc["kind"] == "traveling_wave" and doc["steady_residual"] < 1e-9
    rows = read_csv(out / "tw_history.csv")
    assert rows[0] == ["iteration", "eta_norm", "step_norm"]
    assert len(rows) - 1 == doc["iterations"]


def test_tw_free_problem(tmp_path):
    cfg = write(tmp_path, BASE.replace("amplitude = 0.01", "amplitude = 0.0"))
    assert run_command(["tw", "solve", "--config", cfg, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "tw_solution.json").read_text())
    assert all(c == [0.0, 0.0] for c in doc["eta_star"]["coeffs"])


def test_tw_deterministic(tmp_path):
    cfg = write(tmp_path, BASE)
    run_command(["tw", "--config", cfg, "--out", str(tmp_path / "a")])
    run_command(["tw", "--config", cfg, "--out", str(tmp_path / "b")])
    for name in ("tw_solution.json", "tw_history.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_evolve(tmp_path):
    text = BASE + "\n[evolution]\nt_final = 0.5\nf0 = [{mode = [2], amplitude = 0.001}]\n"
    assert run_command(["evolve", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "evolve.csv")
    assert rows[0] == ["t", "hs_norm", "hs_half_sq_accum"]
    assert len(rows) == 12
    rep = json.loads((tmp_path / "decay_report.json").read_text())
    assert rep["monotone"] and rep["n_steps"] == 10


def test_output_formats(tmp_path):
    text = BASE + "\n[output]\nformats = ['csv']\n"
    assert run_command(["tw", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tw_history.csv").exists()
    assert not (tmp_path / "tw_solution.json").exists()


def test_linear(tmp_path):
    spec = DomainSpec(nx=32, nz=33)
    u, p, eta = random_state(spec, np.random.default_rng(0))
    dump_json(linear_data_to_dict(exact_forward(u, p, eta, 1.0), 1.0), tmp_path / "data.json")
    text = BASE + "\n[linear]\ndata = 'data.json'\ncompat_tol = 1e-4\n"
    assert run_command(["linear", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    sol = json.loads((tmp_path / "linear_solution.json").read_text())
    assert len(sol["u"]) == 2
    rows = dict(read_csv(tmp_path / "linear_residuals.csv")[1:])
    assert float(rows["momentum"]) < 1e-2


def test_linear_requires_data(tmp_path, capsys):
    assert run_command(["linear", "--config", write(tmp_path, BASE), "--out", str(tmp_path)]) == 1
    assert "linear.data" in capsys.readouterr().err


def test_dn_apply(tmp_path):
    text = BASE + "\n[dn]\neta = [{mode = [1], amplitude = 0.05}]\n"
    assert run_command(["dn", "apply", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "dn_output.json").read_text())
    assert doc["kind"] == "surface" and doc["coeffs"][0] == [0.0, 0.0]


def test_dn_selftest(tmp_path):
    assert run_command(["dn", "--selftest", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "dn_selftest.json").read_text())
    assert rep["passed"]
    assert set(rep) == {"flat", "shifted_strip", "fd_oracle", "passed"}


def test_norms(tmp_path):
    text = BASE + "\n[norms]\nfield = [{mode = [4], amplitude = 1.0}]\n"
    assert run_command(["norms", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "norms.csv")
    assert rows[0] == ["j", "block_norm", "cumulative"]
    assert float(rows[4][1]) == pytest.approx(0.5**0.5)
    assert float(rows[-1][2]) == pytest.approx(0.5**0.5)


def test_solver_failure_exit_2(tmp_path, capsys):
    text = BASE.replace("[solver]\n", "[solver]\nmax_iter = 1\n")
    assert run_command(["tw", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 2
    assert "solver failure" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["tw"],
    ["tw", "--config", "does-not-exist.toml"],
    ["bogus"],
    ["tw", "--bad-flag"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert run_command(argv) == 1
    assert capsys.readouterr().err.startswith("muskat: ")


def test_config_error_exit_1(tmp_path, capsys):
    assert run_command(["tw", "--config", write(tmp_path, BASE + "bogus = 1\n")]) == 1
    assert "forcing.bogus" in capsys.readouterr().err


def test_console_script(tmp_path):
    exe = shutil.which("muskat")
    cmd = [exe] if exe else [sys.executable, "-m", "muskat.cli"]
    res = subprocess.run(cmd + ["norms", "--config", write(tmp_path, BASE), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run(cmd + ["tw"], capture_output=True, text=True)
    assert res.returncode == 1
