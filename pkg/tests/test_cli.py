from __future__ import annotations

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from rmtlab.cli import UsageError, main, parse_args, parse_grid
from rmtlab.compiler import read_circuit
from rmtlab.ensembles import EnsembleSpec, Kind
from rmtlab.linalg import read_matrix, write_matrix


def run_cli(*args) -> int:
    return main([str(a) for a in args])


def files_bytes(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if p.is_file()}


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.1,0.2") == [0.1, 0.2]
    assert parse_grid("3") == [3.0]
    for bad in ("0:1", "0:1:0", "a,b", "", "1:0:0.5"):
        with pytest.raises(Exception):
            parse_grid(bad)


def test_usage_errors_exit_2(tmp_path, capsys):
    assert run_cli("escape", "--d", "4") == 2  # missing --eps/--t
    assert run_cli("nonsense") == 2
    assert run_cli("escape", "--d", "0", "--eps", "0.1", "--t", "0,1") == 2
    assert run_cli("escape", "--d", "4", "--eps", "-1", "--t", "0,1") == 2
    assert run_cli("complexity", "--d", "8", "--eps", "0.1", "--t", "0") == 2
    assert run_cli("form-factor", "--ensemble", "diag-gaussian", "--d", "4", "--sigma2", "0.5", "--t", "1") == 2
    err = capsys.readouterr().err
    assert "usage error" in err


def test_escape_bit_identical_and_jobs_invariant(tmp_path, monkeypatch):
    args = ["escape", "--d", "6", "--eps", "0.3", "--t", "0:0.2:0.05", "--samples", "120", "--seed", "5"]
    # identical invocations (relative --out) in two working directories
    for sub in ("a", "b"):
        (tmp_path / sub).mkdir()
        monkeypatch.chdir(tmp_path / sub)
        assert run_cli(*args, "--out", "run", "--jobs", "1") == 0
    monkeypatch.chdir(tmp_path)
    assert files_bytes(tmp_path / "a" / "run") == files_bytes(tmp_path / "b" / "run")
    assert run_cli(*args, "--out", tmp_path / "c", "--jobs", "3") == 0
    body = lambda p: [l for l in (p / "escape.csv").read_text().splitlines() if not l.startswith("#")]
    assert body(tmp_path / "a" / "run") == body(tmp_path / "c")
    text = (tmp_path / "a" / "run" / "escape.csv").read_text()
    assert text.startswith("# rmtlab 0.1.0\n# invocation: rmtlab escape")
    assert "# seed: 5\n" in text
    man = json.loads((tmp_path / "a" / "run" / "manifest.json").read_text())
    assert man["status"] == "ok" and man["seed"] == 5 and man["files"] == ["escape.csv"]


def test_seed_env_and_flag_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("RMTLAB_SEED", "17")
    assert parse_args(["escape", "--d", "4", "--eps", "0.1", "--t", "0"]).seed == 17
    assert parse_args(["escape", "--d", "4", "--eps", "0.1", "--t", "0", "--seed", "3"]).seed == 3
    monkeypatch.setenv("RMTLAB_SEED", "x")
    assert run_cli("escape", "--d", "4", "--eps", "0.1", "--t", "0") == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 4, "eps": 0.2, "t": "0,0.1", "samples": 150, "ensemble": "diag-gaussian"}))
    rc = parse_args(["escape", "--config", str(cfg)])
    assert rc.d == 4 and rc.eps == 0.2 and rc.t == [0.0, 0.1] and rc.spec.kind is Kind.DIAG_GAUSSIAN
    rc = parse_args(["escape", "--config", str(cfg), "--d", "8"])
    assert rc.d == 8 and rc.samples == 150
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 3}))
    with pytest.raises(UsageError):
        parse_args(["escape", "--config", str(bad)])
    assert run_cli("escape", "--config", tmp_path / "missing.json") == 2
    assert run_cli("escape", "--config", cfg, "--out", tmp_path / "o") == 0


def test_sample_round_trip(tmp_path):
    assert run_cli("sample", "--d", "3", "--count", "2", "--seed", "9", "--out", tmp_path) == 0
    h = read_matrix(tmp_path / "h_0001.cmpx")
    assert np.allclose(h, h.conj().T)
    assert EnsembleSpec.from_text((tmp_path / "ensemble.txt").read_text()) == EnsembleSpec.gue(3, seed=9)


def test_variance_check_and_form_factor(tmp_path):
    assert run_cli("variance-check", "--ensemble", "diag-gaussian", "--d", "8", "--t", "0.5,1", "--samples", "400",
                   "--out", tmp_path) == 0
    assert (tmp_path / "variance_check.csv").exists()
    assert run_cli("form-factor", "--d", "8", "--t", "0:2:0.5", "--samples", "20", "--out", tmp_path / "f") == 0


def test_concentration_commands(tmp_path):
    assert run_cli("torus-distance", "--d", "8", "--samples", "100", "--out", tmp_path / "t") == 0
    assert run_cli("concentration", "--d", "8", "--samples", "200", "--pairs", "100", "--gate-kind", "flip",
                   "--out", tmp_path / "c") == 0
    assert run_cli("gauss-average", "--beta", "0.5,1", "--out", tmp_path / "g") == 0
    man = json.loads((tmp_path / "g" / "manifest.json").read_text())
    assert man["summary"]["beta0"] > 0
    assert run_cli("gauss-average", "--beta", "0,1", "--out", tmp_path / "g2") == 2


def test_complexity_and_jump_figure(tmp_path):
    assert run_cli("complexity", "--d", "2", "--eps", "0.3", "--t", "0,2", "--samples", "5", "--max-len", "5",
                   "--out", tmp_path / "c") == 0
    lines = (tmp_path / "c" / "complexity.csv").read_text().splitlines()
    assert lines[3] == "sample,t,complexity" and lines[4] == "0,0.0,0"
    assert run_cli("complexity", "--d", "3", "--eps", "0.3", "--t", "0", "--out", tmp_path / "c3") == 2
    assert run_cli("jump-figure", "--d", "2", "--eps", "0.3", "--t", "0,1", "--samples", "100", "--max-len", "4",
                   "--out", tmp_path / "j") == 0
    assert {"escape.csv", "complexity.csv", "balls.csv", "manifest.txt", "manifest.json"} <= set(files_bytes(tmp_path / "j"))


def _write_diag(path, n, seed=0):
    h = np.diag(np.random.default_rng(seed).standard_normal(1 << n)).astype(complex)
    write_matrix(h, path)
    return h


def test_compile_and_verify(tmp_path, capsys):
    _write_diag(tmp_path / "h.cmpx", 3)
    assert run_cli("compile", "--n", "3", "--t", "1.5", "--eps", "0.01", "--hamiltonian", tmp_path / "h.cmpx",
                   "--out", tmp_path) == 0
    assert "verify_circuit" in capsys.readouterr().out
    c = read_circuit(tmp_path / "circuit.txt")
    assert c.n == 3 and len(c) == 3 * 8 - 8 + 1
    args = ["verify-circuit", "--circuit", tmp_path / "circuit.txt", "--n", "3", "--t", "1.5",
            "--hamiltonian", tmp_path / "h.cmpx", "--out", tmp_path / "v"]
    assert run_cli(*args, "--eps", "0.01") == 0
    assert run_cli(*args, "--eps", "1e-12") == 1


def test_corrupted_circuit_exits_1(tmp_path, capsys):
    _write_diag(tmp_path / "h.cmpx", 2)
    assert run_cli("compile", "--n", "2", "--t", "1", "--eps", "0.05", "--hamiltonian", tmp_path / "h.cmpx",
                   "--out", tmp_path) == 0
    lines = (tmp_path / "circuit.txt").read_text().splitlines()
    idx = next(i for i, l in enumerate(lines) if l.startswith("CNOT"))
    (tmp_path / "bad.txt").write_text("\n".join(lines[:idx] + lines[idx + 1:]) + "\n")  # unbalanced conjugator
    capsys.readouterr()
    rc = run_cli("verify-circuit", "--circuit", tmp_path / "bad.txt", "--n", "2", "--t", "1",
                 "--hamiltonian", tmp_path / "h.cmpx", "--out", tmp_path / "v")
    assert rc == 1
    assert "verify_circuit" in capsys.readouterr().err
    man = json.loads((tmp_path / "v" / "manifest.json").read_text())
    assert man["status"] == "failed"
    (tmp_path / "junk.txt").write_text("QUBITS 2\nTOFFOLI 0 1\n")
    assert run_cli("verify-circuit", "--circuit", tmp_path / "junk.txt", "--n", "2", "--t", "1",
                   "--hamiltonian", tmp_path / "h.cmpx", "--out", tmp_path / "v2") == 1


def test_bad_inputs_exit_2(tmp_path):
    (tmp_path / "h.cmpx").write_bytes(b"CMPX\x01\x02")
    assert run_cli("compile", "--n", "1", "--t", "1", "--eps", "0.1", "--hamiltonian", tmp_path / "h.cmpx",
                   "--out", tmp_path) == 2
    write_matrix(np.ones((2, 2)), tmp_path / "full.cmpx")
    assert run_cli("compile", "--n", "1", "--t", "1", "--eps", "0.1", "--hamiltonian", tmp_path / "full.cmpx",
                   "--out", tmp_path) == 2
    assert run_cli("compile", "--n", "1", "--t", "1", "--eps", "0.1", "--hamiltonian", tmp_path / "none.cmpx",
                   "--out", tmp_path) == 2


def test_equidist(tmp_path):
    assert run_cli("equidist", "--d", "1", "--t", "1", "--eps", "0.1,0.2,0.4", "--samples", "20000",
                   "--out", tmp_path) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["summary"]["loglog_slope"][0] == pytest.approx(1.0, abs=0.15)


@pytest.mark.skipif(shutil.which("rmtlab") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["rmtlab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "rmtlab 0.1.0" in out.stdout
    out = subprocess.run([sys.executable, "-m", "rmtlab.cli", "escape"], capture_output=True, text=True)
    assert out.returncode == 2
