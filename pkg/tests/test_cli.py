import json
import math
from pathlib import Path

import numpy as np
import pytest

from qbatt import cli, experiments
from qbatt.collision import _ladder, generator
from qbatt.config import ExperimentConfig
from qbatt.validation import check_generator, run_checks

ROOT = Path(__file__).resolve().parents[1]
SMOKE = ROOT / "configs" / "smoke.cfg"


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


@pytest.fixture(scope="module")
def smoke_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("smoke")
    for cmd in experiments.COMMANDS:
        assert cli.main([cmd, "--config", str(SMOKE), "--out", str(base / cmd), "--threads", "1"]) == 0
    return base


def test_every_command_writes_manifest(smoke_runs):
    for cmd in experiments.COMMANDS:
        out = smoke_runs / cmd
        manifest = json.loads((out / "manifest.json").read_text())
        csvs = sorted(p.name for p in out.glob("*.csv"))
        assert sorted(manifest["csv_files"]) == csvs
        assert len(set(manifest["csv_files"])) == len(manifest["csv_files"])
        assert manifest["config"]["N"] == 40
        assert manifest["version"]
        assert manifest["seed"] == manifest["config"]["seed"]


def test_csv_header_and_hash(smoke_runs):
    cfg = ExperimentConfig.load(SMOKE)
    for path in smoke_runs.glob("*/*.csv"):
        first = path.read_text().splitlines()[0]
        assert f"config_hash={cfg.hash()}" in first


def test_distribution_columns_and_delta(smoke_runs):
    header, rows = read_csv(smoke_runs / "distribution" / "distribution.csv")
    assert header == ["k", "n", "P_inc", "P_coh", "mean_inc_pred", "n_plus_pred", "n_minus_pred"]
    k0 = [r for r in rows if r[0] == "0"]
    assert [float(r[2]) for r in k0] == [1.0 if r[1] == "10" else 0.0 for r in k0]
    for k in ("5", "10"):
        assert sum(float(r[3]) for r in rows if r[0] == k) == pytest.approx(1.0, abs=1e-12)


def test_energy_ergotropy_columns(smoke_runs):
    header, rows = read_csv(smoke_runs / "energy-ergotropy" / "energy_ergotropy.csv")
    assert header[:2] == ["q", "k"] and "dephased_ergotropy_coh" in header
    for r in rows:
        d = dict(zip(header, r))
        assert float(d["ergotropy_coh"]) <= float(d["energy_coh"]) + 1e-9
        assert float(d["ergotropy_inc"]) <= float(d["energy_inc"]) + 1e-9


def test_efficiency_sentinel(smoke_runs):
    header, rows = read_csv(smoke_runs / "efficiency-map" / "efficiency_map.csv")
    undefined = [r for r in rows if r[3] == "undefined"]
    assert undefined and all(r[0] == "0" and r[1] == "0.5" for r in undefined)
    assert max(float(r[3]) for r in rows if r[3] != "undefined") <= 1 + 1e-9


def test_free_energy_matrices(smoke_runs):
    out = smoke_runs / "free-energy-ratio"
    _, c1 = read_csv(out / "free_energy_ratio_c1.csv")
    _, c0 = read_csv(out / "free_energy_ratio_c0.csv")
    _, diff = read_csv(out / "free_energy_ratio_diff.csv")
    for a, b, d in zip(c1, c0, diff):
        for x, y, z in zip(a[1:], b[1:], d[1:]):
            assert float(x) <= 1 + 1e-12 and float(y) <= 1 + 1e-12
            assert float(z) == pytest.approx(float(x) - float(y), abs=1e-15)


def test_outputs_are_byte_identical(tmp_path, smoke_runs):
    for cmd in ("distribution", "efficiency-map", "power-scan"):
        assert cli.main([cmd, "--config", str(SMOKE), "--out", str(tmp_path / cmd), "--threads", "2"]) == 0
        for path in (smoke_runs / cmd).glob("*.csv"):
            assert (tmp_path / cmd / path.name).read_bytes() == path.read_bytes()


def test_out_dir_precedence(tmp_path, monkeypatch):
    cfg = ExperimentConfig(output_dir="from_cfg")
    monkeypatch.setenv("QBATT_OUT", str(tmp_path / "env"))
    assert cli.resolve_out_dir("cli", cfg) == Path("cli")
    assert cli.resolve_out_dir(None, cfg) == Path("from_cfg")
    assert cli.resolve_out_dir(None, ExperimentConfig()) == tmp_path / "env"
    monkeypatch.delenv("QBATT_OUT")
    assert cli.resolve_out_dir(None, ExperimentConfig()) == Path("qbatt-out")


def test_env_fallback_end_to_end(tmp_path, monkeypatch):
    monkeypatch.setenv("QBATT_OUT", str(tmp_path / "envout"))
    assert cli.main(["free-energy-ratio", "--config", str(SMOKE), "--threads", "1"]) == 0
    assert (tmp_path / "envout" / "manifest.json").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("q = 3\n")
    assert cli.main(["distribution", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert cli.main(["distribution", "--config", str(tmp_path / "missing.cfg")]) == 2
    with pytest.raises(SystemExit):
        cli.main(["nonsense", "--config", str(bad)])


def flipped_drive_generator(rho, qubit, cfg):
    """Mutant: the sign of the coherent driving commutator is reversed."""
    N = rho.shape[0] - 1
    A = _ladder(N)
    phase = complex(math.cos(qubit.alpha), math.sin(qubit.alpha))
    h = math.sqrt(qubit.q * (1 - qubit.q)) * math.sin(cfg.theta) * math.cos(cfg.theta) * (A * phase.conjugate() + A.conj().T * phase)
    return generator(rho, qubit, cfg) + 2j * qubit.c * (h @ rho - rho @ h)


def test_validate_passes_and_writes_manifest(tmp_path, capsys):
    assert cli.main(["validate", "--config", str(SMOKE), "--out", str(tmp_path)]) == 0
    table = capsys.readouterr().out
    assert "generator_vs_exact_map" in table and "FAIL" not in table
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["all_checks_passed"] and manifest["csv_files"] == []
    assert len(manifest["checks"]) == 10


def test_mutation_is_caught(tmp_path, capsys):
    cfg = ExperimentConfig.load(SMOKE)
    assert not check_generator(cfg, flipped_drive_generator).passed
    assert cli.run("validate", cfg, tmp_path, 1, generator_fn=flipped_drive_generator) == 1
    assert "FAIL" in capsys.readouterr().out


def test_tolerance_override():
    cfg = ExperimentConfig.load(SMOKE)
    assert check_generator(cfg).passed
    strict = cfg.replace(tol_generator=1e-18)
    assert not check_generator(strict).passed
    loose = cfg.replace(tol_generator=1.0)
    assert check_generator(loose, flipped_drive_generator).passed


def test_check_table_names_unique():
    results = run_checks(ExperimentConfig.load(SMOKE))
    names = [r.name for r in results]
    assert len(names) == len(set(names))
