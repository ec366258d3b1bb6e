"""CLI exit codes and artifact emission."""

import numpy as np

from fdiscc import experiment
from fdiscc.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_VALIDATION, main


def _write(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_check_ok(tmp_path, capsys):
    path = _write(tmp_path, "scenario:\n  n_users: 2\n")
    assert main(["check", "--scenario", path, "--quiet"]) == EXIT_OK
    assert "ok: 2 users" in capsys.readouterr().out


def test_bad_scenario_file_is_validation_error(tmp_path):
    path = _write(tmp_path, "scenario:\n  bogus_field: 1\n")
    assert main(["check", "--scenario", path, "--quiet"]) == EXIT_VALIDATION
    assert main(["check", "--quiet"]) == EXIT_VALIDATION
    missing = str(tmp_path / "nope.yaml")
    assert main(["check", "--scenario", missing, "--quiet"]) == EXIT_VALIDATION


def test_infeasible_scenario_exit_code(tmp_path):
    path = _write(tmp_path, "scenario:\n  task_bits: 5.0e7\n")
    out = str(tmp_path / "out")
    assert (main(["solve", "--scenario", path, "--out", out, "--quiet"])
            == EXIT_INFEASIBLE)


def test_solve_writes_csv_and_figure(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["solve", "--out", str(out), "--quiet", "--epsilon", "1e-3"])
    assert code == EXIT_OK
    assert (out / "convergence.csv").exists()
    assert (out / "convergence.png").stat().st_size > 0
    stdout = capsys.readouterr().out
    assert "total_energy_j:" in stdout and "status: converged" in stdout


def test_sweep_requires_block_and_writes_outputs(tmp_path):
    out = tmp_path / "out"
    plain = _write(tmp_path, "scenario:\n  n_users: 2\n", "plain.yaml")
    assert (main(["sweep", "--scenario", plain, "--out", str(out), "--quiet"])
            == EXIT_VALIDATION)
    swept = _write(tmp_path, (
        "scenario:\n  n_users: 2\n"
        "options:\n  max_iters: 2\n  epsilon: 1.0e-2\n"
        "sweep:\n  axis: user_power\n  values: [0.05, 0.1]\n"
        "  schemes: [proposed, ft]\n  seeds: [0]\n"), "swept.yaml")
    assert (main(["sweep", "--scenario", swept, "--out", str(out), "--quiet"])
            == EXIT_OK)
    rows = experiment.read_csv(out / "sweep_user_power.csv")
    assert len(rows) == 4
    assert (out / "sweep_user_power.png").stat().st_size > 0


def test_bench_covers_all_schemes(tmp_path, capsys):
    out = tmp_path / "out"
    path = _write(tmp_path, (
        "scenario:\n  n_users: 2\n"
        "options:\n  max_iters: 2\n  epsilon: 1.0e-2\n  seed: 3\n"))
    assert (main(["bench", "--scenario", path, "--out", str(out), "--quiet"])
            == EXIT_OK)
    rows = experiment.read_csv(out / "bench.csv")
    schemes = {r.scheme for r in rows}
    assert schemes == {"proposed", "ft", "rt", "fc", "rc", "rb"}
    proposed = next(r for r in rows if r.scheme == "proposed")
    assert np.all([r.total_energy_j >= proposed.total_energy_j * (1 - 1e-9)
                   for r in rows])
    assert (out / "bench.png").stat().st_size > 0
