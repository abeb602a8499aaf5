import csv
import textwrap

import pytest

from smagdamp.cli import main
from smagdamp.exceptions import ConfigError
from smagdamp.experiments import (
    POINT_COLUMNS,
    ExperimentConfig,
    SolverConfig,
    build_problem,
    parse_config,
    run_experiment,
    run_point,
)


def cfg_text(body):
    return textwrap.dedent(body).lstrip()


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


# ----------------------------------------------------------------------------
# parsing
# ----------------------------------------------------------------------------

def test_parse_full_config():
    cfg = parse_config(cfg_text("""
        [run]
        mode = sweep
        [domain]
        nu = 0.02   # Re = 50
        c_s = 0.2
        [grid]
        nx = 4
        ny = 4
        nz = 8
        [profile]
        kind = beta_d
        alpha = 3
        [solver]
        end_time = 0.5
        deterministic_reduction = yes
        max_steps = 10
        [sweep]
        re = 50, 100
        profile = constant, hermite
        [output]
        directory = results
    """))
    assert cfg.mode == "sweep" and cfg.re == pytest.approx(50.0)
    assert cfg.solver.end_time == 0.5 and cfg.solver.deterministic_reduction and cfg.solver.max_steps == 10
    assert cfg.sweep_re == (50.0, 100.0)
    assert len(cfg.points()) == 4
    assert str(cfg.out) == "results"


@pytest.mark.parametrize("body,line", [
    ("[domain]\nre = 10\n\n[grid]\nnx = four\n", 5),
    ("[domain]\nre = 10\n[bogus]\nx = 1\n", 3),
    ("[domain]\nre = 10\nspeed = 3\n", 3),
    ("re = 10\n", 1),
    ("[domain]\nre = 10\nre = 20\n", 3),
    ("[run]\nmode = fly\n", 2),
    ("[domain]\nre = 10\nnu = 0.1\n", 3),
    ("[run]\nmode = sweep\n", 2),
    ("[solver]\ncfl_number = 2\n", 1),
    ("[sweep]\nprofile = hermite, wobbly\n", 2),
])
def test_config_errors_carry_line_numbers(body, line):
    with pytest.raises(ConfigError) as info:
        parse_config(body)
    assert info.value.lineno == line
    assert str(info.value).startswith(f"line {line}:")


def test_delta_defaults_to_largest_cell():
    cfg = ExperimentConfig(nx=8, ny=16, nz=32)
    d, g = build_problem(cfg)
    assert d.delta == pytest.approx(1 / 8)
    d2, _ = build_problem(cfg, delta=0.05)
    assert d2.delta == 0.05


# ----------------------------------------------------------------------------
# modes
# ----------------------------------------------------------------------------

def test_bounds_mode_two_rows(tmp_path):
    cfg = parse_config(cfg_text(f"""
        [run]
        mode = bounds
        [domain]
        delta = 0.05
        [profile]
        kind = beta_w
        alpha = 2
        [sweep]
        re = 100, 1000
        [output]
        directory = {tmp_path}
    """))
    run_experiment(cfg)
    rows = read_csv(tmp_path / "bounds.csv")
    assert len(rows) == 2
    assert float(rows[1]["model_term"]) / float(rows[0]["model_term"]) == pytest.approx(100.0, rel=1e-12)
    slopes = read_csv(tmp_path / "slopes.csv")
    assert all(float(r["slope"]) == pytest.approx(2.0, abs=1e-9) for r in slopes)


def test_damping_table_mode(tmp_path):
    cfg = ExperimentConfig(mode="damping-table", profile="beta_d", alpha=2, out=tmp_path, re=100.0, delta=0.1)
    run_experiment(cfg)
    rows = read_csv(tmp_path / "damping_table.csv")
    assert len(rows) == 1001
    col = "hermite(alpha=2)"
    assert float(rows[0][col]) == 0.0 and float(rows[-1][col]) == 0.0 and float(rows[500][col]) == 1.0


def test_run_mode_couette(tmp_path):
    cfg = ExperimentConfig(mode="run", re=100.0, delta=0.5, c_s=0.2, nx=4, ny=4, nz=8, out=tmp_path,
                           solver=SolverConfig(end_time=0.02))
    art = run_experiment(cfg)
    assert art.ok
    row = read_csv(tmp_path / "summary.csv")[0]
    assert float(row["measured_avg"]) == pytest.approx(0.02, rel=1e-6)
    assert row["strip_resolved"] == "false" and row["within_bound"] == ""
    assert (tmp_path / "checkpoint.smdl").exists()
    assert read_csv(tmp_path / "dissipation.csv")[0].keys() >= {"time", "ke", "running_avg"}


def test_sweep_keeps_completed_rows_when_a_point_fails(tmp_path):
    # delta = 2 is rejected for L = 1; the other point runs
    cfg = ExperimentConfig(mode="sweep", nx=4, ny=4, nz=8, out=tmp_path, sweep_delta=(0.25, 2.0),
                           solver=SolverConfig(end_time=0.01))
    art = run_experiment(cfg)
    rows = read_csv(tmp_path / "sweep.csv")
    assert [r["status"] for r in rows] == ["ok", "failed"]
    assert "delta" in rows[1]["error"]
    assert not art.ok


def test_run_point_flags_unresolved_grids():
    cfg = ExperimentConfig(nx=4, ny=4, nz=8, solver=SolverConfig(end_time=0.01))
    row = run_point(cfg, 100.0, None, 2, "hermite", 8)
    assert set(row) == set(POINT_COLUMNS)
    assert row["strip_resolved"] is False and row["within_bound"] == ""


# ----------------------------------------------------------------------------
# command line
# ----------------------------------------------------------------------------

def test_cli_verify_passes(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "verify.csv")
    assert rows and all(r["passed"] == "PASS" for r in rows)
    assert "FAIL" not in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[grid]\nnz = many\n")
    assert main(["run", "--config", str(path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_missing_config_is_config_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.ini")]) == 2


def test_cli_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        main(["dance"])
    assert info.value.code == 2


def test_cli_seed_and_deterministic_flags(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(cfg_text("""
        [grid]
        nx = 4
        ny = 4
        nz = 8
        [solver]
        end_time = 0.01
        initial_condition = couette_plus_perturbation
    """))
    outs = []
    for seed in (1, 1, 2):
        out = tmp_path / f"o{len(outs)}"
        assert main(["run", "--config", str(path), "--out", str(out), "--seed", str(seed), "--deterministic"]) == 0
        outs.append((out / "dissipation.csv").read_bytes())
    assert outs[0] == outs[1] != outs[2]


def test_cli_rejects_negative_seed(tmp_path):
    with pytest.raises(SystemExit):
        main(["run", "--seed", "-1", "--out", str(tmp_path)])
