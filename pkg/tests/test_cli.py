from __future__ import annotations

import dataclasses
import json
import math

import pytest

from p2psim import cli, engine
from p2psim.cli import ConfigError, SimConfig
from p2psim.engine import IterationRecord
from p2psim.payoff import IdentityRegime


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return path


# ---- parse_config --------------------------------------------------------


def test_empty_config_means_defaults(tmp_path):
    plan = cli.parse_config(write_config(tmp_path, "   \n"), "simulate")
    assert plan.base == SimConfig()
    assert plan.cells == ()
    assert plan.seeds == (0,)


def test_parse_error_reports_position(tmp_path):
    path = write_config(tmp_path, '{\n  "n": 100,,\n}')
    with pytest.raises(ConfigError) as err:
        cli.parse_config(path, "simulate")
    assert "line 2" in str(err.value)


def test_validation_error_lists_everything(tmp_path):
    path = write_config(tmp_path, {"r_ini_max0": 0.03, "r_ini_min": 0.5, "n": 1})
    with pytest.raises(ConfigError) as err:
        cli.parse_config(path, "simulate")
    msg = str(err.value)
    assert "r_ini" in msg
    assert "n:" in msg


def test_unknown_keys_rejected_with_listing(tmp_path):
    path = write_config(tmp_path, {"topologie": "regular"})
    with pytest.raises(ConfigError) as err:
        cli.parse_config(path, "simulate")
    assert "topologie" in str(err.value)
    assert "allowed" in str(err.value)


def test_growth_on_regular_topology_accepted(tmp_path):
    path = write_config(tmp_path, {"topology": "regular", "growth_percent_per_10": 2})
    plan = cli.parse_config(path, "simulate")
    assert plan.base.topology == "regular"
    assert plan.base.growth_percent_per_10 == 2


def test_seed_override_wins_over_config_and_seeds(tmp_path):
    path = write_config(tmp_path, {"seed": 5, "seeds": [1, 2, 3]})
    plan = cli.parse_config(path, "simulate", seed_override=42)
    assert plan.base.seed == 42
    assert plan.seeds == (42,)


def test_grid_cross_product_and_cell_validation(tmp_path):
    path = write_config(
        tmp_path,
        {"grid": {"growth_percent_per_10": [0, 2], "topology": ["regular", "scale_free"]}},
    )
    plan = cli.parse_config(path, "simulate")
    assert len(plan.cells) == 4
    bad = write_config(tmp_path, {"grid": {"n": [1]}}, name="bad.json")
    with pytest.raises(ConfigError):
        cli.parse_config(bad, "simulate")


def test_grid_default_is_the_reference_scenario_set(tmp_path):
    plan = cli.parse_config(write_config(tmp_path, {"grid": "default"}), "simulate")
    assert len(plan.cells) == 7
    assert sum(1 for c in plan.cells if c["topology"] == "regular") == 3


def test_payoff_sweep_defaults(tmp_path):
    plan = cli.parse_config(write_config(tmp_path, {}), "payoff-sweep")
    assert plan.mu == 0.5
    assert set(plan.regimes) == set(IdentityRegime)
    assert plan.z_over_c == 1.0


def test_payoff_sweep_rejects_x_above_one(tmp_path):
    path = write_config(tmp_path, {"x": [0.5, 1.5]})
    with pytest.raises(ConfigError) as err:
        cli.parse_config(path, "payoff-sweep")
    assert "x:" in str(err.value)


def test_payoff_sweep_finite_cost_needs_price(tmp_path):
    path = write_config(tmp_path, {"regimes": ["finite_cost"], "z_over_c": 0})
    with pytest.raises(ConfigError):
        cli.parse_config(path, "payoff-sweep")


# ---- emit_csv ------------------------------------------------------------


def test_emit_csv_header_only_for_no_records(tmp_path):
    path = tmp_path / "empty.csv"
    cli.emit_csv([], path)
    assert path.read_bytes() == (cli.CSV_HEADER + "\n").encode()


def test_emit_csv_row_count_and_lf_endings(tmp_path):
    recs = engine.run(SimConfig(n=100, iterations=20, seed=1))
    path = tmp_path / "run.csv"
    cli.emit_csv(recs, path)
    raw = path.read_bytes()
    assert raw.count(b"\n") == 21
    assert b"\r" not in raw


def test_emit_csv_round_trip_12_digits(tmp_path):
    recs = engine.run(SimConfig(n=200, iterations=30, growth_percent_per_10=2.0, seed=7))
    path = tmp_path / "run.csv"
    cli.emit_csv(recs, path)
    back = cli.read_records_csv(path)
    assert len(back) == len(recs)
    for a, b in zip(back, recs):
        for fa, fb in zip(dataclasses.astuple(a), dataclasses.astuple(b)):
            assert f"{fa:.12g}" == f"{fb:.12g}"


def test_fmt_renders_inf_and_trims_floats():
    assert cli._fmt(math.inf) == "inf"
    assert cli._fmt(0.5) == "0.5"
    assert cli._fmt(7) == "7"


# ---- main / subcommands --------------------------------------------------


def run_cli(*args):
    return cli.main([str(a) for a in args])


def test_simulate_writes_run_csv(tmp_path):
    cfg = write_config(tmp_path, {"n": 150, "iterations": 15})
    out = tmp_path / "out"
    assert run_cli("simulate", "--config", cfg, "--out", out, "--quiet") == 0
    recs = cli.read_records_csv(out / "run.csv")
    assert [r.iteration for r in recs] == list(range(1, 16))


def test_simulate_grid_writes_cells_and_summary(tmp_path):
    cfg = write_config(
        tmp_path,
        {"n": 120, "iterations": 12, "grid": {"growth_percent_per_10": [0.0, 5.0]},
         "seeds": [1, 2]},
    )
    out = tmp_path / "out"
    assert run_cli("simulate", "--config", cfg, "--out", out, "--quiet") == 0
    cells = sorted(p.name for p in out.glob("sim-*.csv"))
    assert len(cells) == 4
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "scenario,seed,final_window_whitewash_fraction,final_window_mean_offer"
    assert len(summary) == 5


def test_reruns_emit_identical_bytes(tmp_path):
    cfg = write_config(tmp_path, {"n": 150, "iterations": 20, "gossip_noise": 0.02})
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("simulate", "--config", cfg, "--out", a, "--quiet") == 0
    assert run_cli("simulate", "--config", cfg, "--out", b, "--quiet") == 0
    assert (a / "run.csv").read_bytes() == (b / "run.csv").read_bytes()


def test_config_error_is_machine_readable(tmp_path, capsys):
    cfg = write_config(tmp_path, {"n": 1})
    code = run_cli("simulate", "--config", cfg, "--out", tmp_path / "out")
    assert code == 2
    line = capsys.readouterr().err.strip()
    parsed = json.loads(line)
    assert parsed["error"] == "config"
    assert "n:" in parsed["detail"]


def test_missing_config_file_fails_cleanly(tmp_path, capsys):
    code = run_cli("simulate", "--config", tmp_path / "nope.json", "--out", tmp_path)
    assert code == 2
    assert json.loads(capsys.readouterr().err.strip())["error"] == "config"


def test_payoff_sweep_csv_marks_unbounded(tmp_path):
    cfg = write_config(tmp_path, {"x": [0.5], "r_ini": [0.03], "regimes": ["zero_cost"]})
    out = tmp_path / "out"
    assert run_cli("payoff-sweep", "--config", cfg, "--out", out, "--quiet") == 0
    lines = (out / "payoff_sweep.csv").read_text().splitlines()
    assert lines[0] == "x,r_ini,regime,mu,z_over_c,k_crossover"
    assert lines[1] == "0.5,0.03,zero_cost,0.5,0,inf"


def test_game_report_contains_span_notes(tmp_path):
    cfg = write_config(tmp_path, {"kappa": 3})
    out = tmp_path / "out"
    assert run_cli("game-report", "--config", cfg, "--out", out, "--quiet") == 0
    text = (out / "game_report.txt").read_text()
    assert "18/81" in text
    assert "20/81" in text
    csv_lines = (out / "game_report.csv").read_text().splitlines()
    assert csv_lines[0] == "span,player,expected_payoff"
    assert len(csv_lines) == 1 + 2 * 3  # spans 2 and 3, three players each


def test_fixed_point_csv_matches_module(tmp_path):
    cfg = write_config(tmp_path, {"w_max": [0.5]})
    out = tmp_path / "out"
    assert run_cli("fixed-point", "--config", cfg, "--out", out, "--quiet") == 0
    line = (out / "fixed_point.csv").read_text().splitlines()[1]
    assert line.split(",")[-1] == f"{(3 - math.sqrt(5)) / 4:.12g}"


def test_frontier_emits_curve_and_best_point(tmp_path):
    cfg = write_config(tmp_path, {})
    out = tmp_path / "out"
    assert run_cli("frontier", "--config", cfg, "--out", out, "--quiet") == 0
    best = (out / "frontier_best.csv").read_text().splitlines()
    assert best[0] == "mu,m_ratio,r_star,x_star"
    r_star = float(best[1].split(",")[2])
    assert r_star == pytest.approx(0.036, abs=0.002)
    curve = (out / "frontier.csv").read_text().splitlines()
    assert len(curve) > 100


def test_estimator_check_static_is_exact(tmp_path):
    cfg = write_config(
        tmp_path, {"topology": "regular", "n": 400, "iterations": 0, "seed": 3}
    )
    out = tmp_path / "out"
    assert run_cli("estimator-check", "--config", cfg, "--out", out, "--quiet") == 0
    row = (out / "estimator_check.csv").read_text().splitlines()[1].split(",")
    assert float(row[-1]) < 1e-9


def test_quiet_silences_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path, {"n": 100, "iterations": 5})
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "o", "--quiet") == 0
    assert capsys.readouterr().out == ""
