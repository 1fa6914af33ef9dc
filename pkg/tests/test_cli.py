import json

import numpy as np
import pytest

from evswitch.calibration import calibrate, read_price_csv
from evswitch.cli import main, parse_grid
from evswitch.config import DEFAULTS, build_config, load_config
from evswitch.errors import ConfigError
from evswitch.mc import McConfig, expected_switch_time
from evswitch.sensitivity import Param, dxstar
from evswitch.solver import solve, v_hat, value_total

from paramgen import LOMBARDY_COST, LOMBARDY_OU


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_defaults_are_the_lombardy_scenario():
    cfg = build_config()
    assert cfg.cost == LOMBARDY_COST
    assert cfg.ou.mean_level == pytest.approx(LOMBARDY_OU.mean_level, rel=1e-15)
    assert (cfg.ou.b, cfg.ou.sigma) == (LOMBARDY_OU.b, LOMBARDY_OU.sigma)
    assert cfg.mc == McConfig()


def test_solve_default(capsys):
    doc = run_json(capsys, "solve")
    sol = solve(LOMBARDY_COST, LOMBARDY_OU)
    assert doc["case"] == "interior"
    assert doc["x_star"] == sol.x_star
    assert doc["x_hat"] == pytest.approx(-0.011733333, abs=1e-9)
    assert doc["x_star"] > doc["x_hat"]
    assert doc["v_hat_x0"] == v_hat(LOMBARDY_COST, LOMBARDY_OU, 0.02)
    assert doc["v_x0"] == value_total(LOMBARDY_COST, LOMBARDY_OU, sol, 0.02)
    assert doc["seed"] == DEFAULTS["seed"] and len(doc["config_hash"]) == 16


def test_solve_never_switch(capsys):
    doc = run_json(capsys, "solve", "--ell", "0", "--lambda", "0")
    assert doc["case"] == "never_switch"
    assert doc["x_star"] == "inf"


def test_csv_output_has_header_comment(capsys):
    code, out, _ = run(capsys, "solve", "--format", "csv", "--seed", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# ") and "config_hash=" in lines[0] and "seed=5" in lines[0]
    assert lines[1].split(",")[:2] == ["case", "x_star"]


def test_out_flag_writes_file(capsys, tmp_path):
    out = tmp_path / "solve.json"
    code, stdout, _ = run(capsys, "solve", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["case"] == "interior"


def test_config_file_and_override_precedence(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"lambda": 0.0, "incentive": 0.0, "seed": 11}))
    doc = run_json(capsys, "solve", "--config", str(path))
    assert doc["x_star"] == pytest.approx(0.2446083284210958, abs=1e-12)
    assert doc["seed"] == 11
    doc2 = run_json(capsys, "solve", "--config", str(path), "--lambda", "7.272", "--incentive", "6000")
    assert doc2["x_star"] == pytest.approx(0.03325802869425214, abs=1e-12)
    assert doc2["config_hash"] != doc["config_hash"]


def test_malformed_config_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "ell": 12000,\n  "rho": ,\n}\n')
    code, _, err = run(capsys, "solve", "--config", str(path))
    assert code == 2
    assert f"{path}:3:" in err


@pytest.mark.parametrize("body,line", [
    ('{\n  "ell": 12000,\n  "rhoo": 0.05\n}\n', 3),
    ('{\n  "seed": 1.5\n}\n', 2),
    ('{\n  "ell": "far"\n}\n', 2),
])
def test_invalid_config_entries_report_line(capsys, tmp_path, body, line):
    path = tmp_path / "bad.json"
    path.write_text(body)
    code, _, err = run(capsys, "solve", "--config", str(path))
    assert code == 2
    assert f"{path}:{line}:" in err


def test_missing_config_file(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--config", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in err


def test_invalid_parameter_is_usage_error(capsys):
    code, _, err = run(capsys, "solve", "--rho", "-0.1")
    assert code == 2 and "rho" in err


def test_unknown_flag_and_format_are_usage_errors():
    for argv in (["solve", "--bogus"], ["solve", "--format", "xml"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_numeric_failure_exit_code(capsys):
    # the threshold lies far beyond the range in which psi is representable
    code, _, err = run(
        capsys, "solve", "--a-over-b", "-0.03", "--b", "1.27", "--sigma", "0.06", "--ell", "10000",
        "--lambda", "4", "--c", "1.5", "--invest", "23500", "--incentive", "7400", "--rho", "0.0426",
    )
    assert code == 3 and "numeric failure" in err


def test_value_matches_library(capsys):
    code, out, _ = run(capsys, "value", "--x-min", "-0.1", "--x-max", "0.2", "--points", "4")
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines()[2:]]
    sol = solve(LOMBARDY_COST, LOMBARDY_OU)
    for row, x in zip(rows, np.linspace(-0.1, 0.2, 4)):
        assert float(row[0]) == x
        assert float(row[3]) == value_total(LOMBARDY_COST, LOMBARDY_OU, sol, float(x))


def test_value_rejects_empty_grid(capsys):
    code, _, _ = run(capsys, "value", "--x-min", "0.2", "--x-max", "0.1")
    assert code == 2


def test_sensitivity_matches_library(capsys):
    doc = run_json(capsys, "sensitivity", "--params", "lambda,k", "--format", "json")
    got = {r["param"]: r["derivative"] for r in doc["rows"]}
    assert got["lambda"] == dxstar(Param.LAMBDA, LOMBARDY_COST, LOMBARDY_OU).derivative
    assert got["k"] == dxstar(Param.K, LOMBARDY_COST, LOMBARDY_OU).derivative


def test_sensitivity_unknown_parameter(capsys):
    code, _, _ = run(capsys, "sensitivity", "--params", "rho")
    assert code == 2


def test_calibrate_fixture(capsys, fixture_csv):
    doc = run_json(capsys, "calibrate", str(fixture_csv))
    expected = calibrate(read_price_csv(fixture_csv)).as_dict()
    for k, v in expected.items():
        assert doc[k] == v


def test_calibrate_bad_input(capsys, tmp_path):
    code, _, _ = run(capsys, "calibrate", str(tmp_path / "missing.csv"))
    assert code == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("date,fuel_eur_per_liter,electricity_eur_per_kwh\n2010-01,x,0.2\n")
    code, _, err = run(capsys, "calibrate", str(bad))
    assert code == 2 and ":2:" in err


def test_simulate_is_deterministic_and_matches_library(capsys, tmp_path):
    argv = ["simulate", "--n-paths", "400", "--t-max", "60", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    est = expected_switch_time(LOMBARDY_OU, LOMBARDY_COST, McConfig(n_paths=400, t_max=60.0, seed=3))
    assert doc["mean_tau"] == est.mean_tau and doc["std_error"] == est.std_error


def test_simulate_never_switch_is_domain_error(capsys):
    code, _, _ = run(capsys, "simulate", "--ell", "0", "--lambda", "0", "--n-paths", "10")
    assert code == 2


def test_surface_default_grids(capsys):
    code, out, _ = run(capsys, "surface", "--n-paths", "300", "--t-max", "60")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "lambda,k,x_star,mean_tau,std_error,censored_fraction"
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    assert rows.shape == (169, 6)
    assert rows[0, 0] == 0 and rows[0, 1] == 0 and rows[1, 1] == 500.0 and rows[13, 0] == 1.0
    assert rows[0, 3] == rows[:, 3].max()


def test_surface_custom_grids(capsys):
    doc = run_json(capsys, "surface", "--n-paths", "50", "--t-max", "20", "--lambda-grid", "0,12",
                   "--k-grid", "0:6000:2", "--format", "json")
    assert [(r["lambda"], r["k"]) for r in doc["rows"]] == [(0, 0), (0, 6000), (12, 0), (12, 6000)]


def test_surface_bad_grid(capsys):
    code, _, _ = run(capsys, "surface", "--lambda-grid", "0:12")
    assert code == 2


def test_parse_grid():
    np.testing.assert_array_equal(parse_grid("0:12:13"), np.linspace(0, 12, 13))
    np.testing.assert_array_equal(parse_grid("1,2.5"), [1.0, 2.5])
    with pytest.raises(ConfigError):
        parse_grid("a,b")


def test_load_config_rejects_non_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)
