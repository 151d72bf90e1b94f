import json
import pathlib
import math

import pytest
from click.testing import CliRunner

from cylstable import ConfigError, GateError
from cylstable.fitting import fit_exponent
from cylstable.harness import (DEFAULT_TOLERANCES, ExperimentConfig, Report, check_gate, gate,
                               load_config, parse_config, run, write_report)
from cylstable.harness.cli import main
from cylstable.harness.experiments import plan
from cylstable.harness.report import CheckResult, fit_svg


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError, match="top level"):
        parse_config({"experiment": "kernel", "colour": 1})
    with pytest.raises(ConfigError, match=r"\[spec\]"):
        parse_config({"experiment": "kernel", "spec": {"alpah": 1.0}})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "kernel", "tolerances": {"made_up": 1.0}})
    with pytest.raises(ConfigError):
        parse_config({"spec": {"alpha": 1.0}})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "warp"})


def test_parse_full_config():
    cfg = parse_config({
        "experiment": "semigroup-scaling",
        "spec": {"alpha": 1.5, "dim": 1},
        "model": {"preset": "holder-drift", "params": {"beta": 0.7}},
        "mc": {"n_paths": 100, "m": 8, "seed": 3},
        "time": {"ladder": [0.25, 0.5], "T": 1.0},
        "exponents": {"gamma": 1.0},
        "tolerances": {"fit_rms": 0.2},
        "threads": 2,
    })
    assert cfg.t_ladder == (0.25, 0.5)
    assert cfg.tol("fit_rms") == 0.2 and cfg.tol("kde_l1") == DEFAULT_TOLERANCES["kde_l1"]
    assert cfg.effective_beta() == pytest.approx(0.7)
    assert cfg.with_overrides(seed=None, threads=4).threads == 4
    assert cfg.echo()["tolerances"]["fit_rms"] == 0.2


def test_gate_names_each_hypothesis():
    check_gate(1.5, 0.7, 1.4, 0.0)
    with pytest.raises(GateError, match="alpha \\+ beta > 1"):
        check_gate(0.5, 0.4, 0.1, 0.0)
    with pytest.raises(GateError, match="gamma"):
        check_gate(1.5, 0.7, 2.2, 0.0)
    with pytest.raises(GateError, match="eta"):
        check_gate(1.5, 0.7, 1.0, -1.5)


def test_semigroup_gate_runs_before_any_computation():
    cfg = ExperimentConfig("semigroup-scaling", alpha=1.5, preset="holder-drift",
                           params={"beta": 0.7}, gamma=2.2, n_paths=10 ** 9)
    with pytest.raises(GateError):
        run(cfg)
    drift = ExperimentConfig("semigroup-scaling", alpha=0.45, preset="holder-drift",
                             params={"beta": 0.9}, gamma=0.2)
    with pytest.raises(GateError, match="drift"):
        gate(drift)


def test_one_dimensional_checks_refuse_higher_dimension():
    with pytest.raises(ConfigError):
        run(ExperimentConfig("kernel", dim=2, checks=("duhamel",)))
    with pytest.raises(ConfigError):
        run(ExperimentConfig("kernel", checks=("kde",)))


def test_kernel_experiment_alpha_one():
    rep = run(ExperimentConfig("kernel", alpha=1.0, checks=("cauchy", "scaling")))
    names = {v.name for v in rep.verdicts}
    assert any("cauchy" in n for n in names)
    assert rep.passed
    assert set(rep.timing) == {"cauchy", "scaling"}


def test_simulate_with_no_paths():
    rep = run(ExperimentConfig("simulate", n_paths=0, m=4))
    assert rep.verdicts == []
    assert rep.passed


def fake_report():
    c = CheckResult("demo", "identity", [], [], [])
    c.metric(1.0, "value", 0.1, t=0.5, stderr=0.01)
    f = fit_exponent(x=[1, 2, 4, 8], y=[1, 0.5, 0.25, 0.125])
    c.fit(1.0, "decay", f)
    c.verdict(3, "decay-slope", True, f.slope, -1.0, "~=")
    return Report("demo", {"seed": 0}, [c])


def test_report_files_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    write_report(fake_report(), a)
    write_report(fake_report(), b)
    for name in ("demo-identity-1.csv", "report.json", "summary.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    svgs = list((a / "charts").glob("*.svg"))
    assert len(svgs) == 1 and svgs[0].read_text().startswith("<svg")
    head = (a / "demo-identity-1.csv").read_text().splitlines()[0]
    assert head.split(",")[0] == "experiment"


def test_json_tables(tmp_path):
    write_report(fake_report(), tmp_path, "json", charts=False)
    rows = json.loads((tmp_path / "demo-identity-1.json").read_text())
    assert {r["record"] for r in rows} == {"metric", "fit"}
    verdicts = json.loads((tmp_path / "demo-identity-all.json").read_text())
    assert verdicts[0]["record"] == "verdict" and verdicts[0]["passed"] is True
    assert not (tmp_path / "charts").exists()


def test_fit_svg_handles_flat_data():
    svg = fit_svg(fit_exponent(x=[1, 2, 4, 8], y=[1, 1, 1, 1]))
    assert "slope 0.000" in svg


def test_cli_kernel_run(tmp_path):
    cfg = tmp_path / "k.toml"
    cfg.write_text('experiment = "kernel"\nchecks = ["cauchy"]\n[grid]\nN = 1024\nL = 32.0\n')
    res = CliRunner().invoke(main, ["kernel", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert res.exit_code == 0, res.output
    assert "criterion  1: PASS" in res.output
    assert (tmp_path / "o" / "summary.txt").exists()


def test_cli_usage_errors(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('experiment = "kernel"\nwhatever = 1\n')
    res = CliRunner().invoke(main, ["kernel", "--config", str(cfg), "--out", str(tmp_path)])
    assert res.exit_code == 2
    cfg.write_text('experiment = "density"\n')
    res = CliRunner().invoke(main, ["kernel", "--config", str(cfg), "--out", str(tmp_path)])
    assert res.exit_code == 2
    gate_cfg = tmp_path / "gate.toml"
    gate_cfg.write_text('experiment = "semigroup-scaling"\n[spec]\nalpha = 0.4\n'
                        '[exponents]\nbeta = 0.5\n')
    res = CliRunner().invoke(main, ["semigroup-scaling", "--config", str(gate_cfg),
                                    "--out", str(tmp_path)])
    assert res.exit_code == 2 and "alpha + beta" in res.output


def test_cli_computation_error_exit_code(tmp_path):
    cfg = tmp_path / "res.toml"
    cfg.write_text('experiment = "kernel"\nchecks = ["moments"]\n[spec]\nalpha = 0.3\n'
                   '[grid]\nL = 4096.0\n[time]\nladder = [1e-6, 2e-6, 4e-6, 8e-6]\n')
    res = CliRunner().invoke(main, ["kernel", "--config", str(cfg), "--out", str(tmp_path)])
    assert res.exit_code == 3
    assert "error in cylstable." in res.output


def test_all_acceptance_config_only_tolerances(tmp_path):
    cfg = tmp_path / "t.toml"
    cfg.write_text('[spec]\nalpha = 1.0\n')
    res = CliRunner().invoke(main, ["all-acceptance", "--config", str(cfg), "--only", "1",
                                    "--out", str(tmp_path)])
    assert res.exit_code == 2
    cfg.write_text('[tolerances]\ncauchy_abs = 1e-9\n')
    res = CliRunner().invoke(main, ["all-acceptance", "--config", str(cfg), "--only", "1",
                                    "--out", str(tmp_path / "o")])
    assert res.exit_code == 0, res.output
    assert "criterion  1: PASS" in res.output


def test_cli_version():
    res = CliRunner().invoke(main, ["--version"])
    assert res.exit_code == 0 and "0.1.0" in res.output


def test_besov_experiment_small_grid():
    rep = run(ExperimentConfig("besov", N=2048, L=math.pi, checks=("commutator",)))
    assert rep.passed


def test_rough_data_runs_when_eta_positive():
    cfg = ExperimentConfig("semigroup-scaling", alpha=1.5, eta=0.3, n_paths=200,
                           checks=None, t_ladder=(0.25, 0.5))
    assert [label for label, _ in plan(cfg)] == ["oracle", "envelopes", "rough-data"]
    rep = run(cfg.with_overrides(checks=("rough-data",)))
    rows = rep.checks[0].rows
    besov = [r["value"] for r in rows if r["name"].startswith("rough_besov_norm")]
    sup = [r["value"] for r in rows if r["name"] == "rough_sup_norm"]
    assert len(besov) == 5 and max(besov) < 1.1
    assert sup == sorted(sup)
    assert rep.verdicts == []


def test_shipped_configs_parse():
    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    paths = sorted(root.glob("*.toml"))
    assert paths
    for p in paths:
        if p.name.startswith("acceptance"):
            continue
        cfg = load_config(p)
        gate(cfg)
        assert plan(cfg)
