import json
from pathlib import Path

import pytest

from immigration_limits import acceptance
from immigration_limits.cli import build_scenario, main, read_config
from immigration_limits.samples import FddSample

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_simulate_writes_sample_and_manifest(tmp_path):
    out = tmp_path / "runs"
    code = main(["simulate", "--scenario", str(SCENARIOS / "survival_indicator.cfg"), "--t", "1000", "--reps", "50", "--seed", "7",
                 "--out", str(out), "--jobs", "1"])
    assert code == 0
    sample = FddSample.from_csv(out / "fdd_thm21_t1000.csv")
    assert sample.values.shape == (50, 3) and sample.t == 1000.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 7 and manifest["version"]
    assert manifest["config"]["scenario"]["model"]["model_id"] == "indicator_survival"


def test_outputs_byte_identical(tmp_path):
    argv = ["simulate", "--scenario", str(SCENARIOS / "mixture.cfg"), "--reps", "40", "--out", str(tmp_path)]
    assert main(argv + ["--jobs", "1"]) == 0
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert main(argv + ["--jobs", "1"]) == 0
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}


def test_results_independent_of_jobs(tmp_path):
    for jobs in ("1", "2"):
        assert main(["simulate", "--scenario", str(SCENARIOS / "hit_indicator.cfg"), "--reps", "30", "--jobs", jobs,
                     "--out", str(tmp_path / jobs)]) == 0
    assert (tmp_path / "1" / "fdd_thm21_t1000.csv").read_bytes() == (tmp_path / "2" / "fdd_thm21_t1000.csv").read_bytes()


def test_limit_sample(tmp_path):
    code = main(["limit-sample", "--case", "thm22_mix", "--alpha", "0.5", "--q", "0.5", "--beta", "0",
                 "--u", "0.5,1,2", "--reps", "50", "--seed", "7", "--n-steps", "512", "--out", str(tmp_path)])
    assert code == 0
    assert FddSample.from_csv(tmp_path / "limit_thm22_mix.csv").values.shape == (50, 3)


def test_renewal_calc(tmp_path):
    assert main(["renewal-calc", "--t-list", "100,1000", "--reps", "50", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "lemmas.csv").read_text().startswith("lemma,t,statistic,limit,abs_gap")


def test_study(tmp_path, capsys):
    code = main(["study", "--scenario", str(SCENARIOS / "hit_indicator.cfg"), "--reps", "200", "--t-list", "100,1000",
                 "--out", str(tmp_path), "--jobs", "1"])
    assert code == 0
    assert (tmp_path / "trend.csv").exists() and (tmp_path / "reports.json").exists()
    assert "trend" in capsys.readouterr().out


def test_verify_exit_codes(tmp_path, monkeypatch):
    monkeypatch.setitem(acceptance.CRITERIA, 99, ("always failing stub", "c_stub"))
    monkeypatch.setattr(acceptance._Suite, "c_stub", lambda self, r: r.add("stub", 1.0, "< 0", False), raising=False)
    assert main(["verify", "--suite", "11,99", "--seed", "7", "--out", str(tmp_path)]) == 3
    summary = json.loads((tmp_path / "acceptance.json").read_text())
    assert not summary["all_passed"]
    assert main(["verify", "--suite", "11", "--seed", "7", "--out", str(tmp_path)]) == 0


def test_verify_needs_seed(capsys):
    assert main(["verify", "--suite", "11"]) == 1
    assert "seed" in capsys.readouterr().err


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("IMMLIM_OUT", str(tmp_path / "envdir"))
    assert main(["verify", "--suite", "11", "--seed", "3"]) == 0
    assert (tmp_path / "envdir" / "manifest.json").exists()


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["simulate", "--scenario", "missing.cfg"],
    ["verify", "--suite", "42", "--seed", "1"],
    ["limit-sample", "--case", "thm22_mix", "--alpha", "0.5", "--q", "0.5", "--beta", "0", "--rho", "0.3",
     "--u", "1", "--seed", "1"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_keys_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text((SCENARIOS / "survival_indicator.cfg").read_text() + "colour = blue\n")
    assert main(["simulate", "--scenario", str(cfg)]) == 1
    assert "colour" in capsys.readouterr().err
    assert main(["simulate", "--scenario", str(SCENARIOS / "survival_indicator.cfg"), "--set", "model.gamma=2"]) == 1


def test_resource_error_exit_code(capsys):
    assert main(["simulate", "--scenario", str(SCENARIOS / "survival_indicator.cfg"), "--set", "budget=10"]) == 2
    assert "budget" in capsys.readouterr().err


def test_config_parsing(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nlaw.kind = pareto\nlaw.alpha = 0.5\nlaw.x_min = 1\nmodel.id = indicator_hit\n"
                   "model.eta = exponential:2\ncase = prop22\nu_grid = 1,2\nt = 100  # trailing\nseed = 1\n")
    raw = read_config(cfg)
    assert raw["t"] == "100"
    sc = build_scenario(raw)
    assert sc.law.params == (0.5, 1.0) and sc.model.eta_law.params == (2.0,) and sc.u_grid == (1.0, 2.0)
