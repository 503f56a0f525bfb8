import json
import subprocess
import sys

import numpy as np
import pytest

from fairsel.cli import main
from fairsel.config import RunConfig, load_config, parse_config
from fairsel.presets import DEMO_MASTER_SEED, demo_config


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_parse_demo_config_fast_profile_defaults():
    cfg = parse_config(demo_config())
    assert cfg.profile == "fast"
    assert cfg.policy == "faircg1"
    assert cfg.horizon == 10_000
    assert cfg.step_count == 25
    assert cfg.estimator["samples"] == 10_000
    assert cfg.master_seed == DEMO_MASTER_SEED
    assert cfg.fairness == pytest.approx(0.42 * np.asarray(cfg.fairness_base))
    assert cfg.build_pool().is_feasible()


def test_full_profile_and_explicit_values_win():
    raw = demo_config()
    cfg = parse_config(raw, profile="full")
    assert cfg.horizon == 100_000
    assert cfg.step_count is None
    assert cfg.resolved_step_count() == 100
    raw["horizon"] = 123
    raw["step_count"] = 7
    cfg = parse_config(raw, profile="full")  # explicit keys beat the profile
    assert cfg.horizon == 123
    assert cfg.step_count == 7


def test_seed_override_beats_the_file():
    cfg = parse_config(demo_config(master_seed=5), seed=99)
    assert cfg.master_seed == 99


def test_explicit_fairness_form():
    raw = demo_config()
    raw["fairness"] = {"explicit": [0.1] * 10}
    cfg = parse_config(raw)
    assert cfg.fairness == tuple([0.1] * 10)
    assert cfg.fairness_base is None


@pytest.mark.parametrize(
    "mutate",
    [
        lambda raw: raw.pop("n"),
        lambda raw: raw.update(k=99),
        lambda raw: raw.update(policy="sneaky"),
        lambda raw: raw.update(fairness={"beta": 0.42}),
        lambda raw: raw.update(fairness={"explicit": [2.0] * 10}),
        lambda raw: raw.update(sample_counts=[1.0, 2.0]),
        lambda raw: raw.update(master_seed=-1),
        lambda raw: raw.update(horizon=0),
        lambda raw: raw.update(step_count=0),
        lambda raw: raw.update(profile="turbo"),
        lambda raw: raw.update(oracle={"noise": True}),
    ],
)
def test_validation_errors(mutate):
    raw = demo_config()
    mutate(raw)
    with pytest.raises(ValueError):
        parse_config(raw)


def test_oracle_kinds_buildable():
    raw = demo_config()
    raw["oracle"] = {"kind": "modular", "weights": [0.1] * 10}
    assert parse_config(raw).build_oracle().evaluate({3}) == pytest.approx(0.1)
    raw["oracle"] = {
        "kind": "coverage",
        "item_weights": [1.0, 2.0],
        "covers": [[0], [1], [], [], [], [], [], [], [], [0, 1]],
    }
    assert parse_config(raw).build_oracle().evaluate({9}) == 3.0
    raw["oracle"] = {"kind": "accuracy"}
    raw.pop("sample_counts")
    with pytest.raises(ValueError):
        parse_config(raw).build_oracle()


def test_config_hash_is_canonical_and_sensitive(tmp_path):
    raw = demo_config()
    scrambled = json.loads(json.dumps(raw))
    scrambled = dict(reversed(list(scrambled.items())))
    a = parse_config(raw).config_hash()
    assert parse_config(scrambled).config_hash() == a
    assert parse_config(demo_config(master_seed=8)).config_hash() != a
    cfg = parse_config(raw)
    assert cfg.with_overrides(fairness=tuple([0.1] * 10)).config_hash() != a
    path = _write(tmp_path, raw)
    assert load_config(path).config_hash() == a


def test_cli_run_writes_everything(tmp_path, capsys):
    raw = demo_config(policy="faircg2", horizon=300)
    raw["emit_step_trace"] = True
    path = _write(tmp_path, raw)
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out)]) == 0
    for name in ("rounds.csv", "fractions.csv", "convergence.csv", "bounds.csv",
                 "steps.csv", "manifest.txt"):
        assert (out / name).exists(), name
    manifest = dict(
        line.split(" = ", 1) for line in (out / "manifest.txt").read_text().splitlines()
    )
    assert manifest["config_hash"] == load_config(path).config_hash()
    assert manifest["policy"] == "faircg2"
    assert manifest["schema_version"] == "1"
    assert manifest["estimator_mode"] == "exact"
    assert int(manifest["oracle_queries"]) > 0
    rounds = (out / "rounds.csv").read_text().splitlines()
    assert rounds[0] == "round,selected,utility,running_average,max_debt"
    assert len(rounds) == 301
    captured = capsys.readouterr().out
    assert "mean_utility=" in captured and "u_opt=" in captured


def test_cli_seed_flag_changes_the_run(tmp_path):
    path = _write(tmp_path, demo_config(policy="faircg1", horizon=200))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", path, "--out", str(out_a), "--seed", "1"]) == 0
    assert main(["run", "--config", path, "--out", str(out_b), "--seed", "2"]) == 0
    assert (out_a / "rounds.csv").read_bytes() != (out_b / "rounds.csv").read_bytes()


def test_cli_opt(tmp_path, capsys):
    path = _write(tmp_path, demo_config())
    out = tmp_path / "opt"
    assert main(["opt", "--config", path, "--out", str(out)]) == 0
    lines = (out / "support.csv").read_text().splitlines()
    assert lines[0] == "subset,utility,probability"
    probs = [float(line.split(",")[2]) for line in lines[1:]]
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
    assert "u_opt=" in capsys.readouterr().out


def test_cli_opt_infeasible_exit_code(tmp_path):
    raw = demo_config(beta=0.42)
    raw["fairness"] = {"explicit": [0.9] * 10}  # sums to 9 > k=6
    path = _write(tmp_path, raw)
    assert main(["opt", "--config", path, "--out", str(tmp_path / "x")]) == 1


def test_cli_sweep(tmp_path, capsys):
    raw = demo_config(policy="faircg1", horizon=400)
    raw["sweep_betas"] = [0.0, 0.42]
    path = _write(tmp_path, raw)
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", path, "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "beta,policy,status,u_opt,mean_utility,empirical_ratio,bound_ratio"
    assert len(lines) == 1 + 2 * 3  # two betas, three fair policies
    assert "ratio=" in capsys.readouterr().out


def test_sweep_requires_a_base_profile(tmp_path):
    raw = demo_config(horizon=100)
    raw["fairness"] = {"explicit": [0.1] * 10}
    path = _write(tmp_path, raw)
    with pytest.raises(ValueError):
        main(["sweep", "--config", path, "--out", str(tmp_path / "x")])


def test_cli_check_passes_on_the_demo(tmp_path, capsys):
    path = _write(tmp_path, demo_config())
    assert main(["check", "--config", path]) == 0
    out = capsys.readouterr().out
    assert "feasible=yes" in out
    assert "monotone=yes" in out and "submodular=yes" in out


def test_cli_check_fails_on_infeasible_floors(tmp_path, capsys):
    raw = demo_config()
    raw["fairness"] = {"explicit": [0.9] * 10}
    path = _write(tmp_path, raw)
    assert main(["check", "--config", path]) == 1
    assert "feasible=no" in capsys.readouterr().out


def test_cli_check_skips_structure_beyond_the_cap(tmp_path, capsys):
    raw = {
        "n": 13,
        "k": 3,
        "fairness": {"explicit": [0.1] * 13},
        "oracle": {"kind": "modular", "weights": [1.0] * 13},
        "policy": "dg",
    }
    path = _write(tmp_path, raw)
    assert main(["check", "--config", path]) == 0
    assert "structure check skipped" in capsys.readouterr().out


def test_module_entry_point_smoke(tmp_path):
    path = _write(tmp_path, demo_config(policy="roundrobin", horizon=50))
    out = tmp_path / "mod_out"
    proc = subprocess.run(
        [sys.executable, "-m", "fairsel", "run", "--config", path, "--out", str(out)],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "rounds.csv").exists()


def test_run_config_is_frozen():
    cfg = parse_config(demo_config())
    with pytest.raises(AttributeError):
        cfg.horizon = 5
    assert isinstance(cfg, RunConfig)
