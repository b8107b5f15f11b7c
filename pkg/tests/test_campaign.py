import json

import numpy as np
import pytest

from rtns.campaign import EXPERIMENTS, ExperimentConfig, load_config, run_campaign
from rtns.errors import InvalidParameterError


def read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(experiment="nope", d=2, D=2, trials=1, master_seed=0)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(experiment="mps_gap", d=2, D=2, trials=0, master_seed=0)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(experiment="mps_gap", d=0, D=2, trials=1, master_seed=0)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(
            experiment="mps_gap", d=2, D=2, trials=1, master_seed=0,
            sweep_param="x", sweep_values=(1, 2),
        )
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(
            experiment="mps_gap", d=2, D=2, trials=1, master_seed=0,
            sweep_param="d", sweep_values=(4, 2),
        )


def test_points_enumeration():
    cfg = ExperimentConfig(
        experiment="mps_gap", d=4, D=2, trials=1, master_seed=0,
        sweep_param="d", sweep_values=(4, 9, 16),
    )
    pts = cfg.points()
    assert [p["d"] for p in pts] == [4, 9, 16]
    assert all(p["D"] == 2 for p in pts)
    flat = ExperimentConfig(experiment="mps_gap", d=4, D=2, trials=1, master_seed=0)
    assert flat.points() == [{"d": 4, "D": 2, "N": None}]


def test_overlap_campaign_outputs(tmp_path):
    cfg = ExperimentConfig(
        experiment="overlap_check", d=100, D=3, trials=50, master_seed=7,
        output_dir=str(tmp_path),
    )
    csv_path, json_path = run_campaign(cfg)
    lines = read(csv_path).strip().split("\n")
    assert lines[0] == "point_index,trial_index,derived_seed,d,D,N,overlap,flags"
    assert len(lines) == 51
    summary = json.loads(read(json_path))
    assert summary["status"] == "ok"
    check = summary["points"][0]["bound_checks"][0]
    assert check["bound"] == "overlap_mean"
    assert check["passed"] is True
    # overlap concentrates at 1
    assert summary["points"][0]["stats"]["overlap"]["mean"] == pytest.approx(1.0, abs=0.05)


def test_campaign_deterministic_across_threads(tmp_path):
    outs = []
    for threads, sub in ((1, "a"), (4, "b")):
        cfg = ExperimentConfig(
            experiment="mps_gap", d=30, D=2, trials=8, master_seed=3,
            output_dir=str(tmp_path / sub), threads=threads,
        )
        csv_path, json_path = run_campaign(cfg)
        outs.append((read(csv_path), read(json_path)))
    assert outs[0][0] == outs[1][0]  # byte-identical CSV
    assert outs[0][1] == outs[1][1]  # byte-identical JSON


def test_campaign_rerun_is_byte_identical(tmp_path):
    texts = []
    for sub in ("x", "y"):
        cfg = ExperimentConfig(
            experiment="wishart_check", d=400, D=3, trials=10, master_seed=11,
            output_dir=str(tmp_path / sub),
        )
        csv_path, json_path = run_campaign(cfg)
        texts.append(read(csv_path) + read(json_path))
    assert texts[0] == texts[1]


def test_wishart_campaign_bound_check(tmp_path):
    cfg = ExperimentConfig(
        experiment="wishart_check", d=2000, D=3, trials=20, master_seed=5,
        output_dir=str(tmp_path),
    )
    _, json_path = run_campaign(cfg)
    summary = json.loads(read(json_path))
    check = summary["points"][0]["bound_checks"][0]
    assert check["bound"] == "wishart"
    assert check["threshold"] == pytest.approx(6.0 * np.sqrt(9.0 / 2000.0))
    assert check["passed"] is True
    assert check["empirical_frequency"] == 0.0


def test_sweep_trends(tmp_path):
    cfg = ExperimentConfig(
        experiment="trace_check", d=16, D=2, trials=30, master_seed=9,
        sweep_param="d", sweep_values=(16, 64, 256), output_dir=str(tmp_path),
    )
    _, json_path = run_campaign(cfg)
    summary = json.loads(read(json_path))
    assert len(summary["points"]) == 3
    assert "trace" in summary["trends"]
    trend = summary["trends"]["trace"]
    assert len(trend["medians"]) == 3


def test_parent_campaign_small(tmp_path):
    cfg = ExperimentConfig(
        experiment="parent_gap_mps", d=5, D=2, N=3, trials=3, master_seed=4,
        output_dir=str(tmp_path),
    )
    csv_path, json_path = run_campaign(cfg)
    summary = json.loads(read(json_path))
    stats = summary["points"][0]["stats"]
    assert stats["rank"]["min"] == 4.0
    assert abs(stats["ground_energy"]["max"]) < 1e-8
    assert stats["gap"]["min"] > 0
    kinds = [c["bound"] for c in summary["points"][0]["bound_checks"]]
    assert kinds == ["gap_h", "p_pi", "pi_commute"]
    assert all(c["passed"] is None for c in summary["points"][0]["bound_checks"])


def test_peps_campaign_small(tmp_path):
    cfg = ExperimentConfig(
        experiment="peps_gap", d=30, D=2, N=2, trials=5, master_seed=6,
        output_dir=str(tmp_path),
    )
    _, json_path = run_campaign(cfg)
    summary = json.loads(read(json_path))
    stats = summary["points"][0]["stats"]
    assert stats["overlap"]["mean"] == pytest.approx(1.0, abs=0.5)
    assert "gap" in stats  # bond dimension 4 <= 64, spectrum computed


def test_csv_has_no_timing_columns(tmp_path):
    cfg = ExperimentConfig(
        experiment="trace_check", d=20, D=2, trials=2, master_seed=1,
        output_dir=str(tmp_path),
    )
    csv_path, json_path = run_campaign(cfg)
    assert "wall_time" not in read(csv_path)
    assert "wall_time" not in read(json_path)


def test_load_config_with_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "experiment": "overlap_check", "d": 10, "D": 2,
        "trials": 4, "master_seed": 1,
    }))
    cfg = load_config(str(path), {"master_seed": 99, "output_dir": None})
    assert cfg.master_seed == 99  # override wins
    assert cfg.output_dir == "."  # None overrides are ignored
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "overlap_check", "d": 10, "D": 2,
                               "trials": 1, "master_seed": 0, "bogus_field": 3}))
    with pytest.raises(InvalidParameterError):
        load_config(str(bad))


def test_experiment_registry_covers_bodies():
    from rtns.campaign import _TRIAL_BODIES

    assert set(EXPERIMENTS) == set(_TRIAL_BODIES)
