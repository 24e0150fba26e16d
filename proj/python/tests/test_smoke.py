import json
import os
from pathlib import Path

import pytest

import panelfair

CONFIG_DIR = Path(os.environ.get("PANELFAIR_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def test_version_and_scenarios():
    assert panelfair.version().startswith("panelfair")
    assert set(panelfair.scenario_names()) == {"mirror_pair", "two_groups"}
    assert "panel" in panelfair.scenario("two_groups")


def test_single_resample_is_always_unfair():
    summary = panelfair.run({"scenario": "mirror_pair", "T": 40, "seed": 2, "learner": {"R": 1}})
    assert summary["unfairness_total"] == 40
    assert len(summary["ledger"]) == 40
    assert summary["masked_reads"] == 0


def test_runs_are_deterministic(tmp_path):
    cfg = {"scenario": "two_groups", "T": 150, "seed": 4}
    a = panelfair.run(cfg, out_dir=tmp_path / "a")
    b = panelfair.run(cfg, out_dir=tmp_path / "b")
    assert a == b
    for name in ("ledger.csv", "config.json", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["runtime_s"] is None
    total = sum(row["error"] for row in a["ledger"])
    assert total - a["lp_benchmark"] == pytest.approx(a["error_regret"], abs=1e-9)


def test_config_files_load():
    doc = panelfair.load_config(CONFIG_DIR / "mirror_pair.toml")
    assert doc["learner"]["R"] == 1000
    assert doc["learner"]["algorithm"] == "ftpl"
    summary = panelfair.run(CONFIG_DIR / "thresholds_adaptive.toml")
    assert summary["T"] == 500


def test_errors_surface_as_python_exceptions():
    with pytest.raises(panelfair.ConfigError):
        panelfair.run({"scenario": "mirror_pair", "T": 0})
    with pytest.raises(ValueError):
        panelfair.scenario("nowhere")
    with pytest.raises(OSError):
        panelfair.load_config(CONFIG_DIR / "missing.toml")


def test_gap_example_and_quick_verify():
    assert panelfair.gap_example() == (1.0, 0.0)
    assert panelfair.gap_example(p=0.6)[1] == 0.0
    checks = panelfair.verify(quick=True)
    assert checks and all(c["pass"] for c in checks)
