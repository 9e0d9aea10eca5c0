from __future__ import annotations

from pathlib import Path

import numpy as np
import orjson
import pytest

from vacqrng.core.errors import StageError
from vacqrng.core.run.artifacts import RunArtifacts
from vacqrng.core.run.pipeline import STAGE_NAMES, load_summary, run_pipeline
from vacqrng.core.run.spec import load_config, parse_config
from vacqrng.core.run.stages import run_seeds
from vacqrng.extractor.packing import bytes_to_bits

CONFIGS = Path(__file__).resolve().parents[2] / "configs"

SMALL = {
    "name": "small",
    "seed": 11,
    "n_samples": 200_000,
    "downsample": {"policy": "fixed", "factor": 10, "max_lag": 40, "acf_samples": 100_000},
    "calibration": {"currents_ua": [10.0, 40.0, 70.0], "n_samples": 200_000},
    "battery": {"stream_bits": 10_000, "n_streams": 20},
    "acf": {"max_lag": 20},
}

DETERMINISTIC = (
    "filter.json",
    "acf.csv",
    "calibration.json",
    "calibration.csv",
    "conditioned.trc",
    "packed.bin",
    "extractor_seed.bin",
    "extracted.bin",
    "extracted.json",
    "acf_compare.csv",
    "battery.json",
    "battery.txt",
    "summary.json",
    "stages.jsonl",
)


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    cfg = parse_config(SMALL)
    runs = {}
    for workers in (1, 2):
        art = RunArtifacts(run_dir=tmp_path_factory.mktemp(f"run_w{workers}"))
        runs[workers] = run_pipeline(cfg, art, workers=workers)
    return cfg, runs


# --- end to end ---

def test_summary_reports_published_budget(small_runs):
    cfg, runs = small_runs
    s = runs[1].summary

    assert s["h_min"] == pytest.approx(17.5, abs=0.3)
    assert s["pair_rate"] == pytest.approx(2e9)
    assert s["gen_rate"] == pytest.approx(s["h_min"] * 2e9)
    assert s["delta_p"] * s["delta_q"] == pytest.approx(np.pi / 2.0 ** s["h_min"], rel=1e-9)
    assert s["ratio_ok"]
    assert s["extractor"]["m"] * 24 < s["extractor"]["n"] * s["h_min"]
    assert s["eps_exp"] >= 63.0
    assert s["filter"]["meets_spec"]
    assert s["config_hash"] == cfg.config_hash()
    assert s["projections"]["power_gain"]["h_min"] == pytest.approx(s["h_min"] + np.log2(10.0))
    assert s["projections"]["doubled_pair_rate"]["pair_rate"] == pytest.approx(4e9)
    assert set(s["verdicts"]) >= {"Frequency", "Runs", "Serial"}


def test_extracted_length_and_stage_log(small_runs):
    _, runs = small_runs
    art = runs[1].artifacts
    ext = orjson.loads(art.extracted_json.read_bytes())
    assert ext["in_bits"] == 24 * orjson.loads(art.packed_json.read_bytes())["pairs"]
    assert ext["out_bits"] == (ext["in_bits"] // ext["n"]) * ext["m"]
    bits = bytes_to_bits(art.extracted_bin.read_bytes(), count=ext["out_bits"])
    assert 0.49 < bits.mean() < 0.51

    stages = [orjson.loads(line) for line in art.stages_jsonl.read_bytes().splitlines()]
    assert [r["stage"] for r in stages] == list(STAGE_NAMES)
    assert all(r["status"] == "done" for r in stages)


def test_outputs_do_not_depend_on_workers(small_runs):
    _, runs = small_runs
    a, b = runs[1].artifacts.run_dir, runs[2].artifacts.run_dir
    for name in DETERMINISTIC:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_rerun_from_extract_reproduces(small_runs):
    cfg, runs = small_runs
    art = runs[1].artifacts
    before = art.extracted_bin.read_bytes()
    summary = art.summary_json.read_bytes()

    result = run_pipeline(cfg, art, start_at="extract")
    assert art.extracted_bin.read_bytes() == before
    assert art.summary_json.read_bytes() == summary
    assert result.summary == load_summary(art.run_dir)


def test_resume_skips_completed_stages(small_runs):
    cfg, runs = small_runs
    art = runs[2].artifacts
    kept = (art.production_trace, art.filter_json, art.calibration_json, art.conditioned_trace)
    stamps = {p: p.stat().st_mtime_ns for p in kept}
    packed = art.packed_bin.read_bytes()
    n_records = len(art.stages_jsonl.read_bytes().splitlines())

    run_pipeline(cfg, art, workers=2, start_at="pack")

    assert {p: p.stat().st_mtime_ns for p in kept} == stamps
    assert art.packed_bin.read_bytes() == packed
    records = [orjson.loads(line) for line in art.stages_jsonl.read_bytes().splitlines()]
    resumed = STAGE_NAMES[STAGE_NAMES.index("pack") :]
    assert [r["stage"] for r in records[n_records:]] == list(resumed)


def test_unknown_start_stage(tmp_path):
    with pytest.raises(Exception, match="unknown stage"):
        run_pipeline(parse_config(SMALL), RunArtifacts(run_dir=tmp_path), start_at="nope")


def test_named_seeds_are_distinct():
    seeds = run_seeds(parse_config(SMALL))
    assert set(seeds) == {"production", "calibration", "extractor"}
    assert len(set(seeds.values())) == 3
    assert run_seeds(parse_config({**SMALL, "extractor": {"seed": 5}}))["extractor"] == 5


# --- failures ---

def test_laser_off_certifies_nothing(tmp_path):
    cfg = load_config(CONFIGS / "laser_off.json")
    art = RunArtifacts(run_dir=tmp_path / "off")
    with pytest.raises(StageError, match="no certifiable randomness") as exc:
        run_pipeline(cfg, art)
    assert exc.value.stage == "calibrate"

    stages = [orjson.loads(line) for line in art.stages_jsonl.read_bytes().splitlines()]
    assert stages[-1]["stage"] == "calibrate"
    assert stages[-1]["status"] == "failed"
    assert not art.summary_json.exists()


def test_ratio_failure_refused_unless_allowed(tmp_path):
    over = {**SMALL, "extractor": {"n": 15000, "m": 11500}, "battery": {"enabled": False}}
    with pytest.raises(StageError, match="ratio condition") as exc:
        run_pipeline(parse_config(over), RunArtifacts(run_dir=tmp_path / "refused"))
    assert exc.value.stage == "extract"

    allowed = {**over, "extractor": {"n": 15000, "m": 11500, "insecure_allow": True}}
    result = run_pipeline(parse_config(allowed), RunArtifacts(run_dir=tmp_path / "allowed"))
    assert not result.summary["ratio_ok"]
    assert not result.passed
    assert result.summary["battery_passed"] is None
