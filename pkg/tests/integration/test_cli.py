from __future__ import annotations

from pathlib import Path

import numpy as np
import orjson
import pytest

from vacqrng.app.main import main
from vacqrng.extractor.packing import bits_to_bytes


@pytest.fixture(scope="module")
def trace_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("cli") / "prod.trc"
    assert main(["--log-level", "WARNING", "simulate", "--samples", "20000", "--seed", "3", "-o", str(path)]) == 0
    return path


def _json_out(capsys) -> dict:
    return orjson.loads(capsys.readouterr().out)


# --- single-purpose subcommands ---

def test_simulate_with_sweep(tmp_path, capsys):
    out = tmp_path / "t.trc"
    sweep = tmp_path / "sweep"
    code = main(["simulate", "--samples", "20000", "-o", str(out), "--sweep-dir", str(sweep)])
    assert code == 0
    info = _json_out(capsys)
    assert info["n_samples"] == 20000
    assert info["sweep_points"] == 8
    assert len(list(sweep.glob("*.trc"))) == 8


def test_calibrate_sweep_dir(tmp_path, capsys):
    sweep = tmp_path / "sweep"
    cfg = tmp_path / "cfg.json"
    cfg.write_bytes(orjson.dumps({"calibration": {"currents_ua": [10.0, 40.0, 70.0], "n_samples": 100_000}}))
    assert main(["simulate", "--config", str(cfg), "--samples", "10000", "-o", str(tmp_path / "x.trc"),
                 "--sweep-dir", str(sweep)]) == 0
    capsys.readouterr()

    csv_path = tmp_path / "cal.csv"
    assert main(["calibrate", str(sweep), "--factor", "10", "--csv", str(csv_path)]) == 0
    res = _json_out(capsys)
    assert res["h_min"] == pytest.approx(17.5, abs=0.4)
    assert res["gen_rate"] == pytest.approx(res["h_min"] * 2e9)
    assert csv_path.read_text().splitlines()[0].startswith("photocurrent_ua,var_p,var_q")


def test_autocorr_csv(trace_file, capsys):
    assert main(["autocorr", str(trace_file), "--max-lag", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "lag,value,bound99"
    assert len(lines) == 7
    assert lines[1].startswith("0,1.0,")


def test_autocorr_envelope_of_filtered(trace_file, capsys):
    assert main(["autocorr", str(trace_file), "--max-lag", "20", "--filtered", "--envelope"]) == 0
    rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    assert all(0.0 <= float(r[1]) <= 1.0 + 1e-9 for r in rows)


def test_extract_refuses_ratio_failure(trace_file, tmp_path, capsys):
    out = tmp_path / "out.bin"
    code = main(["extract", str(trace_file), "--n", "240", "--m", "200", "--hmin", "17.5", "-o", str(out)])
    assert code == 1
    assert "refused" in _json_out(capsys)
    assert not out.exists()


def test_extract_with_seed_file(trace_file, tmp_path, capsys):
    seed = tmp_path / "seed.bin"
    seed.write_bytes(bytes(range(256)) * 2)
    args = ["extract", str(trace_file), "--n", "240", "--m", "100", "--hmin", "17.5", "--seed-file", str(seed)]
    assert main([*args, "-o", str(tmp_path / "a.bin")]) == 0
    report = _json_out(capsys)
    assert report["out_bits"] == (20000 * 24 // 240) * 100
    assert report["ratio_ok"]
    assert main(["--workers", "3", *args, "-o", str(tmp_path / "b.bin")]) == 0
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_extract_os_entropy_seed_is_saved(trace_file, tmp_path, capsys):
    out = tmp_path / "c.bin"
    assert main(["extract", str(trace_file), "--n", "240", "--m", "100", "--hmin", "17.5", "-o", str(out)]) == 0
    assert (tmp_path / "c.bin.seed").stat().st_size == -(-339 // 8)


def test_battery_on_constant_file(tmp_path, capsys):
    path = tmp_path / "zeros.bin"
    path.write_bytes(bits_to_bytes(np.zeros(4096, dtype=np.uint8)))
    assert main(["test", str(path), "--stream-bits", "2048", "--n-streams", "2"]) == 1
    assert "FAILED" in capsys.readouterr().out


def test_bench_json(capsys):
    assert main(["bench", "--n", "240", "--m", "100", "--blocks", "20", "--minwall", "0", "--json"]) == 0
    assert _json_out(capsys)["input_mbps"] > 0


# --- errors ---

def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json"), "--runs-dir", str(tmp_path)]) == 2
    assert "config not found" in capsys.readouterr().err


def test_missing_input_files_exit_code(tmp_path, trace_file, capsys):
    missing = tmp_path / "missing.bin"
    assert main(["test", str(missing), "--stream-bits", "1000", "--n-streams", "2"]) == 2
    assert "cannot read" in capsys.readouterr().err
    assert main(["autocorr", str(tmp_path / "missing.trc")]) == 2
    assert "not found" in capsys.readouterr().err
    args = ["extract", str(trace_file), "--n", "240", "--m", "100", "--hmin", "17.5",
            "--seed-file", str(missing), "-o", str(tmp_path / "x.bin")]
    assert main(args) == 2
    assert "seed file" in capsys.readouterr().err


def test_bad_simulate_arguments_exit_code(tmp_path, capsys):
    out = tmp_path / "t.trc"
    assert main(["simulate", "--samples", "0", "-o", str(out)]) == 2
    assert "--samples must be > 0" in capsys.readouterr().err
    assert main(["simulate", "--samples", "1000", "--photocurrent-ua", "-5", "-o", str(out)]) == 2
    assert "photocurrent" in capsys.readouterr().err
    assert not out.exists()


def test_from_stage_needs_run_dir(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", str(tmp_path / "c.json"), "--from-stage", "extract"])
    assert exc.value.code == 2


# --- run / report ---

def test_run_then_report(tmp_path, capsys):
    cfg = tmp_path / "small.json"
    cfg.write_bytes(
        orjson.dumps(
            {
                "seed": 5,
                "n_samples": 120_000,
                "downsample": {"policy": "fixed", "factor": 10, "max_lag": 40, "acf_samples": 50_000},
                "calibration": {"currents_ua": [10.0, 70.0], "n_samples": 100_000},
                "battery": {"enabled": False},
                "acf": {"max_lag": 10},
            }
        )
    )
    runs = tmp_path / "runs"
    assert main(["run", str(cfg), "--runs-dir", str(runs), "--run-id", "r1"]) == 0
    head = _json_out(capsys)
    assert head["ratio_ok"]
    assert head["passed"]
    assert head["gen_rate_gbps"] == pytest.approx(head["h_min"] * 2.0, abs=0.2)

    run_dir = runs / "r1"
    assert main(["run", str(cfg), "--run-dir", str(run_dir), "--from-stage", "pack"]) == 0
    capsys.readouterr()

    assert main(["report", str(run_dir)]) == 0
    text = capsys.readouterr().out
    assert "h_min:" in text
    assert "Gbit/s" in text
    assert main(["report", str(run_dir), "--json"]) == 0
    assert _json_out(capsys)["battery_passed"] is None
