from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Any

import numpy as np
import orjson
import structlog

from vacqrng.calibration.sweep import CSV_HEADER, calibrate_sweep
from vacqrng.core.config.settings import settings
from vacqrng.core.errors import ConfigError, ExtractorError, InputError
from vacqrng.core.logging.setup import clear_context
from vacqrng.core.run.artifacts import RunArtifacts
from vacqrng.core.run.manager import RunManager, write_json_atomic
from vacqrng.core.run.pipeline import load_summary, run_pipeline
from vacqrng.core.run.spec import PipelineConfig, load_config
from vacqrng.core.run.stages import design_kernel, run_seeds
from vacqrng.dsp.acf import autocorrelation, envelope_autocorrelation
from vacqrng.dsp.filters import apply_filter, design_bandpass
from vacqrng.evaluation.bench import measure_extractor_throughput
from vacqrng.extractor.dimensions import check_dimensions
from vacqrng.extractor.packing import bits_to_bytes, bytes_to_bits, samples_to_bits
from vacqrng.extractor.seed import os_entropy_seed, read_seed_file, write_seed_file
from vacqrng.extractor.toeplitz import ToeplitzSpec, extract_stream
from vacqrng.source.scenario import REFERENCE
from vacqrng.source.sim import simulate_trace, sweep_calibration
from vacqrng.stattests.battery import run_battery
from vacqrng.storage.tracefile import ingest_trace, list_traces, write_trace

log = structlog.get_logger()

EXIT_OK = 0
EXIT_FAILED = 1


def _emit_json(payload: Any) -> None:
    sys.stdout.write(
        orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY).decode("utf-8") + "\n"
    )


def _workers(args: argparse.Namespace) -> int:
    return args.workers if args.workers is not None else settings.workers


def _config(args: argparse.Namespace) -> PipelineConfig:
    path = getattr(args, "config", None)
    return load_config(Path(path)) if path else PipelineConfig()


def _read_input(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


# ---------------------------
# simulate
# ---------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    if args.samples <= 0:
        raise ConfigError(f"--samples must be > 0 (got {args.samples})")
    cfg = _config(args)
    if cfg.source.mode == "ingest":
        raise ConfigError("simulate needs a reference or explicit source, not ingest")
    seed = args.seed if args.seed is not None else settings.default_seed
    kernel = design_kernel(cfg) if cfg.source.mode == "reference" else None
    params = cfg.to_source_params(kernel).with_photocurrent(args.photocurrent_ua * 1e-6)
    adc = cfg.to_adc_spec()

    trace = simulate_trace(params, adc, args.samples, seed, workers=_workers(args))
    write_trace(Path(args.output), trace)
    out: dict[str, Any] = {"trace": args.output, "n_samples": trace.n_samples, "photocurrent": trace.photocurrent}

    if args.sweep_dir:
        sweep_dir = Path(args.sweep_dir)
        sweep = sweep_calibration(
            params, cfg.calibration_currents, adc, cfg.calibration.n_samples, seed, workers=_workers(args)
        )
        for k, t in enumerate(sweep):
            write_trace(sweep_dir / f"cal_{k:02d}.trc", t)
        out["sweep_dir"] = str(sweep_dir)
        out["sweep_points"] = len(sweep)
    _emit_json(out)
    return EXIT_OK


# ---------------------------
# calibrate
# ---------------------------

def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    traces = [ingest_trace(p) for p in list_traces(Path(args.trace_dir))]
    if not traces:
        raise ConfigError(f"no .trc files in {args.trace_dir}")
    low, high = cfg.band
    kernel = design_bandpass(low, high, traces[0].adc.sample_rate, cfg.filter.n_taps)
    factor = args.factor or cfg.downsample.factor or REFERENCE.decimation
    current_ua = args.operating_current_ua
    if current_ua is None:
        current_ua = cfg.source.photocurrent_ua

    cal = calibrate_sweep(traces, kernel, factor=factor, phase=0, photocurrent=current_ua * 1e-6)
    payload = cal.to_dict()
    if args.output:
        write_json_atomic(Path(args.output), payload)
    if args.csv:
        with Path(args.csv).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            w.writerows(cal.csv_rows())
    _emit_json({k: payload[k] for k in (
        "slope_p", "slope_q", "intercept_p", "intercept_q",
        "k_p", "k_q", "delta_p", "delta_q", "h_min", "gen_rate",
    )})
    return EXIT_OK


# ---------------------------
# autocorr
# ---------------------------

def cmd_autocorr(args: argparse.Namespace) -> int:
    cfg = _config(args)
    trace = ingest_trace(Path(args.trace))
    x: np.ndarray = trace.channel(args.channel)
    if args.filtered:
        low, high = cfg.band
        x = apply_filter(x, design_bandpass(low, high, trace.adc.sample_rate, cfg.filter.n_taps))
    profile = envelope_autocorrelation(x, args.max_lag) if args.envelope else autocorrelation(x, args.max_lag)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("lag", "value", "bound99"))
    w.writerows(profile.to_rows())
    return EXIT_OK


# ---------------------------
# extract
# ---------------------------

def cmd_extract(args: argparse.Namespace) -> int:
    trace = ingest_trace(Path(args.input))
    raw_bits = args.raw_bits if args.raw_bits is not None else 2 * trace.adc.bits
    if raw_bits != 2 * trace.adc.bits:
        raise ExtractorError(f"--raw-bits={raw_bits} disagrees with the {trace.adc.bits}-bit trace")

    dims = check_dimensions(args.n, args.m, args.hmin, raw_bits)
    report: dict[str, Any] = dims.to_dict()
    if not dims.ratio_ok and not args.insecure_allow:
        report["refused"] = "ratio condition m/n < h_min/raw_bits fails; pass --insecure-allow to override"
        _emit_json(report)
        log.error("extract.refused", n=args.n, m=args.m, h_min=args.hmin, raw_bits=raw_bits)
        return EXIT_FAILED

    out_path = Path(args.output)
    seed_len = args.n + args.m - 1
    if args.seed_file:
        seed_bits = read_seed_file(Path(args.seed_file), seed_len)
        report["seed_source"] = args.seed_file
    else:
        seed_bits = os_entropy_seed(seed_len)
        seed_path = out_path.with_name(out_path.name + ".seed")
        write_seed_file(seed_path, seed_bits)
        report["seed_source"] = f"os entropy, saved to {seed_path}"

    bits = samples_to_bits(trace.p_codes, trace.q_codes, trace.adc.bits)
    spec = ToeplitzSpec(n=args.n, m=args.m, seed=seed_bits, epsilon_exp=dims.eps_exp)
    out = extract_stream(bits, spec, workers=_workers(args))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(bits_to_bytes(out))

    report.update({"in_bits": int(bits.size), "out_bits": int(out.size), "output": str(out_path)})
    _emit_json(report)
    return EXIT_OK if dims.ratio_ok else EXIT_FAILED


# ---------------------------
# test
# ---------------------------

def cmd_test(args: argparse.Namespace) -> int:
    data = _read_input(args.input)
    bits = bytes_to_bits(data)
    report = run_battery(bits, args.stream_bits, args.n_streams, alpha=args.alpha, workers=_workers(args))
    if args.json:
        _emit_json(report.to_dict())
    else:
        sys.stdout.write(report.to_table())
    return EXIT_OK if report.passed else EXIT_FAILED


# ---------------------------
# run / report
# ---------------------------

def cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    cfg = load_config(config_path)
    workers = args.workers if args.workers is not None else cfg.workers

    if args.run_dir:
        artifacts = RunArtifacts(run_dir=Path(args.run_dir))
        if not artifacts.run_dir.is_dir():
            raise ConfigError(f"run directory not found: {artifacts.run_dir}")
    else:
        manager = RunManager(Path(args.runs_dir) if args.runs_dir else settings.runs_dir)
        info = manager.create_run(
            seed=cfg.seed,
            config_snapshot=cfg.model_dump(mode="json"),
            config_hash=cfg.config_hash(),
            seeds=run_seeds(cfg),
            run_id=args.run_id,
        )
        artifacts = info.artifacts

    try:
        result = run_pipeline(
            cfg,
            artifacts,
            base_dir=config_path.resolve().parent,
            workers=workers,
            start_at=args.from_stage,
        )
    finally:
        clear_context()

    _emit_json({"run_dir": str(artifacts.run_dir), **_headline(result.summary)})
    return EXIT_OK if result.passed else EXIT_FAILED


def _headline(summary: dict[str, Any]) -> dict[str, Any]:
    return {
        "h_min": summary["h_min_reported"],
        "delta_p": summary["delta_p"],
        "delta_q": summary["delta_q"],
        "gen_rate_gbps": summary["gen_rate"] / 1e9,
        "eps_exp": summary["eps_exp"],
        "ratio_ok": summary["ratio_ok"],
        "verdicts": summary["verdicts"],
        "passed": summary["passed"],
    }


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    summary = load_summary(run_dir)
    if args.json:
        _emit_json(summary)
        return EXIT_OK if summary["passed"] else EXIT_FAILED

    dec = summary["decimation"]
    proj = summary["projections"]
    lines = [
        f"run:            {run_dir}",
        f"config hash:    {summary['config_hash'][:16]}",
        f"h_min:          {summary['h_min_reported']:.1f} bits/pair"
        + (" (clamped)" if summary["h_min_clamped"] else ""),
        f"delta_p/q:      {summary['delta_p']:.4g} / {summary['delta_q']:.4g}",
        f"decimation:     {dec['factor']} ({dec['pair_rate'] / 1e9:g} GS/s, policy {dec['policy']})",
        f"gen rate:       {summary['gen_rate'] / 1e9:.2f} Gbit/s",
        f"extractor:      {summary['extractor']['m']} x {summary['extractor']['n']}, "
        f"eps_exp {summary['eps_exp']:.2f}, ratio {'ok' if summary['ratio_ok'] else 'FAILS'}",
        f"after-hash ACF: {summary['acf']['after']['fraction_within_bound'] * 100:.1f}% of lags within 99% bound",
    ]
    gain = proj["power_gain"]
    if gain["h_min"] is not None:
        lines.append(
            f"+{gain['gain_db']:g} dB power: {gain['h_min']:.1f} bits/pair, {gain['gen_rate'] / 1e9:.1f} Gbit/s"
        )
    sys.stdout.write("\n".join(lines) + "\n")

    battery_txt = RunArtifacts(run_dir=run_dir).battery_txt
    if battery_txt.exists():
        sys.stdout.write("\n" + battery_txt.read_text(encoding="utf-8"))
    return EXIT_OK if summary["passed"] else EXIT_FAILED


# ---------------------------
# bench
# ---------------------------

def cmd_bench(args: argparse.Namespace) -> int:
    result = measure_extractor_throughput(
        n=args.n, m=args.m, n_blocks=args.blocks, workers=_workers(args), minwall=args.minwall
    )
    if args.json:
        _emit_json(result.to_dict())
    else:
        sys.stdout.write(
            f"n={result.n} m={result.m} blocks={result.n_blocks} workers={result.workers}: "
            f"{result.input_mbps:.1f} Mbit/s in, {result.output_mbps:.1f} Mbit/s out "
            f"({result.per_core_mbps:.1f} Mbit/s per core)\n"
        )
    return EXIT_OK
