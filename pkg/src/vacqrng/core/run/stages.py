from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
import orjson
import structlog

from vacqrng.calibration.sweep import CSV_HEADER, calibrate_sweep
from vacqrng.core.errors import ConfigError, DspError, ExtractorError
from vacqrng.core.run.artifacts import RunArtifacts
from vacqrng.core.run.manager import write_json_atomic
from vacqrng.core.run.spec import PipelineConfig
from vacqrng.dsp.acf import (
    autocorrelation,
    envelope_autocorrelation,
    first_null_lag,
    first_zero_lag,
    zero_crossing,
)
from vacqrng.dsp.filters import (
    PASSBAND_RIPPLE_DB,
    STOPBAND_ATTEN_DB,
    FilterKernel,
    apply_filter,
    design_bandpass,
    gain_db,
)
from vacqrng.dsp.resample import condition_channel
from vacqrng.extractor.dimensions import check_dimensions, choose_dimensions
from vacqrng.extractor.packing import bits_to_bytes, bytes_to_bits, samples_to_bits
from vacqrng.extractor.seed import derive_seed_bits, read_seed_file, write_seed_file
from vacqrng.extractor.toeplitz import ToeplitzSpec, extract_stream
from vacqrng.source.sim import RawTrace, simulate_trace, sweep_calibration
from vacqrng.stattests.battery import run_battery
from vacqrng.stattests.correlation import compare_acf
from vacqrng.storage.tracefile import ingest_trace, list_traces, read_trace, write_trace

log = structlog.get_logger()

StageOutput = dict[str, Any]

# spawn keys of the named seed streams derived from PipelineConfig.seed
_SEED_DOMAINS = {"production": 0x9D0C, "calibration": 0xCA1B, "extractor": 0x5EED}


@dataclass(frozen=True, slots=True)
class StageContext:
    config: PipelineConfig
    artifacts: RunArtifacts
    base_dir: Path
    workers: int

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def run_seeds(config: PipelineConfig) -> dict[str, int]:
    """Named 64-bit seeds of a run; all follow from config.seed unless overridden."""
    seeds: dict[str, int] = {}
    for name, domain in _SEED_DOMAINS.items():
        state = np.random.SeedSequence(config.seed, spawn_key=(domain,)).generate_state(2, dtype=np.uint32)
        seeds[name] = int(state[0]) | (int(state[1]) << 32)
    if config.extractor.seed is not None:
        seeds["extractor"] = config.extractor.seed
    return seeds


def design_kernel(config: PipelineConfig) -> FilterKernel:
    low, high = config.band
    return design_bandpass(low, high, config.adc.sample_rate_gsps * 1e9, config.filter.n_taps)


def _read_json(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"missing intermediate artifact {path.name}; run the earlier stages first")
    return orjson.loads(path.read_bytes())


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    tmp.replace(path)


def _write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def kernel_to_dict(kernel: FilterKernel) -> dict[str, Any]:
    return {
        "taps": kernel.taps,
        "low_cut": kernel.low_cut,
        "high_cut": kernel.high_cut,
        "design_rate": kernel.design_rate,
        "cutoffs": list(kernel.cutoffs),
    }


def kernel_from_dict(d: dict[str, Any]) -> FilterKernel:
    return FilterKernel(
        taps=np.asarray(d["taps"], dtype=np.float64),
        low_cut=float(d["low_cut"]),
        high_cut=float(d["high_cut"]),
        design_rate=float(d["design_rate"]),
        cutoffs=(float(d["cutoffs"][0]), float(d["cutoffs"][1])),
    )


def _optional_lag(fn: Callable[[Any], int], profile: Any) -> int | None:
    try:
        return fn(profile)
    except DspError:
        return None


# ---------------------------
# Stages
# ---------------------------

def stage_source(ctx: StageContext) -> StageOutput:
    """Simulate (or ingest) the production trace and the calibration sweep."""
    cfg, art = ctx.config, ctx.artifacts
    art.ensure_dirs()

    production: RawTrace
    sweep: list[RawTrace]
    if cfg.source.mode == "ingest":
        assert cfg.source.trace_path is not None and cfg.source.calibration_dir is not None
        production = ingest_trace(ctx.resolve(cfg.source.trace_path))
        sweep = [ingest_trace(p) for p in list_traces(ctx.resolve(cfg.source.calibration_dir))]
        if not sweep:
            raise ConfigError(f"no .trc files in {cfg.source.calibration_dir}")
        kind = "ingest"
    else:
        adc = cfg.to_adc_spec()
        kernel = design_kernel(cfg) if cfg.source.mode == "reference" else None
        params = cfg.to_source_params(kernel)
        seeds = run_seeds(cfg)
        production = simulate_trace(params, adc, cfg.n_samples, seeds["production"], workers=ctx.workers)
        sweep = sweep_calibration(
            params,
            cfg.calibration_currents,
            adc,
            cfg.calibration.n_samples,
            seeds["calibration"],
            workers=ctx.workers,
        )
        kind = "simulate"

    write_trace(art.production_trace, production)
    for stale in list_traces(art.calibration_traces_dir):
        stale.unlink()
    for k, trace in enumerate(sweep):
        write_trace(art.calibration_traces_dir / f"cal_{k:02d}.trc", trace)

    return {
        "source": kind,
        "n_samples": production.n_samples,
        "photocurrent": production.photocurrent,
        "sweep_points": len(sweep),
    }


def stage_filter(ctx: StageContext) -> StageOutput:
    """
    Design the band-pass, check it against the ripple/attenuation targets
    and resolve the decimation factor from the filtered production trace.
    """
    cfg, art = ctx.config, ctx.artifacts
    production = read_trace(art.production_trace)
    kernel = design_kernel(cfg)
    if production.adc.sample_rate != kernel.design_rate:
        raise ConfigError(
            f"trace sample rate {production.adc.sample_rate:g} differs from "
            f"adc.sample_rate_gsps={cfg.adc.sample_rate_gsps}"
        )

    low, high, fs = kernel.low_cut, kernel.high_cut, kernel.design_rate
    pass_db = gain_db(kernel, np.linspace(1.1 * low, 0.9 * high, 512))
    stop_db = gain_db(kernel, np.concatenate([np.linspace(0.0, 0.25 * low, 64), [fs / 2]]))
    ripple = float(np.max(np.abs(pass_db)))
    atten = float(-np.max(stop_db))

    ds = cfg.downsample
    n = min(production.n_samples, ds.acf_samples + kernel.n_taps - 1)
    filtered = apply_filter(production.p_codes[:n], kernel)
    real = autocorrelation(filtered, ds.max_lag)
    env = envelope_autocorrelation(filtered, ds.max_lag)
    zero = _optional_lag(first_zero_lag, real)
    null = _optional_lag(first_null_lag, env)

    if ds.policy == "auto-first-zero":
        if null is None:
            raise DspError(f"auto decimation: no envelope null within max_lag={ds.max_lag}")
        factor = null
    else:
        assert ds.factor is not None
        factor = ds.factor
    if ds.phase >= factor:
        raise ConfigError(f"downsample.phase={ds.phase} must be < factor={factor}")

    half = factor // 2
    decimation = {
        "policy": ds.policy,
        "factor": factor,
        "phase": ds.phase,
        "pair_rate": fs / factor,
        "first_zero_lag": zero,
        "zero_crossing": zero_crossing(real) if zero is not None else None,
        "first_null_lag": null,
        "acf_at_factor": float(real.values[factor]) if factor <= ds.max_lag else None,
        "acf_at_half_factor": float(real.values[half]) if 1 <= half <= ds.max_lag else None,
    }
    payload = {
        "kernel": kernel_to_dict(kernel),
        "checks": {
            "passband_ripple_db": ripple,
            "stopband_atten_db": atten,
            "meets_spec": ripple <= PASSBAND_RIPPLE_DB and atten >= STOPBAND_ATTEN_DB,
        },
        "decimation": decimation,
    }
    write_json_atomic(art.filter_json, payload)
    _write_csv(
        art.acf_csv,
        ("lag", "value", "envelope", "bound99"),
        ((int(k), float(v), float(e), real.bound99) for k, v, e in zip(real.lags, real.values, env.values)),
    )
    log.info("pipeline.decimation_resolved", factor=factor, first_zero_lag=zero, first_null_lag=null)
    return {"factor": factor, "phase": ds.phase, "first_zero_lag": zero, "first_null_lag": null}


def _filter_state(art: RunArtifacts) -> tuple[FilterKernel, int, int]:
    f = _read_json(art.filter_json)
    return kernel_from_dict(f["kernel"]), int(f["decimation"]["factor"]), int(f["decimation"]["phase"])


def stage_calibrate(ctx: StageContext) -> StageOutput:
    cfg, art = ctx.config, ctx.artifacts
    kernel, factor, phase = _filter_state(art)
    traces = [read_trace(p) for p in list_traces(art.calibration_traces_dir)]
    cal = calibrate_sweep(traces, kernel, factor=factor, phase=phase, photocurrent=cfg.photocurrent)

    write_json_atomic(art.calibration_json, cal.to_dict())
    _write_csv(art.calibration_csv, CSV_HEADER, cal.csv_rows())
    return {"h_min": cal.budget.h_min, "gen_rate": cal.budget.gen_rate, "points": len(cal.points)}


def stage_downsample(ctx: StageContext) -> StageOutput:
    art = ctx.artifacts
    kernel, factor, phase = _filter_state(art)
    production = read_trace(art.production_trace)
    p = condition_channel(production.p_codes, kernel, factor, phase, production.adc)
    q = condition_channel(production.q_codes, kernel, factor, phase, production.adc)
    conditioned = RawTrace(
        p_codes=p,
        q_codes=q,
        adc=production.adc.with_sample_rate(production.adc.sample_rate / factor),
        photocurrent=production.photocurrent,
        seed=production.seed,
    )
    write_trace(art.conditioned_trace, conditioned)
    return {"pairs": conditioned.n_samples, "sample_rate": conditioned.adc.sample_rate}


def stage_pack(ctx: StageContext) -> StageOutput:
    art = ctx.artifacts
    cond = read_trace(art.conditioned_trace)
    bits = samples_to_bits(cond.p_codes, cond.q_codes, cond.adc.bits)
    _write_bytes(art.packed_bin, bits_to_bytes(bits))
    write_json_atomic(
        art.packed_json,
        {
            "bits": int(bits.size),
            "bits_per_code": cond.adc.bits,
            "pairs": cond.n_samples,
            "layout": "offset binary, MSB first, p then q per pair",
        },
    )
    return {"bits": int(bits.size)}


def stage_extract(ctx: StageContext) -> StageOutput:
    cfg, art = ctx.config, ctx.artifacts
    ex = cfg.extractor
    budget = _read_json(art.calibration_json)["budget"]
    h_min, raw_bits = float(budget["h_min"]), int(budget["raw_bits"])
    packed = _read_json(art.packed_json)
    bits = bytes_to_bits(art.packed_bin.read_bytes(), count=int(packed["bits"]))

    if ex.m is None:
        dims = choose_dimensions(h_min, raw_bits, ex.n, ex.target_eps_exp)
    else:
        dims = check_dimensions(ex.n, ex.m, h_min, raw_bits)
        if dims.eps_exp < ex.target_eps_exp:
            log.warning("extract.below_target", eps_exp=dims.eps_exp, target=ex.target_eps_exp)
    if not dims.ratio_ok:
        if not ex.insecure_allow:
            raise ExtractorError(
                f"ratio condition fails: m/n={dims.m}/{dims.n} is not below h_min/raw_bits={h_min:.3f}/{raw_bits}"
            )
        log.warning("extract.insecure_allow", n=dims.n, m=dims.m, h_min=h_min)

    seed_len = dims.n + dims.m - 1
    if ex.seed_file is not None:
        seed_bits = read_seed_file(ctx.resolve(ex.seed_file), seed_len)
        seed_source = "file"
    else:
        seed_bits = derive_seed_bits(seed_len, run_seeds(cfg)["extractor"])
        seed_source = "derived"
    write_seed_file(art.seed_bin, seed_bits)

    spec = ToeplitzSpec(n=dims.n, m=dims.m, seed=seed_bits, epsilon_exp=dims.eps_exp)
    out = extract_stream(bits, spec, workers=ctx.workers)
    _write_bytes(art.extracted_bin, bits_to_bytes(out))

    blocks = bits.size // dims.n
    write_json_atomic(
        art.extracted_json,
        {
            **dims.to_dict(),
            "h_min": h_min,
            "raw_bits": raw_bits,
            "target_eps_exp": ex.target_eps_exp,
            "insecure_allow": ex.insecure_allow,
            "seed_source": seed_source,
            "in_bits": int(bits.size),
            "blocks": int(blocks),
            "out_bits": int(out.size),
        },
    )
    return {"n": dims.n, "m": dims.m, "eps_exp": dims.eps_exp, "ratio_ok": dims.ratio_ok, "out_bits": int(out.size)}


def stage_test(ctx: StageContext) -> StageOutput:
    cfg, art = ctx.config, ctx.artifacts
    extracted = _read_json(art.extracted_json)
    bits = bytes_to_bits(art.extracted_bin.read_bytes(), count=int(extracted["out_bits"]))
    cond = read_trace(art.conditioned_trace)

    cmp = compare_acf(cond.p_codes, bits, cfg.acf.max_lag)
    write_json_atomic(art.acf_compare_json, cmp.summary())
    _write_csv(
        art.acf_compare_csv,
        ("lag", "before", "after", "bound99_before", "bound99_after"),
        (
            (int(k), float(b), float(a), cmp.bound99_before, cmp.bound99_after)
            for k, b, a in zip(cmp.before.lags, cmp.before.values, cmp.after.values)
        ),
    )

    out: StageOutput = {"acf_after_within_bound": cmp.after.fraction_within_bound()}
    if cfg.battery.enabled:
        b = cfg.battery
        report = run_battery(bits, b.stream_bits, b.n_streams, alpha=b.alpha, workers=ctx.workers)
        write_json_atomic(art.battery_json, report.to_dict())
        _write_bytes(art.battery_txt, report.to_table().encode("utf-8"))
        out["battery_passed"] = report.passed
    return out


def stage_summarize(ctx: StageContext) -> StageOutput:
    cfg, art = ctx.config, ctx.artifacts
    cal = _read_json(art.calibration_json)
    filt = _read_json(art.filter_json)
    ext = _read_json(art.extracted_json)
    acf_cmp = _read_json(art.acf_compare_json)
    battery = _read_json(art.battery_json) if cfg.battery.enabled else None

    budget = cal["budget"]
    dec = filt["decimation"]
    verdicts = {t["name"]: t["verdict"] for t in battery["tests"]} if battery else {}
    battery_passed = battery["passed"] if battery else None
    passed = bool(ext["ratio_ok"]) and battery_passed is not False

    projected = cal["projected_power_gain"]["budget"]
    summary = {
        "config_hash": cfg.config_hash(),
        "name": cfg.name,
        "h_min": budget["h_min"],
        "h_min_reported": budget["h_min_reported"],
        "h_min_clamped": budget["clamped"],
        "delta_p": budget["delta_p"],
        "delta_q": budget["delta_q"],
        "k_p": budget["k_p"],
        "k_q": budget["k_q"],
        "pair_rate": budget["pair_rate"],
        "gen_rate": budget["gen_rate"],
        "eps_exp": ext["eps_exp"],
        "eps_exp_convention": ext["eps_exp_convention"],
        "ratio_ok": ext["ratio_ok"],
        "extractor": {k: ext[k] for k in ("n", "m", "seed_source", "in_bits", "out_bits", "blocks")},
        "filter": filt["checks"],
        "decimation": dec,
        "acf": acf_cmp,
        "verdicts": verdicts,
        "battery_passed": battery_passed,
        "projections": {
            "power_gain": {
                "gain_db": cal["projected_power_gain"]["gain_db"],
                "h_min": projected["h_min"] if projected else None,
                "gen_rate": projected["gen_rate"] if projected else None,
            },
            "doubled_pair_rate": {
                "pair_rate": 2.0 * budget["pair_rate"],
                "gen_rate": 2.0 * budget["gen_rate"],
                "acf_lag1": dec["acf_at_half_factor"],
            },
        },
        "passed": passed,
    }
    write_json_atomic(art.summary_json, summary)
    return {"passed": passed}
