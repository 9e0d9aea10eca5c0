from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any, Literal, Optional

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from vacqrng.core.errors import ConfigError
from vacqrng.dsp.filters import FilterKernel
from vacqrng.source.adc import AdcSpec
from vacqrng.source.scenario import REFERENCE, reference_operating_point
from vacqrng.source.sim import LowFreqNoise, SourceParams

# -----------------------
# Config building blocks
# -----------------------

SourceMode = Literal["reference", "explicit", "ingest"]
DownsamplePolicy = Literal["auto-first-zero", "fixed"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SourceSection(_Section):
    """
    reference: simulator parameters back-solved from the published operating point
    explicit:  simulator parameters given below
    ingest:    real captures; trace_path and calibration_dir are required
    """
    mode: SourceMode = "reference"
    photocurrent_ua: float = Field(70.0, ge=0, description="operating photocurrent, uA")

    # explicit mode
    quantum_slope_v2_per_a: Optional[float] = Field(None, gt=0)
    classical_noise_v2: float = Field(0.0, ge=0)
    electronic_noise_v2: float = Field(0.0, ge=0)
    lowfreq_amplitude_mv: float = Field(0.0, ge=0)
    lowfreq_cutoff_ghz: float = Field(0.2, gt=0)
    tia_bandwidth_ghz: float = Field(2.5, gt=0)

    # reference mode
    electronic_share: float = Field(0.25, ge=0, lt=1)
    lowfreq_ratio: float = Field(0.5, ge=0)

    # ingest mode
    trace_path: Optional[str] = None
    calibration_dir: Optional[str] = None

    @model_validator(mode="after")
    def _validate_mode(self) -> "SourceSection":
        if self.mode == "explicit" and self.quantum_slope_v2_per_a is None:
            raise ValueError("source.quantum_slope_v2_per_a is required when mode='explicit'")
        if self.mode == "ingest" and (self.trace_path is None or self.calibration_dir is None):
            raise ValueError("source.trace_path and source.calibration_dir are required when mode='ingest'")
        return self


class AdcSection(_Section):
    bits: int = Field(12, ge=2, le=16)
    full_scale_mv: float = Field(500.0, gt=0, description="peak-to-peak input span, mV")
    sample_rate_gsps: float = Field(20.0, gt=0)


class FilterSection(_Section):
    low_cut_ghz: float = Field(0.2, gt=0)
    high_cut_ghz: float = Field(2.2, gt=0)
    n_taps: int = Field(511, ge=63)

    @model_validator(mode="after")
    def _validate_band(self) -> "FilterSection":
        if self.low_cut_ghz >= self.high_cut_ghz:
            raise ValueError("filter.low_cut_ghz must be below filter.high_cut_ghz")
        if self.n_taps % 2 == 0:
            raise ValueError("filter.n_taps must be odd")
        return self


class DownsampleSection(_Section):
    policy: DownsamplePolicy = "auto-first-zero"
    factor: Optional[int] = Field(None, ge=1)
    phase: int = Field(0, ge=0)
    max_lag: int = Field(64, ge=2, description="lags searched by the auto policy")
    acf_samples: int = Field(1 << 20, ge=1024, description="filtered samples used for the decimation ACF")

    @model_validator(mode="after")
    def _validate_policy(self) -> "DownsampleSection":
        if self.policy == "fixed" and self.factor is None:
            raise ValueError("downsample.factor is required when policy='fixed'")
        if self.factor is not None and self.phase >= self.factor:
            raise ValueError("downsample.phase must be < downsample.factor")
        return self


def _default_currents() -> list[float]:
    return [10.0 + 60.0 * k / 7 for k in range(8)]


class CalibrationSection(_Section):
    currents_ua: list[float] = Field(default_factory=_default_currents, min_length=2)
    n_samples: int = Field(1_000_000, ge=10_000)

    @model_validator(mode="after")
    def _validate_currents(self) -> "CalibrationSection":
        if any(i < 0 for i in self.currents_ua):
            raise ValueError("calibration.currents_ua must be >= 0")
        return self


class ExtractorSection(_Section):
    n: int = Field(15000, ge=2)
    m: Optional[int] = Field(None, ge=1, description="None chooses m for target_eps_exp")
    target_eps_exp: float = Field(63.0, ge=0)
    seed_file: Optional[str] = None
    seed: Optional[int] = Field(None, ge=0, lt=1 << 64, description="derived from the run seed when unset")
    insecure_allow: bool = False


class BatterySection(_Section):
    enabled: bool = True
    stream_bits: int = Field(1_000_000, ge=1024)
    n_streams: int = Field(100, ge=1)
    alpha: float = Field(0.01, gt=0, lt=1)


class AcfSection(_Section):
    max_lag: int = Field(100, ge=1, description="lags of the before/after-hash comparison")


# -----------------------
# PipelineConfig (top-level)
# -----------------------

class PipelineConfig(_Section):
    """
    One end-to-end run: source, conditioning, calibration, extraction and
    the statistical battery. Persisted verbatim to the run's config.json.

    Physical quantities carry their unit in the field name and are converted
    to SI only in to_adc_spec() / to_source_params().
    """
    schema_version: int = Field(default=1)
    name: str = Field(default="reference")

    seed: int = Field(20_250_070, ge=0, lt=1 << 64)
    n_samples: int = Field(10_000_000, ge=10_000, description="production trace length per quadrature")
    workers: int = Field(1, ge=1, description="intra-stage threads; never changes results")

    source: SourceSection = Field(default_factory=SourceSection)
    adc: AdcSection = Field(default_factory=AdcSection)
    filter: FilterSection = Field(default_factory=FilterSection)
    downsample: DownsampleSection = Field(default_factory=DownsampleSection)
    calibration: CalibrationSection = Field(default_factory=CalibrationSection)
    extractor: ExtractorSection = Field(default_factory=ExtractorSection)
    battery: BatterySection = Field(default_factory=BatterySection)
    acf: AcfSection = Field(default_factory=AcfSection)

    @model_validator(mode="after")
    def _validate_band_vs_rate(self) -> "PipelineConfig":
        if self.filter.high_cut_ghz >= self.adc.sample_rate_gsps / 2:
            raise ValueError("filter.high_cut_ghz must be below Nyquist")
        if self.extractor.n % (2 * self.adc.bits):
            raise ValueError("extractor.n must be a multiple of 2 * adc.bits")
        return self

    # ---- unit conversion ------------------------------------------------

    @property
    def photocurrent(self) -> float:
        return self.source.photocurrent_ua * 1e-6

    @property
    def calibration_currents(self) -> list[float]:
        return [i * 1e-6 for i in self.calibration.currents_ua]

    @property
    def band(self) -> tuple[float, float]:
        return self.filter.low_cut_ghz * 1e9, self.filter.high_cut_ghz * 1e9

    def to_adc_spec(self) -> AdcSpec:
        return AdcSpec(
            bits=self.adc.bits,
            full_scale=self.adc.full_scale_mv * 1e-3,
            sample_rate=self.adc.sample_rate_gsps * 1e9,
        )

    def to_source_params(self, kernel: FilterKernel | None = None) -> SourceParams:
        """
        Simulator parameters at the operating photocurrent. Reference mode needs
        the band-pass kernel to back-solve through the conditioning chain.
        """
        s = self.source
        if s.mode == "ingest":
            raise ConfigError("source.mode='ingest' has no simulator parameters")
        if s.mode == "reference":
            if kernel is None:
                raise ConfigError("reference mode needs the band-pass kernel")
            base = reference_operating_point(
                kernel,
                self.to_adc_spec(),
                point=REFERENCE,
                electronic_share=s.electronic_share,
                lowfreq_ratio=s.lowfreq_ratio,
                lowfreq_cutoff=s.lowfreq_cutoff_ghz * 1e9,
            )
            return base.with_photocurrent(self.photocurrent)

        assert s.quantum_slope_v2_per_a is not None
        return SourceParams(
            photocurrent=self.photocurrent,
            quantum_slope=s.quantum_slope_v2_per_a,
            classical_noise_var=s.classical_noise_v2,
            electronic_noise_var=s.electronic_noise_v2,
            lowfreq_noise=LowFreqNoise(
                amplitude=s.lowfreq_amplitude_mv * 1e-3,
                cutoff=s.lowfreq_cutoff_ghz * 1e9,
            ),
            tia_bandwidth=s.tia_bandwidth_ghz * 1e9,
        )

    # ---- identity ---------------------------------------------------------

    def to_canonical_dict(self) -> dict[str, Any]:
        """
        Stable JSON-compatible dict; this is what gets hashed. `workers` is
        left out because it never changes results.
        """
        d = self.model_dump(mode="json")
        d.pop("workers", None)
        return d

    def config_hash(self) -> str:
        blob = orjson.dumps(self.to_canonical_dict(), option=orjson.OPT_SORT_KEYS)
        return hashlib.sha256(blob).hexdigest()


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(payload: Any) -> PipelineConfig:
    try:
        return PipelineConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"invalid pipeline config: {_format_validation(exc)}") from exc


def load_config(path: Path) -> PipelineConfig:
    if not path.exists():
        raise ConfigError(f"config not found: {path}")
    try:
        payload = orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    return parse_config(payload)
