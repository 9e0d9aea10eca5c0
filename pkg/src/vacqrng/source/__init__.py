from __future__ import annotations

from vacqrng.source.adc import AdcSpec, quantize, quantize_array, requantize
from vacqrng.source.sim import (
    LowFreqNoise,
    RawTrace,
    SourceParams,
    simulate_trace,
    sweep_calibration,
)

__all__ = [
    "AdcSpec",
    "LowFreqNoise",
    "RawTrace",
    "SourceParams",
    "quantize",
    "quantize_array",
    "requantize",
    "simulate_trace",
    "sweep_calibration",
]
