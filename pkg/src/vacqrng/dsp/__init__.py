from __future__ import annotations

from vacqrng.dsp.acf import (
    AcfProfile,
    autocorrelation,
    envelope_autocorrelation,
    first_null_lag,
    first_zero_lag,
    zero_crossing,
)
from vacqrng.dsp.filters import (
    FilterKernel,
    apply_filter,
    design_bandpass,
    frequency_response,
    gain_db,
    power_spectrum,
)
from vacqrng.dsp.resample import condition_channel, downsample

__all__ = [
    "AcfProfile",
    "FilterKernel",
    "apply_filter",
    "autocorrelation",
    "condition_channel",
    "design_bandpass",
    "downsample",
    "envelope_autocorrelation",
    "first_null_lag",
    "first_zero_lag",
    "frequency_response",
    "gain_db",
    "power_spectrum",
    "zero_crossing",
]
