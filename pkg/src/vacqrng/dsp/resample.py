from __future__ import annotations

from typing import TypeVar

import numpy as np
import numpy.typing as npt
from scipy import signal

from vacqrng.core.errors import ConfigError, DspError, InsufficientDataError
from vacqrng.dsp.filters import FilterKernel
from vacqrng.source.adc import AdcSpec, requantize

T = TypeVar("T", bound=np.generic)

# fixed so conditioned output never depends on host settings
CONDITION_CHUNK = 1 << 20


def downsample(x: npt.NDArray[T], factor: int, phase: int = 0) -> npt.NDArray[T]:
    """Keep x[phase], x[phase + factor], ..."""
    if factor < 1:
        raise DspError("factor must be >= 1")
    if not 0 <= phase < factor:
        raise DspError("phase must satisfy 0 <= phase < factor")
    return x[phase::factor]


def condition_channel(
    codes: npt.ArrayLike,
    kernel: FilterKernel,
    factor: int,
    phase: int,
    adc: AdcSpec,
) -> npt.NDArray[np.int16]:
    """
    Band-pass (valid region), decimate and round back onto the ADC code grid.

    Works in fixed-size chunks of filter output; chunk k reads the input
    slice it needs plus n_taps - 1 samples of overlap, so no output sample
    sees a chunk edge.
    """
    x = np.asarray(codes)
    if factor < 1 or not 0 <= phase < factor:
        raise DspError("invalid decimation factor/phase")
    if factor > CONDITION_CHUNK:
        raise ConfigError(f"decimation factor {factor} exceeds the conditioning chunk of {CONDITION_CHUNK} samples")
    n_out = x.size - kernel.n_taps + 1
    if n_out <= 0:
        raise InsufficientDataError(
            f"input length {x.size} must exceed the kernel length {kernel.n_taps}"
        )

    step = CONDITION_CHUNK - CONDITION_CHUNK % factor
    parts: list[npt.NDArray[np.int16]] = []
    for start in range(0, n_out, step):
        stop = min(start + step, n_out)
        seg = x[start : stop + kernel.n_taps - 1].astype(np.float64)
        y = signal.oaconvolve(seg, kernel.taps, mode="valid")
        parts.append(requantize(y[phase::factor], adc))
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int16)

