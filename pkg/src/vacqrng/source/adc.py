from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np
import numpy.typing as npt


@dataclass(frozen=True, slots=True)
class AdcSpec:
    """
    Uniform ADC model.

    bits:        resolution N
    full_scale:  peak-to-peak input span R_adc in volts
    sample_rate: samples per second
    """
    bits: int
    full_scale: float
    sample_rate: float

    def __post_init__(self) -> None:
        if not 2 <= self.bits <= 16:
            raise ValueError(f"bits must be in [2, 16], got {self.bits}")
        if not (isfinite(self.full_scale) and self.full_scale > 0):
            raise ValueError("full_scale must be finite and > 0")
        if not (isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError("sample_rate must be finite and > 0")

    @property
    def lsb(self) -> float:
        """Volts per code step."""
        return self.full_scale / (1 << self.bits)

    @property
    def code_min(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def code_max(self) -> int:
        return (1 << (self.bits - 1)) - 1

    @property
    def levels(self) -> int:
        return 1 << self.bits

    def with_sample_rate(self, sample_rate: float) -> "AdcSpec":
        return AdcSpec(bits=self.bits, full_scale=self.full_scale, sample_rate=sample_rate)


def quantize(v: float, adc: AdcSpec) -> int:
    """
    Mid-tread quantizer: code 0 at 0 V, step R_adc / 2^N, saturating at
    code_min / code_max.
    """
    return int(quantize_array(np.asarray([v], dtype=np.float64), adc)[0])


def quantize_array(v: npt.NDArray[np.float64], adc: AdcSpec) -> npt.NDArray[np.int16]:
    # floor(x + 0.5): ties go up, independent of numpy's banker's rounding
    codes = np.floor(v / adc.lsb + 0.5)
    np.clip(codes, adc.code_min, adc.code_max, out=codes)
    return codes.astype(np.int16)


def requantize(x: npt.NDArray[np.float64], adc: AdcSpec) -> npt.NDArray[np.int16]:
    """
    Round values already expressed in code units back onto the code grid.

    Used after digital filtering so conditioned data keeps N-bit codes.
    """
    codes = np.floor(x + 0.5)
    np.clip(codes, adc.code_min, adc.code_max, out=codes)
    return codes.astype(np.int16)
