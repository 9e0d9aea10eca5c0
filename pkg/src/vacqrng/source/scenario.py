from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
import numpy.typing as npt
import structlog

from vacqrng.core.errors import ConfigError
from vacqrng.dsp.filters import FilterKernel
from vacqrng.source.adc import AdcSpec
from vacqrng.source.sim import (
    LowFreqNoise,
    SourceParams,
    impulse_response_sos,
    impulse_response_tia,
    lowfreq_sos,
)

log = structlog.get_logger()

# uniform rounding noise, code^2
_ROUNDING_VAR = 1.0 / 12.0


@dataclass(frozen=True, slots=True)
class OperatingPoint:
    """
    Published operating point of the integrated heterodyne QRNG.
    """
    photocurrent: float = 70e-6
    tia_bandwidth: float = 2.5e9
    decimation: int = 10
    h_min: float = 17.5
    vacuum_variance: float = 1.23


REFERENCE = OperatingPoint()


@dataclass(frozen=True, slots=True)
class BandGains:
    """
    Variance gain from each noise entry point to the band-passed output,
    per unit input variance.

    shot:      TIA-shaped white noise (quantum + classical)
    white:     electronic noise and ADC rounding
    lowfreq:   Butterworth-shaped technical noise
    """
    shot: float
    white: float
    lowfreq: float


def _cascade_power(h: npt.NDArray[np.float64], taps: npt.NDArray[np.float64]) -> float:
    c = np.convolve(h, taps)
    return float(np.sum(c * c))


def band_gains(kernel: FilterKernel, tia_bandwidth: float, lowfreq_cutoff: float) -> BandGains:
    fs = kernel.design_rate
    h_tia = impulse_response_tia(tia_bandwidth, fs)
    sos = lowfreq_sos(lowfreq_cutoff, fs)
    h_lf = impulse_response_sos(sos, n=max(h_tia.size, 1 << 14))
    return BandGains(
        shot=_cascade_power(h_tia, kernel.taps),
        white=kernel.power_gain,
        lowfreq=_cascade_power(h_lf, kernel.taps),
    )


def conditioned_variance(
    params: SourceParams,
    adc: AdcSpec,
    gains: BandGains,
) -> float:
    """
    Expected code^2 variance after band-pass, re-quantisation and
    decimation (decimation does not change the marginal variance).
    """
    lsb2 = adc.lsb**2
    lf = params.lowfreq_noise.amplitude**2
    volts2 = params.shot_var * gains.shot + params.electronic_noise_var * gains.white + lf * gains.lowfreq
    return volts2 / lsb2 + _ROUNDING_VAR * gains.white + _ROUNDING_VAR


def reference_operating_point(
    kernel: FilterKernel,
    adc: AdcSpec,
    *,
    point: OperatingPoint = REFERENCE,
    electronic_share: float = 0.25,
    lowfreq_ratio: float = 0.5,
    lowfreq_cutoff: float = 0.2e9,
) -> SourceParams:
    """
    Back-solve the free simulator parameters so the conditioned data at
    `point.photocurrent` has vacuum-unit variance `point.vacuum_variance`
    and delta_p * delta_q = pi / 2^h_min.

    electronic_share: fraction of the conditioned excess noise that is
                      electronic (the rest is classical)
    lowfreq_ratio:    low-frequency noise variance relative to the raw
                      quantum variance at the operating point
    """
    if not 0.0 <= electronic_share < 1.0:
        raise ConfigError("electronic_share must be in [0, 1)")
    if lowfreq_ratio < 0:
        raise ConfigError("lowfreq_ratio must be >= 0")

    g = band_gains(kernel, point.tia_bandwidth, lowfreq_cutoff)
    lsb2 = adc.lsb**2
    i0 = point.photocurrent

    # conditioned quantum variance at I0 in code^2: k^2 = 2 Q, delta = 1/k
    q_codes = 2.0**point.h_min / (2.0 * pi)
    excess = (2.0 * point.vacuum_variance - 1.0) * q_codes

    quantum_slope = q_codes * lsb2 / (g.shot * i0)
    elec_codes = electronic_share * excess
    electronic_var = max(0.0, elec_codes - _ROUNDING_VAR * g.white) * lsb2 / g.white
    lowfreq_var = lowfreq_ratio * quantum_slope * i0
    lf_codes = lowfreq_var * g.lowfreq / lsb2

    classical_codes = excess - elec_codes - lf_codes - _ROUNDING_VAR
    if classical_codes < 0:
        raise ConfigError(
            "operating point unreachable: electronic/low-frequency noise already exceed the excess budget"
        )

    params = SourceParams(
        photocurrent=i0,
        quantum_slope=quantum_slope,
        classical_noise_var=classical_codes * lsb2 / g.shot,
        electronic_noise_var=electronic_var,
        lowfreq_noise=LowFreqNoise(amplitude=sqrt(lowfreq_var), cutoff=lowfreq_cutoff),
        tia_bandwidth=point.tia_bandwidth,
    )
    log.info(
        "scenario.backsolved",
        quantum_slope=params.quantum_slope,
        classical_noise_var=params.classical_noise_var,
        electronic_noise_var=params.electronic_noise_var,
        lowfreq_amplitude=params.lowfreq_noise.amplitude,
        gain_shot=g.shot,
        gain_white=g.white,
        gain_lowfreq=g.lowfreq,
    )
    return params
