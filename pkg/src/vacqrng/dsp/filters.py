from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np
import numpy.typing as npt
import structlog
from scipy import signal

from vacqrng.core.errors import DspError, InsufficientDataError

log = structlog.get_logger()

# design targets checked on every kernel
PASSBAND_RIPPLE_DB = 1.0
STOPBAND_ATTEN_DB = 40.0

_MIN_TAPS = 63
_CUTOFF_CANDIDATES = 48


@dataclass(frozen=True, slots=True, eq=False)
class FilterKernel:
    """
    Linear-phase FIR band-pass.

    low_cut/high_cut are the requested band edges; cutoffs holds the -6 dB
    points the windowed-sinc was actually designed with.
    """
    taps: npt.NDArray[np.float64]
    low_cut: float
    high_cut: float
    design_rate: float
    cutoffs: tuple[float, float]

    def __post_init__(self) -> None:
        if self.taps.ndim != 1 or self.taps.size % 2 == 0:
            raise DspError("taps length must be odd")
        if not np.allclose(self.taps, self.taps[::-1], rtol=0.0, atol=1e-15):
            raise DspError("taps must be symmetric (linear phase)")

    @property
    def n_taps(self) -> int:
        return int(self.taps.size)

    @property
    def group_delay(self) -> int:
        return (self.n_taps - 1) // 2

    @property
    def power_gain(self) -> float:
        """Output/input variance ratio for white input."""
        return float(np.sum(self.taps * self.taps))


def frequency_response(kernel: FilterKernel, freqs: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    f = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    _, h = signal.freqz(kernel.taps, worN=f, fs=kernel.design_rate)
    return h


def gain_db(kernel: FilterKernel, freqs: npt.ArrayLike) -> npt.NDArray[np.float64]:
    h = np.abs(frequency_response(kernel, freqs))
    return 20.0 * np.log10(np.maximum(h, 1e-300))


def _windowed_sinc(n_taps: int, lo: float, hi: float, fs: float) -> npt.NDArray[np.float64]:
    return signal.firwin(n_taps, [lo, hi], pass_zero=False, window="blackman", fs=fs)


def _design_margin(taps: npt.NDArray[np.float64], low: float, high: float, fs: float) -> float:
    # worst-case slack in dB against the passband and stopband targets
    pass_f = np.linspace(1.1 * low, 0.9 * high, 256)
    stop_f = np.concatenate([np.linspace(0.0, 0.25 * low, 32), [fs / 2]])
    _, hp = signal.freqz(taps, worN=pass_f, fs=fs)
    _, hs = signal.freqz(taps, worN=stop_f, fs=fs)
    pass_db = 20.0 * np.log10(np.maximum(np.abs(hp), 1e-300))
    stop_db = 20.0 * np.log10(np.maximum(np.abs(hs), 1e-300))
    return float(min(PASSBAND_RIPPLE_DB - np.max(np.abs(pass_db)), -STOPBAND_ATTEN_DB - np.max(stop_db)))


def design_bandpass(low: float, high: float, fs: float, n_taps: int = 511) -> FilterKernel:
    """
    Blackman windowed-sinc band-pass.

    The low -6 dB cutoff is placed inside [low/4, 1.1*low] where the
    pass/stop margin is largest: with a few hundred taps the transition band
    is wider than the gap between the band edge and DC, so putting the
    cutoff exactly at `low` would miss the passband flatness target.
    """
    for name, v in (("low", low), ("high", high), ("fs", fs)):
        if not isfinite(v):
            raise DspError(f"{name} must be finite")
    if not 0.0 < low < high < fs / 2:
        raise DspError(f"band edges must satisfy 0 < low < high < fs/2, got {low}, {high}, fs={fs}")
    if n_taps % 2 == 0 or n_taps < _MIN_TAPS:
        raise DspError(f"n_taps must be odd and >= {_MIN_TAPS}, got {n_taps}")

    best: tuple[float, float, npt.NDArray[np.float64]] | None = None
    upper = min(1.1 * low, 0.5 * (low + high))
    for lo in np.linspace(0.25 * low, upper, _CUTOFF_CANDIDATES):
        taps = _windowed_sinc(n_taps, float(lo), high, fs)
        margin = _design_margin(taps, low, high, fs)
        if best is None or margin > best[0]:
            best = (margin, float(lo), taps)

    assert best is not None
    margin, lo, taps = best
    # firwin output is symmetric up to rounding; enforce exact symmetry
    taps = 0.5 * (taps + taps[::-1])

    if margin < 0:
        log.warning("dsp.bandpass_out_of_spec", margin_db=margin, n_taps=n_taps, low=low, high=high)

    log.debug("dsp.bandpass_designed", n_taps=n_taps, low_cutoff=lo, high_cutoff=high, margin_db=margin)
    return FilterKernel(taps=taps, low_cut=low, high_cut=high, design_rate=fs, cutoffs=(lo, high))


def apply_filter(x: npt.ArrayLike, kernel: FilterKernel) -> npt.NDArray[np.float64]:
    """
    Linear convolution, "valid" region only: output length is
    len(x) - n_taps + 1 and output[t] depends on x[t : t + n_taps].
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DspError("input must be 1-D")
    if arr.size <= kernel.n_taps:
        raise InsufficientDataError(
            f"input length {arr.size} must exceed the kernel length {kernel.n_taps}"
        )
    return signal.oaconvolve(arr, kernel.taps, mode="valid")


def power_spectrum(
    x: npt.ArrayLike,
    fs: float,
    *,
    nperseg: int = 4096,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """One-sided Welch PSD (units^2/Hz)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size < nperseg:
        raise InsufficientDataError(f"need at least {nperseg} samples for the PSD")
    freqs, psd = signal.welch(arr - arr.mean(), fs=fs, nperseg=nperseg)
    return freqs, psd
