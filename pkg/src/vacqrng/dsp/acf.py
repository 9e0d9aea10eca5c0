from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy import fft, signal

from vacqrng.core.errors import DspError, InsufficientDataError

# two-sided 99% standard normal quantile
Z99 = 2.5758

AcfKind = Literal["real", "envelope"]


@dataclass(frozen=True, slots=True, eq=False)
class AcfProfile:
    """
    Sample autocorrelation normalised by the sample variance.

    kind="real":     biased estimator of the real sequence, values in [-1, 1]
    kind="envelope": magnitude of the analytic-signal autocorrelation, in [0, 1]
    """
    lags: npt.NDArray[np.int64]
    values: npt.NDArray[np.float64]
    n_samples: int
    bound99: float
    kind: AcfKind = "real"

    @property
    def max_lag(self) -> int:
        return int(self.lags[-1])

    def fraction_within_bound(self, first_lag: int = 1) -> float:
        v = self.values[first_lag:]
        return float(np.mean(np.abs(v) < self.bound99)) if v.size else 1.0

    def to_rows(self) -> list[tuple[int, float, float]]:
        return [(int(k), float(v), self.bound99) for k, v in zip(self.lags, self.values)]


def _prepare(x: npt.ArrayLike, max_lag: int) -> npt.NDArray[np.float64]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DspError("input must be 1-D")
    if max_lag < 1:
        raise DspError("max_lag must be >= 1")
    if arr.size < 10 * max_lag:
        raise InsufficientDataError(f"need at least {10 * max_lag} samples for max_lag={max_lag}")
    xc = arr - arr.mean()
    if not np.any(xc):
        raise DspError("zero-variance input has no autocorrelation")
    return xc


def autocorrelation(x: npt.ArrayLike, max_lag: int) -> AcfProfile:
    """
    r(k) = sum (x_t - m)(x_{t+k} - m) / sum (x_t - m)^2 for k = 0..max_lag,
    computed through a zero-padded FFT.
    """
    xc = _prepare(x, max_lag)
    n = xc.size
    size = fft.next_fast_len(2 * n - 1, real=True)
    spec = fft.rfft(xc, size)
    full = fft.irfft(spec.real**2 + spec.imag**2, size)[: max_lag + 1]
    values = full / full[0]
    values[0] = 1.0
    return AcfProfile(
        lags=np.arange(max_lag + 1, dtype=np.int64),
        values=values,
        n_samples=n,
        bound99=Z99 / sqrt(n),
    )


def envelope_autocorrelation(x: npt.ArrayLike, max_lag: int) -> AcfProfile:
    """
    |R(k)| / R(0) with R the autocorrelation of the analytic signal.

    For a band-pass process this strips the carrier oscillation and leaves
    the envelope set by the bandwidth: its first null is where samples
    spaced that far apart decorrelate.
    """
    xc = _prepare(x, max_lag)
    n = xc.size
    z = signal.hilbert(xc)
    size = fft.next_fast_len(2 * n - 1)
    spec = fft.fft(z, size)
    full = fft.ifft(spec.real**2 + spec.imag**2, size)[: max_lag + 1]
    values = np.abs(full) / full[0].real
    values[0] = 1.0
    return AcfProfile(
        lags=np.arange(max_lag + 1, dtype=np.int64),
        values=values,
        n_samples=n,
        bound99=Z99 / sqrt(n),
        kind="envelope",
    )


def first_zero_lag(acf: AcfProfile) -> int:
    """
    Smallest k > 0 with r(k) <= 0, i.e. the first sign change of the
    autocorrelation.
    """
    if acf.values.size < 2:
        raise DspError("profile needs at least two lags")
    hits = np.flatnonzero(acf.values[1:] <= 0.0)
    if hits.size == 0:
        raise DspError(f"no zero crossing within max_lag={acf.max_lag}")
    return int(hits[0]) + 1


def zero_crossing(acf: AcfProfile) -> float:
    """Linearly interpolated position of the first zero crossing."""
    k = first_zero_lag(acf)
    a, b = float(acf.values[k - 1]), float(acf.values[k])
    if a == b:
        return float(k)
    return (k - 1) + a / (a - b)


def first_null_lag(acf: AcfProfile) -> int:
    """
    First local minimum of an envelope profile: smallest k > 0 with
    e(k) <= e(k-1) and e(k) < e(k+1).
    """
    if acf.kind != "envelope":
        raise DspError("first_null_lag expects an envelope profile")
    e = acf.values
    if e.size < 3:
        raise DspError("profile needs at least three lags")
    mins = np.flatnonzero((e[1:-1] <= e[:-2]) & (e[1:-1] < e[2:]))
    if mins.size == 0:
        raise DspError(f"no envelope null within max_lag={acf.max_lag}")
    return int(mins[0]) + 1
