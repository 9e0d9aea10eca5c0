from __future__ import annotations

from dataclasses import dataclass
from math import floor, log, log2, sqrt
from typing import Callable

import numpy as np
import numpy.typing as npt
from scipy import fft, special, stats

from vacqrng.core.errors import InsufficientDataError

Bits = npt.NDArray[np.uint8]
TestFn = Callable[[Bits], list[float]]

MIN_STREAM_BITS = 1024

# longest-run-of-ones tables: (min n, block M, lowest class, highest class, probabilities)
_LONGEST_RUN_TABLES: tuple[tuple[int, int, int, int, tuple[float, ...]], ...] = (
    (750_000, 10_000, 10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6_272, 128, 4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, 1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
)


@dataclass(frozen=True, slots=True)
class BatteryParams:
    """Per-test parameters, defaulting to the usual choices for 10^6-bit streams."""
    block_frequency_m: int = 128
    serial_m: int = 16
    approximate_entropy_m: int = 10

    @classmethod
    def for_length(cls, n: int) -> "BatteryParams":
        """Shrink pattern lengths for short streams (serial needs m < log2 n - 2)."""
        lg = floor(log2(n))
        return cls(
            block_frequency_m=128,
            serial_m=max(3, min(16, lg - 3)),
            approximate_entropy_m=max(2, min(10, lg - 6)),
        )


def _pm1(eps: Bits) -> npt.NDArray[np.int64]:
    return 2 * eps.astype(np.int64) - 1


def _igamc(a: float, x: float) -> float:
    return float(special.gammaincc(a, x))


def frequency(eps: Bits) -> list[float]:
    n = eps.size
    s = 2 * int(np.count_nonzero(eps)) - n
    return [float(special.erfc(abs(s) / sqrt(n) / sqrt(2.0)))]


def block_frequency(eps: Bits, m: int = 128) -> list[float]:
    n_blocks = eps.size // m
    if n_blocks == 0:
        raise InsufficientDataError(f"block frequency needs at least {m} bits")
    pi = eps[: n_blocks * m].reshape(n_blocks, m).sum(axis=1, dtype=np.int64) / m
    chi2 = 4.0 * m * float(np.sum((pi - 0.5) ** 2))
    return [_igamc(n_blocks / 2.0, chi2 / 2.0)]


def _tdiv(a: int, b: int) -> int:
    # C integer division (truncates toward zero)
    q = abs(a) // b
    return q if a >= 0 else -q


def _cusum_p(n: int, z: int) -> float:
    sn = sqrt(n)
    k1 = np.arange(_tdiv(_tdiv(-n, z) + 1, 4), _tdiv(_tdiv(n, z) - 1, 4) + 1)
    k2 = np.arange(_tdiv(_tdiv(-n, z) - 3, 4), _tdiv(_tdiv(n, z) - 1, 4) + 1)
    s1 = np.sum(stats.norm.cdf((4 * k1 + 1) * z / sn) - stats.norm.cdf((4 * k1 - 1) * z / sn))
    s2 = np.sum(stats.norm.cdf((4 * k2 + 3) * z / sn) - stats.norm.cdf((4 * k2 + 1) * z / sn))
    return float(min(1.0, max(0.0, 1.0 - s1 + s2)))


def cumulative_sums(eps: Bits) -> list[float]:
    """Forward and backward modes."""
    x = _pm1(eps)
    n = x.size
    out: list[float] = []
    for seq in (x, x[::-1]):
        z = int(np.max(np.abs(np.cumsum(seq))))
        out.append(_cusum_p(n, z))
    return out


def runs(eps: Bits) -> list[float]:
    n = eps.size
    pi = np.count_nonzero(eps) / n
    if abs(pi - 0.5) >= 2.0 / sqrt(n):
        # frequency prerequisite failed
        return [0.0]
    v = 1 + int(np.count_nonzero(eps[1:] != eps[:-1]))
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * sqrt(2.0 * n) * pi * (1.0 - pi)
    return [float(special.erfc(num / den))]


def _longest_ones(rows: Bits) -> npt.NDArray[np.int64]:
    n_rows = rows.shape[0]
    padded = np.zeros((n_rows, rows.shape[1] + 2), dtype=np.int8)
    padded[:, 1:-1] = rows
    d = np.diff(padded, axis=1)
    r_start, c_start = np.nonzero(d == 1)
    _, c_end = np.nonzero(d == -1)
    longest = np.zeros(n_rows, dtype=np.int64)
    np.maximum.at(longest, r_start, c_end - c_start)
    return longest


def longest_run(eps: Bits) -> list[float]:
    n = eps.size
    for min_n, m, lo, hi, probs in _LONGEST_RUN_TABLES:
        if n >= min_n:
            break
    else:
        raise InsufficientDataError("longest run needs at least 128 bits")

    n_blocks = n // m
    longest = _longest_ones(eps[: n_blocks * m].reshape(n_blocks, m))
    counts = np.bincount(np.clip(longest, lo, hi) - lo, minlength=hi - lo + 1)
    expected = n_blocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return [_igamc((hi - lo) / 2.0, chi2 / 2.0)]


def dft(eps: Bits) -> list[float]:
    n = eps.size
    mags = np.abs(fft.rfft(_pm1(eps).astype(np.float64)))[: n // 2]
    threshold = sqrt(log(1.0 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = float(np.count_nonzero(mags < threshold))
    d = (n1 - n0) / sqrt(n * 0.95 * 0.05 / 4.0)
    return [float(special.erfc(abs(d) / sqrt(2.0)))]


def _pattern_counts(eps: Bits, m: int) -> npt.NDArray[np.int64]:
    # overlapping m-bit patterns with wrap-around
    n = eps.size
    ext = np.concatenate([eps, eps[: m - 1]]).astype(np.int64)
    vals = np.zeros(n, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | ext[j : j + n]
    return np.bincount(vals, minlength=1 << m)


def _psi2(eps: Bits, m: int) -> float:
    if m <= 0:
        return 0.0
    n = eps.size
    counts = _pattern_counts(eps, m).astype(np.float64)
    return (1 << m) / n * float(np.sum(counts * counts)) - n


def serial(eps: Bits, m: int = 16) -> list[float]:
    if m < 3:
        raise ValueError("serial test needs m >= 3")
    p0, p1, p2 = _psi2(eps, m), _psi2(eps, m - 1), _psi2(eps, m - 2)
    d1 = p0 - p1
    d2 = p0 - 2.0 * p1 + p2
    return [_igamc(2.0 ** (m - 2), d1 / 2.0), _igamc(2.0 ** (m - 3), d2 / 2.0)]


def _phi(eps: Bits, m: int) -> float:
    if m == 0:
        return 0.0
    c = _pattern_counts(eps, m)
    c = c[c > 0] / eps.size
    return float(np.sum(c * np.log(c)))


def approximate_entropy(eps: Bits, m: int = 10) -> list[float]:
    n = eps.size
    apen = _phi(eps, m) - _phi(eps, m + 1)
    chi2 = 2.0 * n * (log(2.0) - apen)
    return [_igamc(2.0 ** (m - 1), chi2 / 2.0)]


def battery_tests(params: BatteryParams) -> dict[str, TestFn]:
    """Implemented tests in report order."""
    return {
        "Frequency": frequency,
        "BlockFrequency": lambda e: block_frequency(e, params.block_frequency_m),
        "CumulativeSums": cumulative_sums,
        "Runs": runs,
        "LongestRun": longest_run,
        "DFT": dft,
        "ApproximateEntropy": lambda e: approximate_entropy(e, params.approximate_entropy_m),
        "Serial": lambda e: serial(e, params.serial_m),
    }
