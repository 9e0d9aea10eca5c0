from __future__ import annotations

from dataclasses import asdict, dataclass
from math import isclose, isfinite, log2, pi, sqrt
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
import structlog

from vacqrng.calibration.fit import CalibrationFit, CalibrationPoint
from vacqrng.core.errors import CalibrationError, NoCertifiableRandomness
from vacqrng.source.adc import AdcSpec

log = structlog.get_logger()

# vacuum quadrature variance in vacuum units
VACUUM_VARIANCE = 0.5
# calibration variances are in code^2
LSB_CODES = 1.0


@dataclass(frozen=True, slots=True)
class EntropyBudget:
    """
    Everything derived from the calibration at the operating point.

    k_{p,q}:     code per vacuum unit
    delta_{p,q}: one LSB in vacuum units
    h_min:       certified bits per (p, q) pair, clamped to raw_bits
    raw_bits:    2N bits sampled per pair
    pair_rate:   conditioned pairs per second
    gen_rate:    h_min * pair_rate, bit/s
    """
    photocurrent: float
    k_p: float
    k_q: float
    delta_p: float
    delta_q: float
    h_min: float
    raw_bits: int
    pair_rate: float
    gen_rate: float
    clamped: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.h_min <= self.raw_bits:
            raise CalibrationError(f"h_min={self.h_min} outside (0, {self.raw_bits}]")

    @property
    def extractable_ratio(self) -> float:
        """Upper bound for m/n of the extractor."""
        return self.h_min / self.raw_bits

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["h_min_reported"] = round(self.h_min, 1)
        return d


def correction_factor(fit: CalibrationFit, photocurrent: float) -> tuple[float, float]:
    """k_{p,q} = sqrt(2 * m_{p,q} * I)"""
    if not (isfinite(photocurrent) and photocurrent > 0):
        raise NoCertifiableRandomness(
            f"no certifiable randomness: photocurrent must be > 0 (got {photocurrent:g} A, laser off?)"
        )
    if not fit.is_valid:
        raise NoCertifiableRandomness(
            f"no certifiable randomness: calibration slopes must be > 0 "
            f"(slope_p={fit.slope_p:g}, slope_q={fit.slope_q:g})"
        )
    return sqrt(2.0 * fit.slope_p * photocurrent), sqrt(2.0 * fit.slope_q * photocurrent)


def to_vacuum_units(codes: npt.ArrayLike, k: float) -> npt.NDArray[np.float64]:
    if not k > 0:
        raise CalibrationError("correction factor must be > 0")
    return np.asarray(codes, dtype=np.float64) / k


def resolution(adc: AdcSpec, k: float) -> float:
    """
    One LSB in vacuum units. The fit is done in codes, so k is code per
    vacuum unit and the LSB of `adc` is exactly one code.
    """
    if not k > 0:
        raise CalibrationError("correction factor must be > 0")
    return LSB_CODES / k


def min_entropy(delta_p: float, delta_q: float, *, raw_bits: int | None = None) -> float:
    """
    Conditional min-entropy bound log2(pi / (delta_p * delta_q)) per pair.

    A product exactly equal to pi certifies 0 bits; above pi nothing can be
    certified. With raw_bits given the result is clamped to it (see
    `min_entropy_clamped` for the flag).
    """
    return min_entropy_clamped(delta_p, delta_q, raw_bits=raw_bits)[0]


def min_entropy_clamped(
    delta_p: float,
    delta_q: float,
    *,
    raw_bits: int | None = None,
) -> tuple[float, bool]:
    if not (delta_p > 0 and delta_q > 0):
        raise CalibrationError("resolutions must be > 0")
    h = log2(pi / (delta_p * delta_q))
    if isclose(h, 0.0, abs_tol=1e-12):
        h = 0.0
    elif h < 0:
        raise NoCertifiableRandomness(
            f"no certifiable randomness: delta_p*delta_q={delta_p * delta_q:.6g} exceeds pi"
        )
    if raw_bits is not None and h > raw_bits:
        log.warning("entropy.clamped", h_min=h, raw_bits=raw_bits)
        return float(raw_bits), True
    return h, False


def generation_rate(h_min: float, pair_rate: float) -> float:
    if not (h_min > 0 and pair_rate > 0):
        raise CalibrationError("h_min and pair_rate must be > 0")
    return h_min * pair_rate


def build_budget(
    fit: CalibrationFit,
    photocurrent: float,
    adc: AdcSpec,
    pair_rate: float,
) -> EntropyBudget:
    k_p, k_q = correction_factor(fit, photocurrent)
    d_p, d_q = resolution(adc, k_p), resolution(adc, k_q)
    raw_bits = 2 * adc.bits
    h, clamped = min_entropy_clamped(d_p, d_q, raw_bits=raw_bits)
    if h <= 0:
        raise NoCertifiableRandomness()
    budget = EntropyBudget(
        photocurrent=photocurrent,
        k_p=k_p,
        k_q=k_q,
        delta_p=d_p,
        delta_q=d_q,
        h_min=h,
        raw_bits=raw_bits,
        pair_rate=pair_rate,
        gen_rate=generation_rate(h, pair_rate),
        clamped=clamped,
    )
    log.info(
        "entropy.budget",
        h_min=round(h, 1),
        delta_p=d_p,
        delta_q=d_q,
        gen_rate_gbps=budget.gen_rate / 1e9,
    )
    return budget


# ---------------------------
# Curves and scenarios
# ---------------------------

def entropy_curve(
    fit: CalibrationFit,
    currents: Sequence[float],
    adc: AdcSpec,
) -> list[tuple[float, float]]:
    """
    (I, h_min) for each photocurrent with a certifiable bound; currents that
    certify nothing are skipped.
    """
    out: list[tuple[float, float]] = []
    for i in currents:
        try:
            k_p, k_q = correction_factor(fit, i)
            h = min_entropy(resolution(adc, k_p), resolution(adc, k_q), raw_bits=2 * adc.bits)
        except NoCertifiableRandomness:
            continue
        out.append((i, h))
    return out


def vacuum_variance_curve(
    points: Sequence[CalibrationPoint],
    fit: CalibrationFit,
) -> list[tuple[float, float, float]]:
    """
    (I, var_p, var_q) in vacuum units, each point normalised by k at its own
    current. A pure vacuum measurement sits at 0.5.
    """
    out: list[tuple[float, float, float]] = []
    for pt in points:
        if pt.photocurrent <= 0:
            continue
        k_p, k_q = correction_factor(fit, pt.photocurrent)
        out.append((pt.photocurrent, pt.var_p / k_p**2, pt.var_q / k_q**2))
    return out


def project_power_gain(budget: EntropyBudget, gain_db: float) -> EntropyBudget:
    """
    Budget after raising the optical power at the detectors by gain_db:
    the shot-noise variance scales linearly, so k grows by sqrt(gain) and
    each delta shrinks by the same factor.
    """
    g = 10.0 ** (gain_db / 10.0)
    scale = sqrt(g)
    d_p, d_q = budget.delta_p / scale, budget.delta_q / scale
    h, clamped = min_entropy_clamped(d_p, d_q, raw_bits=budget.raw_bits)
    if h <= 0:
        raise NoCertifiableRandomness()
    return EntropyBudget(
        photocurrent=budget.photocurrent * g,
        k_p=budget.k_p * scale,
        k_q=budget.k_q * scale,
        delta_p=d_p,
        delta_q=d_q,
        h_min=h,
        raw_bits=budget.raw_bits,
        pair_rate=budget.pair_rate,
        gen_rate=generation_rate(h, budget.pair_rate),
        clamped=clamped,
    )
