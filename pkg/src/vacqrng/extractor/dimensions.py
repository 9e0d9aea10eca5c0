from __future__ import annotations

from dataclasses import asdict, dataclass
from math import ceil, floor
from typing import Any

from vacqrng.core.errors import ExtractorError, InfeasibleDimensions

# leftover hash lemma exponent used for every report
EPS_EXP_CONVENTION = "(n*h_min/raw_bits - m)/2"


@dataclass(frozen=True, slots=True)
class ToeplitzDims:
    """
    Extractor shape plus its security accounting.

    eps_exp is -log2 of the security parameter.
    """
    n: int
    m: int
    eps_exp: float
    ratio_ok: bool

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["eps_exp_convention"] = EPS_EXP_CONVENTION
        return d


def eps_exp(n: int, m: int, h_min: float, raw_bits: int) -> float:
    """(n * h_min / raw_bits - m) / 2: entropy left over after hashing, halved."""
    return (n * h_min / raw_bits - m) / 2.0


def ratio_condition(n: int, m: int, h_min: float, raw_bits: int) -> bool:
    """m/n < h_min / 2N, evaluated without division rounding."""
    return m * raw_bits < n * h_min


def _validate(h_min: float, raw_bits: int, n: int) -> None:
    if raw_bits <= 0:
        raise ExtractorError("raw_bits must be > 0")
    if not 0 < h_min <= raw_bits:
        raise InfeasibleDimensions(
            f"h_min={h_min} must satisfy 0 < h_min <= raw_bits={raw_bits}",
            max_eps_exp=eps_exp(n, 0, max(h_min, 0.0), raw_bits),
        )
    if n <= 1 or n % raw_bits:
        raise ExtractorError(f"n={n} must be a multiple of raw_bits={raw_bits}")


def choose_dimensions(h_min: float, raw_bits: int, n: int, target_eps_exp: float) -> ToeplitzDims:
    """
    Largest m with m/n < h_min/raw_bits and eps_exp(n, m) >= target_eps_exp.
    """
    _validate(h_min, raw_bits, n)

    limit = n * h_min / raw_bits
    m_ratio = ceil(limit) - 1
    m_eps = floor(limit - 2.0 * target_eps_exp)
    m = min(m_ratio, m_eps, n - 1)
    if m < 1:
        best = eps_exp(n, 1, h_min, raw_bits)
        raise InfeasibleDimensions(
            f"no m satisfies eps_exp >= {target_eps_exp} at n={n}; best achievable {best:.2f}",
            max_eps_exp=best,
        )
    return ToeplitzDims(n=n, m=m, eps_exp=eps_exp(n, m, h_min, raw_bits), ratio_ok=True)


def check_dimensions(
    n: int,
    m: int,
    h_min: float,
    raw_bits: int,
    *,
    target_eps_exp: float | None = None,
) -> ToeplitzDims:
    """
    Security accounting for an externally chosen (n, m). ratio_ok reports
    the m/n < h_min/2N condition; a target below reach raises.
    """
    _validate(h_min, raw_bits, n)
    if not 0 < m < n:
        raise ExtractorError(f"need 0 < m < n, got m={m}, n={n}")
    e = eps_exp(n, m, h_min, raw_bits)
    if target_eps_exp is not None and e < target_eps_exp:
        raise InfeasibleDimensions(
            f"eps_exp={e:.2f} below target {target_eps_exp}",
            max_eps_exp=eps_exp(n, 1, h_min, raw_bits),
        )
    return ToeplitzDims(n=n, m=m, eps_exp=e, ratio_ok=ratio_condition(n, m, h_min, raw_bits))
