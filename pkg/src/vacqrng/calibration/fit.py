from __future__ import annotations

from dataclasses import asdict, dataclass
from math import isfinite, sqrt
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
import structlog
from scipy import stats

from vacqrng.core.errors import CalibrationError

log = structlog.get_logger()


@dataclass(frozen=True, slots=True)
class CalibrationPoint:
    """
    Variance of the conditioned quadratures at one photocurrent.

    photocurrent in A, variances in ADC code^2.
    """
    photocurrent: float
    var_p: float
    var_q: float

    def __post_init__(self) -> None:
        if not (isfinite(self.photocurrent) and self.photocurrent >= 0):
            raise CalibrationError("photocurrent must be finite and >= 0")
        if not (isfinite(self.var_p) and isfinite(self.var_q)) or self.var_p < 0 or self.var_q < 0:
            raise CalibrationError("variances must be finite and >= 0")

    @classmethod
    def from_codes(
        cls,
        photocurrent: float,
        p_codes: npt.ArrayLike,
        q_codes: npt.ArrayLike,
    ) -> "CalibrationPoint":
        p = np.asarray(p_codes, dtype=np.float64)
        q = np.asarray(q_codes, dtype=np.float64)
        if p.size < 2 or q.size < 2:
            raise CalibrationError("need at least two samples per quadrature")
        return cls(photocurrent=photocurrent, var_p=float(np.var(p, ddof=1)), var_q=float(np.var(q, ddof=1)))


@dataclass(frozen=True, slots=True)
class CalibrationFit:
    """
    var_{p,q}(I) = slope_{p,q} * I + intercept_{p,q}

    slopes in code^2/A, intercepts in code^2; residual_rms pools both
    quadratures.
    """
    slope_p: float
    slope_q: float
    intercept_p: float
    intercept_q: float
    residual_rms: float
    slope_stderr_p: float = 0.0
    slope_stderr_q: float = 0.0
    n_points: int = 0

    @property
    def is_valid(self) -> bool:
        return self.slope_p > 0 and self.slope_q > 0

    def predict(self, photocurrent: float) -> tuple[float, float]:
        return (
            self.slope_p * photocurrent + self.intercept_p,
            self.slope_q * photocurrent + self.intercept_q,
        )

    def scaled(self, c: float) -> "CalibrationFit":
        """Same fit for data whose variances were all multiplied by c."""
        return CalibrationFit(
            slope_p=self.slope_p * c,
            slope_q=self.slope_q * c,
            intercept_p=self.intercept_p * c,
            intercept_q=self.intercept_q * c,
            residual_rms=self.residual_rms * c,
            slope_stderr_p=self.slope_stderr_p * c,
            slope_stderr_q=self.slope_stderr_q * c,
            n_points=self.n_points,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def fit_variance_curve(points: Sequence[CalibrationPoint]) -> CalibrationFit:
    """
    Ordinary least squares per quadrature with a free intercept, which
    absorbs the electronic floor and any constant excess noise.

    Two points with distinct currents give the exact interpolating line.
    """
    if len(points) < 2:
        raise CalibrationError(f"need at least 2 calibration points, got {len(points)}")

    currents = np.array([pt.photocurrent for pt in points], dtype=np.float64)
    if np.unique(currents).size < 2:
        raise CalibrationError("degenerate calibration: all photocurrents are equal")
    if len(points) == 2:
        log.warning("calibration.two_point_fit", note="no residual degrees of freedom")

    var_p = np.array([pt.var_p for pt in points], dtype=np.float64)
    var_q = np.array([pt.var_q for pt in points], dtype=np.float64)

    fp = stats.linregress(currents, var_p)
    fq = stats.linregress(currents, var_q)

    res_p = var_p - (fp.slope * currents + fp.intercept)
    res_q = var_q - (fq.slope * currents + fq.intercept)
    residual_rms = sqrt(float(np.mean(np.concatenate([res_p, res_q]) ** 2)))

    fit = CalibrationFit(
        slope_p=float(fp.slope),
        slope_q=float(fq.slope),
        intercept_p=float(fp.intercept),
        intercept_q=float(fq.intercept),
        residual_rms=residual_rms,
        slope_stderr_p=_finite_or_zero(fp.stderr),
        slope_stderr_q=_finite_or_zero(fq.stderr),
        n_points=len(points),
    )
    log.info(
        "calibration.fitted",
        n_points=len(points),
        slope_p=fit.slope_p,
        slope_q=fit.slope_q,
        intercept_p=fit.intercept_p,
        intercept_q=fit.intercept_q,
        residual_rms=residual_rms,
    )
    return fit


def _finite_or_zero(x: float) -> float:
    return float(x) if isfinite(x) else 0.0
