from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import structlog

from vacqrng.calibration.entropy import (
    EntropyBudget,
    build_budget,
    entropy_curve,
    project_power_gain,
    vacuum_variance_curve,
)
from vacqrng.calibration.fit import CalibrationFit, CalibrationPoint, fit_variance_curve
from vacqrng.core.errors import CalibrationError, NoCertifiableRandomness
from vacqrng.dsp.filters import FilterKernel
from vacqrng.dsp.resample import condition_channel
from vacqrng.source.adc import AdcSpec
from vacqrng.source.sim import RawTrace

log = structlog.get_logger()

# loss-reduction scenario reported next to every budget
PROJECTED_GAIN_DB = 10.0


@dataclass(frozen=True, slots=True)
class SweepCalibration:
    """Calibration points, the variance fit and the budget at the operating point."""
    points: list[CalibrationPoint]
    fit: CalibrationFit
    budget: EntropyBudget
    adc: AdcSpec

    def to_dict(self) -> dict[str, Any]:
        b = self.budget
        try:
            projected: dict[str, Any] | None = project_power_gain(b, PROJECTED_GAIN_DB).to_dict()
        except NoCertifiableRandomness:
            projected = None
        currents = [p.photocurrent for p in self.points]
        return {
            "slope_p": self.fit.slope_p,
            "slope_q": self.fit.slope_q,
            "intercept_p": self.fit.intercept_p,
            "intercept_q": self.fit.intercept_q,
            "k_p": b.k_p,
            "k_q": b.k_q,
            "delta_p": b.delta_p,
            "delta_q": b.delta_q,
            "h_min": b.h_min,
            "gen_rate": b.gen_rate,
            "fit": self.fit.to_dict(),
            "budget": b.to_dict(),
            "points": [
                {"photocurrent": p.photocurrent, "var_p": p.var_p, "var_q": p.var_q} for p in self.points
            ],
            "entropy_curve": [
                {"photocurrent": i, "h_min": h} for i, h in entropy_curve(self.fit, currents, self.adc)
            ],
            "projected_power_gain": {"gain_db": PROJECTED_GAIN_DB, "budget": projected},
        }

    def csv_rows(self) -> list[tuple[float, float, float, float, float]]:
        """(I_uA, var_p, var_q, var_p_vac, var_q_vac); laser-off points have no vacuum-unit value."""
        vac = {i: (vp, vq) for i, vp, vq in vacuum_variance_curve(self.points, self.fit)}
        nan = float("nan")
        return [
            (pt.photocurrent * 1e6, pt.var_p, pt.var_q, *vac.get(pt.photocurrent, (nan, nan)))
            for pt in self.points
        ]


CSV_HEADER = ("photocurrent_ua", "var_p", "var_q", "var_p_vac", "var_q_vac")


def conditioned_point(
    trace: RawTrace,
    kernel: FilterKernel,
    factor: int,
    phase: int,
) -> CalibrationPoint:
    """Variance of a sweep trace after the same conditioning as production data."""
    p = condition_channel(trace.p_codes, kernel, factor, phase, trace.adc)
    q = condition_channel(trace.q_codes, kernel, factor, phase, trace.adc)
    return CalibrationPoint.from_codes(trace.photocurrent, p, q)


def calibrate_sweep(
    traces: Sequence[RawTrace],
    kernel: FilterKernel,
    *,
    factor: int,
    phase: int,
    photocurrent: float,
) -> SweepCalibration:
    """
    Fit the variance line over a sweep and evaluate the entropy budget at
    `photocurrent`; pair rate is the sweep's sample rate over `factor`.
    """
    if not traces:
        raise CalibrationError("calibration sweep is empty")
    adc = traces[0].adc
    if any(t.adc != adc for t in traces):
        raise CalibrationError("sweep traces disagree on the ADC settings")

    points = [conditioned_point(t, kernel, factor, phase) for t in traces]
    fit = fit_variance_curve(points)
    budget = build_budget(fit, photocurrent, adc, pair_rate=adc.sample_rate / factor)
    log.info("calibration.sweep_done", n_points=len(points), h_min=round(budget.h_min, 1))
    return SweepCalibration(points=points, fit=fit, budget=budget, adc=adc)
