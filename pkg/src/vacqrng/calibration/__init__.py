from __future__ import annotations

from vacqrng.calibration.entropy import (
    VACUUM_VARIANCE,
    EntropyBudget,
    build_budget,
    correction_factor,
    entropy_curve,
    generation_rate,
    min_entropy,
    min_entropy_clamped,
    project_power_gain,
    resolution,
    to_vacuum_units,
    vacuum_variance_curve,
)
from vacqrng.calibration.fit import CalibrationFit, CalibrationPoint, fit_variance_curve
from vacqrng.calibration.sweep import SweepCalibration, calibrate_sweep

__all__ = [
    "VACUUM_VARIANCE",
    "CalibrationFit",
    "CalibrationPoint",
    "EntropyBudget",
    "SweepCalibration",
    "build_budget",
    "calibrate_sweep",
    "correction_factor",
    "entropy_curve",
    "fit_variance_curve",
    "generation_rate",
    "min_entropy",
    "min_entropy_clamped",
    "project_power_gain",
    "resolution",
    "to_vacuum_units",
    "vacuum_variance_curve",
]
