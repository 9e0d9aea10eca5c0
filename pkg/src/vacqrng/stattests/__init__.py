from __future__ import annotations

from vacqrng.stattests.battery import (
    TestReport,
    TestResult,
    proportion_band,
    run_battery,
    uniformity_P,
)
from vacqrng.stattests.correlation import AcfComparison, compare_acf
from vacqrng.stattests.nist import BatteryParams, battery_tests

__all__ = [
    "AcfComparison",
    "BatteryParams",
    "TestReport",
    "TestResult",
    "battery_tests",
    "compare_acf",
    "proportion_band",
    "run_battery",
    "uniformity_P",
]
