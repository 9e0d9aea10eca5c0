from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from vacqrng.core.errors import DspError
from vacqrng.dsp.acf import AcfProfile, autocorrelation


@dataclass(frozen=True, slots=True, eq=False)
class AcfComparison:
    before: AcfProfile
    after: AcfProfile

    @property
    def bound99_before(self) -> float:
        return self.before.bound99

    @property
    def bound99_after(self) -> float:
        return self.after.bound99

    def summary(self) -> dict[str, Any]:
        def _side(p: AcfProfile) -> dict[str, Any]:
            tail = np.abs(p.values[1:])
            return {
                "n_samples": p.n_samples,
                "bound99": p.bound99,
                "max_abs": float(tail.max()),
                "worst_lag": int(np.argmax(tail)) + 1,
                "fraction_within_bound": p.fraction_within_bound(),
            }

        return {"max_lag": self.after.max_lag, "before": _side(self.before), "after": _side(self.after)}


def compare_acf(before: npt.ArrayLike, after_bits: npt.ArrayLike, max_lag: int) -> AcfComparison:
    """
    Autocorrelation of a sequence before hashing against the extracted bits
    (mapped to +-1) after it, on lags 0..max_lag.
    """
    bits = np.asarray(after_bits, dtype=np.uint8)
    if bits.size and bits.max() > 1:
        raise DspError("after-hash input must be a 0/1 bit stream")
    signs = 2.0 * bits.astype(np.float64) - 1.0
    return AcfComparison(before=autocorrelation(before, max_lag), after=autocorrelation(signs, max_lag))
