from __future__ import annotations

import numpy as np
import pytest

from vacqrng.core.errors import DspError
from vacqrng.stattests.correlation import compare_acf


def test_bits_against_themselves(rng):
    bits = rng.integers(0, 2, 50_000, dtype=np.uint8)
    cmp = compare_acf(bits.astype(np.float64), bits, 20)
    np.testing.assert_allclose(cmp.before.values, cmp.after.values, atol=1e-12)
    assert cmp.bound99_before == cmp.bound99_after


def test_hashed_bits_within_bound(rng):
    cmp = compare_acf(rng.standard_normal(10_000), rng.integers(0, 2, 200_000, dtype=np.uint8), 100)
    s = cmp.summary()
    assert s["max_lag"] == 100
    assert s["after"]["n_samples"] == 200_000
    assert s["after"]["fraction_within_bound"] >= 0.95
    assert cmp.bound99_after < cmp.bound99_before


def test_lag_two_artifact_detected(rng):
    e = rng.standard_normal(100_002)
    x = e[2:] + 0.05 * e[:-2]
    cmp = compare_acf(x, rng.integers(0, 2, 100_000, dtype=np.uint8), 10)
    s = cmp.summary()
    assert s["before"]["worst_lag"] == 2
    assert s["before"]["max_abs"] == pytest.approx(0.05 / 1.0025, abs=0.01)


def test_rejects_non_binary(rng):
    with pytest.raises(DspError):
        compare_acf(rng.standard_normal(1000), np.array([0, 1, 2] * 100, dtype=np.uint8), 5)
