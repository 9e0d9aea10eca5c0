from __future__ import annotations

import numpy as np
import pytest

from vacqrng.core.errors import ConfigError, DspError, InsufficientDataError
from vacqrng.dsp.filters import apply_filter
from vacqrng.dsp.resample import CONDITION_CHUNK, condition_channel, downsample
from vacqrng.source.adc import requantize


def test_downsample_phase():
    x = np.arange(23)
    assert downsample(x, 10).tolist() == [0, 10, 20]
    assert downsample(x, 10, 3).tolist() == [3, 13]
    assert downsample(x, 1).tolist() == x.tolist()


@pytest.mark.parametrize("factor, phase", [(0, 0), (10, 10), (10, -1)])
def test_downsample_rejects(factor, phase):
    with pytest.raises(DspError):
        downsample(np.arange(10), factor, phase)


def test_chunked_conditioning_matches_one_shot(adc, reference_kernel, rng):
    n = CONDITION_CHUNK + 5003
    codes = np.clip(np.rint(80.0 * rng.standard_normal(n)), -2048, 2047).astype(np.int16)
    got = condition_channel(codes, reference_kernel, 10, 7, adc)
    want = requantize(downsample(apply_filter(codes, reference_kernel), 10, 7), adc)
    assert got.dtype == np.int16
    assert got.size == want.size == -(-(n - 510 - 7) // 10)
    np.testing.assert_array_equal(got, want)


def test_conditioning_validates(adc, reference_kernel):
    with pytest.raises(InsufficientDataError):
        condition_channel(np.zeros(400, dtype=np.int16), reference_kernel, 10, 0, adc)
    with pytest.raises(DspError):
        condition_channel(np.zeros(4000, dtype=np.int16), reference_kernel, 10, 10, adc)


def test_factor_larger_than_a_chunk_is_rejected(adc, reference_kernel):
    codes = np.zeros(4000, dtype=np.int16)
    with pytest.raises(ConfigError, match="chunk"):
        condition_channel(codes, reference_kernel, CONDITION_CHUNK + 1, 0, adc)
    assert condition_channel(codes, reference_kernel, CONDITION_CHUNK, 0, adc).size == 1
