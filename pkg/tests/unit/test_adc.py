from __future__ import annotations

import numpy as np
import pytest

from vacqrng.source.adc import AdcSpec, quantize, quantize_array, requantize


def test_adc_geometry(adc):
    assert adc.lsb == pytest.approx(0.5 / 4096)
    assert (adc.code_min, adc.code_max, adc.levels) == (-2048, 2047, 4096)


def test_quantize_mid_tread(adc):
    assert quantize(0.0, adc) == 0
    assert quantize(0.49 * adc.lsb, adc) == 0
    # ties round up
    assert quantize(0.5 * adc.lsb, adc) == 1
    assert quantize(-0.5 * adc.lsb, adc) == 0
    assert quantize(-0.51 * adc.lsb, adc) == -1


def test_quantize_saturates(adc):
    assert quantize(10.0, adc) == adc.code_max
    assert quantize(-10.0, adc) == adc.code_min
    codes = quantize_array(np.array([-1.0, 1.0]), adc)
    assert codes.dtype == np.int16
    assert codes.tolist() == [-2048, 2047]


def test_requantize_on_code_grid(adc):
    out = requantize(np.array([0.4, 0.5, -0.5, -0.6, 5000.0, -5000.0]), adc)
    assert out.tolist() == [0, 1, 0, -1, 2047, -2048]


@pytest.mark.parametrize("bits", [1, 17])
def test_adc_rejects_bad_bits(bits):
    with pytest.raises(ValueError):
        AdcSpec(bits=bits, full_scale=0.5, sample_rate=20e9)


def test_adc_rejects_bad_scale():
    with pytest.raises(ValueError):
        AdcSpec(bits=12, full_scale=0.0, sample_rate=20e9)
    with pytest.raises(ValueError):
        AdcSpec(bits=12, full_scale=0.5, sample_rate=float("nan"))
