from __future__ import annotations

import numpy as np
import pytest

from vacqrng.core.errors import ExtractorError
from vacqrng.extractor.packing import BitBlock, bits_to_bytes, bits_to_samples, bytes_to_bits, samples_to_bits


def test_offset_binary_msb_first_p_then_q():
    bits = samples_to_bits([0], [-1], 4)
    # 0 + 8 = 1000, -1 + 8 = 0111
    assert bits.tolist() == [1, 0, 0, 0, 0, 1, 1, 1]


def test_extreme_codes():
    bits = samples_to_bits([-2048, 2047], [0, 1], 12)
    assert bits.size == 48
    assert bits[:12].tolist() == [0] * 12
    assert bits[24:36].tolist() == [1] * 12


def test_unpacking_inverts_packing(rng):
    p = rng.integers(-2048, 2048, size=50).astype(np.int16)
    q = rng.integers(-2048, 2048, size=50).astype(np.int16)
    p2, q2 = bits_to_samples(samples_to_bits(p, q, 12), 12)
    np.testing.assert_array_equal(p2, p)
    np.testing.assert_array_equal(q2, q)


def test_rejects_out_of_range_and_shape():
    with pytest.raises(ExtractorError):
        samples_to_bits([8], [0], 4)
    with pytest.raises(ExtractorError):
        samples_to_bits([0, 1], [0], 4)
    with pytest.raises(ExtractorError):
        bits_to_samples(np.zeros(7, dtype=np.uint8), 4)


def test_bytes_msb_first():
    assert bits_to_bytes(np.array([1, 0, 0, 0, 0, 0, 0, 1, 1], dtype=np.uint8)) == b"\x81\x80"
    assert bytes_to_bits(b"\x81", count=3).tolist() == [1, 0, 0]


def test_bit_block():
    a = BitBlock.from_bits([1, 0, 1])
    assert a.length == 3
    assert a.unpacked().tolist() == [1, 0, 1]
    assert a == BitBlock.from_bits([1, 0, 1])
    assert a != BitBlock.from_bits([1, 0, 1, 0])
    with pytest.raises(ExtractorError):
        BitBlock(bits=np.zeros(2, dtype=np.uint8), length=3)
