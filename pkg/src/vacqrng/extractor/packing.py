from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from vacqrng.core.errors import ExtractorError

Bits = npt.NDArray[np.uint8]


@dataclass(frozen=True, slots=True, eq=False)
class BitBlock:
    """
    Packed bit sequence (MSB-first within bytes) with an explicit length.
    """
    bits: npt.NDArray[np.uint8]
    length: int

    def __post_init__(self) -> None:
        if self.length < 0 or self.bits.size != -(-self.length // 8):
            raise ExtractorError("packed size does not match declared length")

    @classmethod
    def from_bits(cls, bits: npt.ArrayLike) -> "BitBlock":
        b = np.asarray(bits, dtype=np.uint8)
        return cls(bits=np.packbits(b), length=int(b.size))

    def unpacked(self) -> Bits:
        return np.unpackbits(self.bits, count=self.length)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitBlock):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self.unpacked(), other.unpacked()))


def samples_to_bits(
    p_codes: npt.ArrayLike,
    q_codes: npt.ArrayLike,
    bits_per_code: int,
) -> Bits:
    """
    (p, q) pairs -> 2N bits each: offset binary (code + 2^(N-1)), MSB first,
    p before q, pairs in sample order.
    """
    p = np.asarray(p_codes, dtype=np.int32)
    q = np.asarray(q_codes, dtype=np.int32)
    if p.shape != q.shape or p.ndim != 1:
        raise ExtractorError("p and q must be 1-D and of equal length")
    if not 1 <= bits_per_code <= 16:
        raise ExtractorError("bits_per_code must be in [1, 16]")

    half = 1 << (bits_per_code - 1)
    for name, c in (("p", p), ("q", q)):
        if c.size and (c.min() < -half or c.max() > half - 1):
            raise ExtractorError(f"{name} code outside the {bits_per_code}-bit range")

    interleaved = np.empty(2 * p.size, dtype=np.uint16)
    interleaved[0::2] = p + half
    interleaved[1::2] = q + half

    shifts = np.arange(bits_per_code - 1, -1, -1, dtype=np.uint16)
    out = (interleaved[:, None] >> shifts) & 1
    return out.astype(np.uint8).reshape(-1)


def bits_to_samples(bits: npt.ArrayLike, bits_per_code: int) -> tuple[npt.NDArray[np.int16], npt.NDArray[np.int16]]:
    """Inverse of samples_to_bits."""
    b = np.asarray(bits, dtype=np.uint8)
    width = 2 * bits_per_code
    if b.size % width:
        raise ExtractorError(f"bit count {b.size} is not a multiple of {width}")
    weights = (1 << np.arange(bits_per_code - 1, -1, -1)).astype(np.int32)
    codes = b.reshape(-1, bits_per_code).astype(np.int32) @ weights - (1 << (bits_per_code - 1))
    return codes[0::2].astype(np.int16), codes[1::2].astype(np.int16)


def bits_to_bytes(bits: Bits) -> bytes:
    """MSB-first packing; a trailing partial byte is zero-padded."""
    return np.packbits(bits).tobytes()


def bytes_to_bits(data: bytes, *, count: int | None = None) -> Bits:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count)
