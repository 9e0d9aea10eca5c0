from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import structlog
from scipy import fft, linalg

from vacqrng.core.errors import ExtractorError
from vacqrng.extractor.packing import BitBlock, Bits

log = structlog.get_logger()

# blocks per FFT batch; bounds peak memory at roughly 16 * L * _BATCH bytes
_BATCH = 64
# float64 convolution sums are integers <= n; anything this far from one is a bug
_ROUNDING_SLACK = 0.25


@dataclass(frozen=True, slots=True, eq=False)
class ToeplitzSpec:
    """
    m x n Toeplitz matrix over GF(2) given by n + m - 1 seed bits:
    T[i, j] = seed[i - j + n - 1].
    """
    n: int
    m: int
    seed: Bits
    epsilon_exp: float = 0.0
    _seed_fft: npt.NDArray[np.complex128] = field(init=False, repr=False)
    _fft_len: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0 < self.m < self.n:
            raise ExtractorError(f"need 0 < m < n, got m={self.m}, n={self.n}")
        seed = np.asarray(self.seed, dtype=np.uint8)
        if seed.ndim != 1 or seed.size != self.n + self.m - 1:
            raise ExtractorError(f"seed must hold n + m - 1 = {self.n + self.m - 1} bits, got {seed.size}")
        if np.any(seed > 1):
            raise ExtractorError("seed must contain only 0/1 values")
        object.__setattr__(self, "seed", seed)
        size = fft.next_fast_len(self.n + self.m - 1, real=True)
        object.__setattr__(self, "_fft_len", size)
        object.__setattr__(self, "_seed_fft", fft.rfft(seed.astype(np.float64), size))

    @property
    def seed_length(self) -> int:
        return self.n + self.m - 1

    def hash_rows(self, x: npt.NDArray[np.uint8], *, workers: int = 1) -> Bits:
        """
        Hash every row of a (blocks, n) 0/1 array; returns (blocks, m).

        Row i of the product is entry n-1+i of the linear convolution of the
        seed with the block, taken mod 2. A circular convolution of length
        >= n + m - 1 leaves those entries unaliased.
        """
        size = self._fft_len
        spec = fft.rfft(x.astype(np.float64), size, axis=1, workers=workers)
        spec *= self._seed_fft
        conv = fft.irfft(spec, size, axis=1, workers=workers)[:, self.n - 1 : self.n - 1 + self.m]
        rounded = np.rint(conv)
        if conv.size and float(np.max(np.abs(conv - rounded))) > _ROUNDING_SLACK:
            raise ExtractorError("FFT convolution lost integer precision")
        return (rounded.astype(np.int64) & 1).astype(np.uint8)


def toeplitz_matrix(spec: ToeplitzSpec) -> npt.NDArray[np.uint8]:
    """Dense m x n matrix; first column seed[n-1 .. n+m-2], first row seed[n-1 .. 0]."""
    first_col = spec.seed[spec.n - 1 :]
    first_row = spec.seed[spec.n - 1 :: -1]
    return linalg.toeplitz(first_col, first_row).astype(np.uint8)


def naive_hash(spec: ToeplitzSpec, block: BitBlock) -> BitBlock:
    """Dense GF(2) matrix-vector product; reference for small sizes."""
    x = _check_block(spec, block)
    out = (toeplitz_matrix(spec).astype(np.int64) @ x.astype(np.int64)) & 1
    return BitBlock.from_bits(out.astype(np.uint8))


def toeplitz_hash(spec: ToeplitzSpec, block: BitBlock) -> BitBlock:
    x = _check_block(spec, block)
    return BitBlock.from_bits(spec.hash_rows(x[None, :])[0])


def _check_block(spec: ToeplitzSpec, block: BitBlock) -> Bits:
    if block.length != spec.n:
        raise ExtractorError(f"block length {block.length} does not match n={spec.n}")
    return block.unpacked()


def extract_stream(bits: npt.ArrayLike, spec: ToeplitzSpec, *, workers: int = 1) -> Bits:
    """
    Split into consecutive n-bit blocks (trailing partial block dropped),
    hash each with the same seed and concatenate: floor(len/n) * m bits.

    Batches are hashed on a thread pool and reassembled in input order, so
    the result does not depend on `workers`.
    """
    b = np.asarray(bits, dtype=np.uint8)
    if b.ndim != 1:
        raise ExtractorError("bit stream must be 1-D")
    if b.size < spec.n:
        raise ExtractorError(f"stream of {b.size} bits is shorter than one block (n={spec.n})")

    n_blocks = b.size // spec.n
    blocks = b[: n_blocks * spec.n].reshape(n_blocks, spec.n)
    batches = [blocks[i : i + _BATCH] for i in range(0, n_blocks, _BATCH)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        hashed = list(pool.map(spec.hash_rows, batches))

    out = np.concatenate(hashed).reshape(-1)
    log.info(
        "extract.done",
        n=spec.n,
        m=spec.m,
        blocks=n_blocks,
        dropped_bits=int(b.size - n_blocks * spec.n),
        out_bits=int(out.size),
    )
    return out
