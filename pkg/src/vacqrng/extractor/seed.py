from __future__ import annotations

import secrets
from pathlib import Path

import numpy as np

from vacqrng.core.errors import ExtractorError, InputError
from vacqrng.extractor.packing import Bits

# spawn key separating extractor seeds from simulation streams
_SEED_DOMAIN = 0x70E9


def derive_seed_bits(length: int, seed: int) -> Bits:
    """
    Deterministic seed bits for experiments and reproducible runs.

    Not a substitute for a uniform external seed in production.
    """
    if length <= 0:
        raise ExtractorError("seed length must be > 0")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(_SEED_DOMAIN,))))
    return rng.integers(0, 2, size=length, dtype=np.uint8)


def os_entropy_seed(length: int) -> Bits:
    if length <= 0:
        raise ExtractorError("seed length must be > 0")
    raw = np.frombuffer(secrets.token_bytes(-(-length // 8)), dtype=np.uint8)
    return np.unpackbits(raw, count=length, bitorder="little")


def read_seed_file(path: Path, length: int) -> Bits:
    """Raw seed file: bits in little-endian order within each byte."""
    try:
        raw = np.frombuffer(path.read_bytes(), dtype=np.uint8)
    except OSError as exc:
        raise InputError(f"seed file not readable: {path}: {exc.strerror or exc}") from exc
    if raw.size * 8 < length:
        raise ExtractorError(f"seed file {path} holds {raw.size * 8} bits, need {length}")
    return np.unpackbits(raw, count=length, bitorder="little")


def write_seed_file(path: Path, bits: Bits) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes())
    tmp.replace(path)
