from __future__ import annotations

import struct
from pathlib import Path
from typing import Literal

import numpy as np
import orjson
import structlog
from pydantic import BaseModel, Field, ValidationError

from vacqrng.core.errors import InputError, TraceFormatError
from vacqrng.source.adc import AdcSpec
from vacqrng.source.sim import RawTrace

log = structlog.get_logger()

MAGIC = b"QRNGTRC1"
# magic, bits, sample_rate, full_scale, photocurrent, length (pairs), seed, padding
HEADER = struct.Struct("<8sIdddQQ12x")
assert HEADER.size == 64

_SAMPLE = np.dtype("<i2")


class TraceDescriptor(BaseModel):
    """
    Sidecar for headerless dumps: little-endian int16 words, interleaved p,q.

    justify="left" means the N-bit code sits in the top bits of each word
    (typical of 12-bit scopes exporting 16-bit samples).
    """
    bits: int = Field(..., ge=2, le=16)
    sample_rate: float = Field(..., gt=0, description="samples per second")
    full_scale: float = Field(..., gt=0, description="peak-to-peak volts")
    photocurrent: float = Field(0.0, ge=0, description="amperes")
    justify: Literal["left", "right"] = "right"
    seed: int = Field(0, ge=0, lt=1 << 64)

    def adc(self) -> AdcSpec:
        return AdcSpec(bits=self.bits, full_scale=self.full_scale, sample_rate=self.sample_rate)


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_trace(path: Path, trace: RawTrace) -> None:
    header = HEADER.pack(
        MAGIC,
        trace.adc.bits,
        trace.adc.sample_rate,
        trace.adc.full_scale,
        trace.photocurrent,
        trace.n_samples,
        trace.seed,
    )
    payload = np.empty(2 * trace.n_samples, dtype=_SAMPLE)
    payload[0::2] = trace.p_codes
    payload[1::2] = trace.q_codes

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())
    tmp.replace(path)
    log.info("trace.written", path=str(path), n_samples=trace.n_samples)


def _build(p: np.ndarray, q: np.ndarray, adc: AdcSpec, photocurrent: float, seed: int, path: Path) -> RawTrace:
    try:
        return RawTrace(
            p_codes=p.astype(np.int16),
            q_codes=q.astype(np.int16),
            adc=adc,
            photocurrent=photocurrent,
            seed=seed,
        )
    except ValueError as exc:
        raise TraceFormatError(f"{path}: {exc}") from exc


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_trace(path: Path) -> RawTrace:
    """Read a headered trace; header, length and code range are all checked."""
    data = _read_bytes(path)
    if len(data) < HEADER.size:
        raise TraceFormatError(f"{path}: shorter than the {HEADER.size}-byte header")
    magic, bits, sample_rate, full_scale, photocurrent, length, seed = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TraceFormatError(f"{path}: bad magic {magic!r}")

    expected = HEADER.size + 4 * length
    if len(data) < expected:
        raise TraceFormatError(f"{path}: truncated, header declares {length} pairs")
    if len(data) > expected:
        raise TraceFormatError(f"{path}: {len(data) - expected} trailing bytes after payload")

    try:
        adc = AdcSpec(bits=bits, full_scale=full_scale, sample_rate=sample_rate)
    except ValueError as exc:
        raise TraceFormatError(f"{path}: {exc}") from exc

    words = np.frombuffer(data, dtype=_SAMPLE, offset=HEADER.size)
    return _build(words[0::2], words[1::2], adc, photocurrent, seed, path)


def read_headerless(path: Path, descriptor: TraceDescriptor) -> RawTrace:
    """Raw int16 dump; length is filesize / 4 pairs."""
    try:
        size = path.stat().st_size
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if size % 4:
        raise TraceFormatError(f"{path}: size {size} is not a whole number of (p, q) pairs")

    words = np.fromfile(path, dtype=_SAMPLE)
    if descriptor.justify == "left":
        words = words >> (16 - descriptor.bits)
    return _build(
        words[0::2],
        words[1::2],
        descriptor.adc(),
        descriptor.photocurrent,
        descriptor.seed,
        path,
    )


def load_descriptor(path: Path) -> TraceDescriptor:
    try:
        return TraceDescriptor.model_validate(orjson.loads(_read_bytes(path)))
    except (orjson.JSONDecodeError, ValidationError) as exc:
        raise TraceFormatError(f"{path}: invalid descriptor: {exc}") from exc


def ingest_trace(path: Path, descriptor: TraceDescriptor | None = None) -> RawTrace:
    """
    Headered file if it starts with the magic, otherwise headerless with the
    given descriptor or the `<file>.json` sidecar next to it.
    """
    if not path.exists():
        raise InputError(f"trace not found: {path}")
    with path.open("rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return read_trace(path)
    if descriptor is None:
        side = sidecar_path(path)
        if not side.exists():
            raise TraceFormatError(f"{path}: bad magic {head!r} and no descriptor sidecar {side.name}")
        descriptor = load_descriptor(side)
    return read_headerless(path, descriptor)


def list_traces(directory: Path) -> list[Path]:
    """Trace files of a sweep directory in name order."""
    if not directory.is_dir():
        raise TraceFormatError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix == ".trc")
