from __future__ import annotations

from vacqrng.storage.jsonl import JsonlStageLog
from vacqrng.storage.tracefile import (
    TraceDescriptor,
    ingest_trace,
    list_traces,
    read_headerless,
    read_trace,
    write_trace,
)

__all__ = [
    "JsonlStageLog",
    "TraceDescriptor",
    "ingest_trace",
    "list_traces",
    "read_headerless",
    "read_trace",
    "write_trace",
]
