from __future__ import annotations

import os
from pathlib import Path
from typing import IO, Any, Mapping

import orjson


class JsonlStageLog:
    """
    Append-only JSONL log of pipeline stages.

    - One record per line, keys sorted.
    - Records carry no wall-clock time, so identical runs write identical files.
    - fsync on demand for crash safety.
    """

    def __init__(self, *, path: Path, fsync: bool = False) -> None:
        self._path = path
        self._fsync = fsync
        self._fh: IO[bytes] | None = None
        self._path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def path(self) -> Path:
        return self._path

    def open(self) -> None:
        if self._fh is None:
            self._fh = self._path.open("ab")

    def close(self) -> None:
        if self._fh is None:
            return
        try:
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
        finally:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "JsonlStageLog":
        self.open()
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def append(self, record: Mapping[str, Any]) -> None:
        self.open()
        assert self._fh is not None
        line = orjson.dumps(dict(record), option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)
        self._fh.write(line + b"\n")
        self._fh.flush()
        if self._fsync:
            os.fsync(self._fh.fileno())

    def records(self) -> list[dict[str, Any]]:
        if not self._path.exists():
            return []
        with self._path.open("rb") as fh:
            return [orjson.loads(line) for line in fh if line.strip()]
