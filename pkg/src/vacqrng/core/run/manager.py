from __future__ import annotations

import os
import platform
import secrets
import socket
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import orjson
import scipy
import structlog

from vacqrng.core.logging.setup import bind_context
from vacqrng.core.run.artifacts import RunArtifacts, artifacts_for

log = structlog.get_logger()


@dataclass(frozen=True, slots=True)
class RunInfo:
    run_id: str
    artifacts: RunArtifacts
    created_at_utc: datetime
    seed: int

    @property
    def run_dir(self) -> Path:
        return self.artifacts.run_dir


def write_json_atomic(path: Path, payload: Any) -> None:
    """tmp file + replace, so readers never see partial JSON."""
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(
        orjson.dumps(
            payload,
            option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY,
            default=str,
        )
    )
    tmp.replace(path)


def package_version() -> str:
    try:
        return metadata.version("vacqrng")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class RunManager:
    """
    Creates run directories and writes the reproducibility manifest.

    - unique run identifiers (or a caller-chosen one)
    - config snapshot
    - meta.json: config hash, seeds, library versions, host, git commit
    - run_id bound into the logging context
    """

    _META_SCHEMA_VERSION = 1

    def __init__(self, runs_dir: Path) -> None:
        self._runs_dir = runs_dir

    def create_run(
        self,
        *,
        seed: int,
        config_snapshot: Mapping[str, Any],
        config_hash: str,
        seeds: Mapping[str, int] | None = None,
        run_id: str | None = None,
    ) -> RunInfo:
        self._runs_dir.mkdir(parents=True, exist_ok=True)

        created_at = datetime.now(timezone.utc)
        if run_id is None:
            run_id = f"{created_at.strftime('%Y%m%dT%H%M%SZ')}_{secrets.token_hex(4)}"

        artifacts = artifacts_for(runs_dir=self._runs_dir, run_id=run_id)
        artifacts.run_dir.mkdir(parents=False, exist_ok=False)
        artifacts.ensure_dirs()

        write_json_atomic(artifacts.config_json, dict(config_snapshot))

        metadata_: dict[str, Any] = {
            "schema_version": self._META_SCHEMA_VERSION,
            "run_id": run_id,
            "created_at_utc": created_at.isoformat(),
            "config_hash": config_hash,
            "seed": seed,
            "seeds": dict(seeds or {}),
            "versions": {
                "vacqrng": package_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": sys.version.split()[0],
            },
            "pid": os.getpid(),
            "cwd": str(Path.cwd()),
            "hostname": socket.gethostname(),
            "platform": {
                "system": platform.system(),
                "release": platform.release(),
                "machine": platform.machine(),
            },
            "git": {"commit": self._try_get_git_commit()},
        }
        write_json_atomic(artifacts.meta_json, metadata_)

        bind_context(run_id=run_id)
        log.info("run.created", run_id=run_id, run_dir=str(artifacts.run_dir), seed=seed)

        return RunInfo(run_id=run_id, artifacts=artifacts, created_at_utc=created_at, seed=seed)

    def _try_get_git_commit(self) -> str | None:
        """Best-effort commit of the working directory's repository, without shelling out."""
        try:
            cur = Path.cwd()
            for _ in range(15):
                git_dir = cur / ".git"
                if git_dir.exists():
                    head = (git_dir / "HEAD").read_text().strip()
                    if not head.startswith("ref:"):
                        return head[:40] or None
                    ref = head.split(":", 1)[1].strip()
                    ref_path = git_dir / ref
                    if ref_path.exists():
                        return ref_path.read_text().strip()[:40]
                    packed = git_dir / "packed-refs"
                    if packed.exists():
                        for line in packed.read_text().splitlines():
                            if line.startswith(("#", "^")) or not line.strip():
                                continue
                            sha, name = line.split(" ", 1)
                            if name.strip() == ref:
                                return sha.strip()[:40]
                    return None
                cur = cur.parent
        except OSError:
            return None
        return None
