from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

_RUN_ID_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


def validate_run_id(run_id: str) -> None:
    if not run_id or not _RUN_ID_RE.match(run_id):
        raise ValueError(f"invalid run_id: {run_id!r}")


@dataclass(frozen=True, slots=True)
class RunArtifacts:
    """
    Stable artifact paths for a run. Each pipeline stage reads its inputs
    from and writes its outputs to these files only.
    """
    run_dir: Path

    @property
    def config_json(self) -> Path:
        return self.run_dir / "config.json"

    @property
    def meta_json(self) -> Path:
        return self.run_dir / "meta.json"

    @property
    def stages_jsonl(self) -> Path:
        return self.run_dir / "stages.jsonl"

    @property
    def traces_dir(self) -> Path:
        return self.run_dir / "traces"

    @property
    def calibration_traces_dir(self) -> Path:
        return self.traces_dir / "calibration"

    @property
    def production_trace(self) -> Path:
        return self.traces_dir / "production.trc"

    @property
    def filter_json(self) -> Path:
        return self.run_dir / "filter.json"

    @property
    def acf_csv(self) -> Path:
        return self.run_dir / "acf.csv"

    @property
    def calibration_json(self) -> Path:
        return self.run_dir / "calibration.json"

    @property
    def calibration_csv(self) -> Path:
        return self.run_dir / "calibration.csv"

    @property
    def conditioned_trace(self) -> Path:
        return self.run_dir / "conditioned.trc"

    @property
    def packed_bin(self) -> Path:
        return self.run_dir / "packed.bin"

    @property
    def packed_json(self) -> Path:
        return self.run_dir / "packed.json"

    @property
    def seed_bin(self) -> Path:
        return self.run_dir / "extractor_seed.bin"

    @property
    def extracted_bin(self) -> Path:
        return self.run_dir / "extracted.bin"

    @property
    def extracted_json(self) -> Path:
        return self.run_dir / "extracted.json"

    @property
    def battery_json(self) -> Path:
        return self.run_dir / "battery.json"

    @property
    def battery_txt(self) -> Path:
        return self.run_dir / "battery.txt"

    @property
    def acf_compare_csv(self) -> Path:
        return self.run_dir / "acf_compare.csv"

    @property
    def acf_compare_json(self) -> Path:
        return self.run_dir / "acf_compare.json"

    @property
    def summary_json(self) -> Path:
        return self.run_dir / "summary.json"

    def ensure_dirs(self) -> None:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.calibration_traces_dir.mkdir(parents=True, exist_ok=True)


def artifacts_for(*, runs_dir: Path, run_id: str) -> RunArtifacts:
    """Resolve artifacts for run_id, refusing anything outside runs_dir."""
    validate_run_id(run_id)
    run_dir = (runs_dir / run_id).resolve()

    base = runs_dir.resolve()
    if base not in run_dir.parents:
        raise ValueError("invalid run_dir resolution")

    return RunArtifacts(run_dir=run_dir)
