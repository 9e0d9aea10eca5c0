from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import orjson
import structlog

from vacqrng.core.errors import ConfigError, QrngError, StageError
from vacqrng.core.logging.setup import bind_context, unbind_context
from vacqrng.core.run.artifacts import RunArtifacts
from vacqrng.core.run.spec import PipelineConfig
from vacqrng.core.run.stages import (
    StageContext,
    StageOutput,
    stage_calibrate,
    stage_downsample,
    stage_extract,
    stage_filter,
    stage_pack,
    stage_source,
    stage_summarize,
    stage_test,
)
from vacqrng.storage.jsonl import JsonlStageLog

log = structlog.get_logger()

StageFn = Callable[[StageContext], StageOutput]

# execution order; every stage reads its inputs from the files of earlier ones
STAGES: tuple[tuple[str, StageFn], ...] = (
    ("source", stage_source),
    ("filter", stage_filter),
    ("calibrate", stage_calibrate),
    ("downsample", stage_downsample),
    ("pack", stage_pack),
    ("extract", stage_extract),
    ("test", stage_test),
    ("summarize", stage_summarize),
)
STAGE_NAMES = tuple(name for name, _ in STAGES)


@dataclass(frozen=True, slots=True)
class PipelineResult:
    artifacts: RunArtifacts
    summary: dict[str, Any]

    @property
    def passed(self) -> bool:
        """All verdicts PASSED and the extractor ratio condition holds."""
        return bool(self.summary.get("passed"))


def run_pipeline(
    config: PipelineConfig,
    artifacts: RunArtifacts,
    *,
    base_dir: Path | None = None,
    workers: int | None = None,
    start_at: str = "source",
) -> PipelineResult:
    """
    Execute the stages from `start_at` to the end.

    Starting later reuses the intermediate files already in the run
    directory, so a partial rerun produces the same outputs as a full run.
    Any stage failure is re-raised as StageError naming the stage.
    """
    if start_at not in STAGE_NAMES:
        raise ConfigError(f"unknown stage {start_at!r}; expected one of {', '.join(STAGE_NAMES)}")

    ctx = StageContext(
        config=config,
        artifacts=artifacts,
        base_dir=base_dir if base_dir is not None else Path.cwd(),
        workers=workers if workers is not None else config.workers,
    )
    artifacts.ensure_dirs()

    with JsonlStageLog(path=artifacts.stages_jsonl) as stage_log:
        for name, fn in STAGES[STAGE_NAMES.index(start_at) :]:
            bind_context(stage=name)
            try:
                out = fn(ctx)
            except (QrngError, ValueError, OSError) as exc:
                log.error("pipeline.stage_failed", error=f"{type(exc).__name__}: {exc}")
                stage_log.append({"stage": name, "status": "failed", "error": f"{type(exc).__name__}: {exc}"})
                raise StageError(name, exc) from exc
            finally:
                unbind_context("stage")
            stage_log.append({"stage": name, "status": "done", **out})
            log.info("pipeline.stage_done", stage=name)

    summary = orjson.loads(artifacts.summary_json.read_bytes())
    log.info(
        "pipeline.done",
        h_min=summary["h_min_reported"],
        gen_rate_gbps=summary["gen_rate"] / 1e9,
        eps_exp=summary["eps_exp"],
        passed=summary["passed"],
    )
    return PipelineResult(artifacts=artifacts, summary=summary)


def load_summary(run_dir: Path) -> dict[str, Any]:
    path = RunArtifacts(run_dir=run_dir).summary_json
    if not path.exists():
        raise ConfigError(f"{run_dir} has no summary.json; is it a completed run?")
    return orjson.loads(path.read_bytes())
