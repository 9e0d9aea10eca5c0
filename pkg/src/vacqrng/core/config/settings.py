from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    """
    Process-level configuration.

    Run-level physics and pipeline knobs live in PipelineConfig; this class
    only holds what is a property of the host running the tool:
    - logging behavior
    - reproducibility defaults
    - run artifact locations
    - intra-stage parallelism (never changes results)
    """

    model_config = SettingsConfigDict(
        env_prefix="VACQRNG_",
        env_file=".env",
        extra="ignore",
    )

    # ---- Logging -----------------------------------------------------

    log_level: str = "INFO"
    log_format: Literal["json", "console"] = "json"

    # ---- Runs & Reproducibility -------------------------------------

    runs_dir: Path = Field(
        default=Path("runs"),
        description="Root directory for run artifacts",
    )

    default_seed: int = Field(
        default=20_250_070,
        ge=0,
        description="Default seed when a config or subcommand does not set one",
    )

    # ---- Parallelism -------------------------------------------------

    workers: int = Field(
        default=1,
        ge=1,
        description="Worker threads for chunked simulation and block extraction",
    )


settings = AppSettings()
