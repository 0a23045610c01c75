from __future__ import annotations

import logging
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


# Logging

def configure_logging(level: str) -> None:
    """Configure application logging once at startup."""
    logging.basicConfig(
        level=level.upper(),
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    )
    logging.getLogger().setLevel(level.upper())


def log_solver_event(
    *,
    scenario: str,
    points: int,
    elapsed_ms: int,
    method: str,
    residual: float | None = None,
) -> None:
    """Log sweep telemetry without any of the computed values."""
    logging.getLogger("fanoring.solver").info(
        "scenario=%s points=%d elapsed_ms=%d method=%s residual=%s",
        scenario, points, elapsed_ms, method,
        None if residual is None else f"{residual:.3e}",
    )


# Settings

class Settings(BaseSettings):
    """Process settings for the command line and the sweep runners."""

    model_config = SettingsConfigDict(
        env_prefix="FANORING_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = "INFO"
    sweep_workers: int = Field(default=4, ge=1, le=64)
    output_dir: Path = Path("results")

    steady_state_tol: float = Field(default=1e-9, gt=0.0, le=1e-6)
    steady_state_maxiter: int = Field(default=50, ge=1)

    @property
    def resolved_output_dir(self) -> Path:
        return self.output_dir.expanduser()


settings = Settings()
