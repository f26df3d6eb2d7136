"""Environment-level settings for macro ranking.

Values come from environment variables or a ``.env`` file; experiment
parameters live in the YAML configuration instead.
"""

import os
from pathlib import Path
from typing import Literal

from pydantic import Field, computed_field
from pydantic_settings import BaseSettings, SettingsConfigDict

ROOT_ENV_VAR = "MACRO_RANKING_ROOT"


def _default_project_root() -> Path:
    """``MACRO_RANKING_ROOT`` if set, else the checkout containing ``src/``."""
    explicit = os.environ.get(ROOT_ENV_VAR)
    if explicit:
        return Path(explicit)
    return Path(__file__).resolve().parents[3]


class Settings(BaseSettings):
    """Paths, logging, parallelism, and numerical tolerances."""

    PROJECT_ROOT: Path = Field(
        default_factory=_default_project_root,
        description=f"Project root; {ROOT_ENV_VAR} overrides the source checkout location.",
    )
    ENVIRONMENT: Literal["development", "testing", "production"] = Field(default="development")

    DEFAULT_SEED: int = Field(default=0, description="Seed used when an experiment file sets none.")
    WORKERS: int = Field(
        default_factory=lambda: os.cpu_count() or 1,
        ge=1,
        description="Process-pool size for sweep cells when the experiment sets none.",
    )

    STOCHASTIC_TOL: float = Field(default=1e-9, gt=0, description="Row/column sum tolerance for ranking policies.")
    BVN_EPS: float = Field(default=1e-9, gt=0, description="Smallest entry treated as support during BvN peeling.")
    DUAL_TOL: float = Field(default=1e-6, gt=0, description="Stopping tolerance of the horizon dual search.")
    MONOLITHIC_LP_MAX_VARIABLES: int = Field(
        default=5000,
        ge=0,
        description="Largest blocks x n^2 for which the horizon problem is solved as one LP.",
    )

    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(default="INFO")
    LOG_FORMAT: str = Field(
        default=(
            "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
            "<cyan>{name}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
        ),
    )

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore", validate_default=True)

    @computed_field
    @property
    def DATA_DIR(self) -> Path:
        """Synthetic and CSV datasets."""
        return self.PROJECT_ROOT / "data"

    @computed_field
    @property
    def OUTPUT_DIR(self) -> Path:
        """Default directory for command outputs and manifests."""
        return self.PROJECT_ROOT / "runs"


settings = Settings()
