"""
Settings for tolerances, sampling sizes, quadrature knobs and runtime limits.
Loaded from config/defaults.json, then overridden from the environment.
"""
import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

import structlog
from dotenv import load_dotenv
from pydantic import BaseModel, Field

logger = structlog.get_logger()

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "defaults.json"


class Tolerances(BaseModel):
    """Spectral and structural tolerances."""
    tol_psd: float = Field(1e-8, gt=0)
    tol_pd: float = Field(1e-10, gt=0)
    symmetry: float = Field(1e-8, gt=0)
    negative_type: float = Field(1e-10, gt=0)


class Sampling(BaseModel):
    """Sizes of the sampling-based certificates."""
    seed: int = 42
    validity_points: int = Field(6, ge=1, le=8)
    validity_freqs: int = Field(8, ge=8)
    strictness_u_samples: int = Field(16, ge=1)
    negative_type_trials: int = Field(32, ge=1)


class QuadratureSettings(BaseModel):
    """Node counts for the built-in quadrature rules."""
    laguerre_nodes: int = Field(64, ge=2)
    matern_nodes: int = Field(64, ge=32)
    hermite_nodes: int = Field(64, ge=2)
    matern_max_doublings: int = Field(8, ge=1)
    mixture_step: float = Field(0.125, gt=0)


class RuntimeSettings(BaseModel):
    """Process-level knobs."""
    threads: int = Field(4, ge=1)
    log_level: str = "WARNING"
    sidecar_threshold: int = Field(256, ge=1)


class Settings(BaseModel):
    """All package settings."""
    tolerances: Tolerances = Tolerances()
    sampling: Sampling = Sampling()
    quadrature: QuadratureSettings = QuadratureSettings()
    runtime: RuntimeSettings = RuntimeSettings()


def load_settings(path: Optional[Path] = None) -> Settings:
    """Load settings from JSON and apply AK_* environment overrides."""
    load_dotenv()
    env_path = os.getenv("AK_CONFIG")
    path = Path(env_path) if env_path else (path or DEFAULT_CONFIG_PATH)

    if path.exists():
        settings = Settings(**json.loads(path.read_text()))
    else:
        logger.debug("config_file_missing", path=str(path))
        settings = Settings()

    threads = os.getenv("AK_THREADS")
    if threads:
        settings.runtime.threads = max(1, int(threads))
    log_level = os.getenv("AK_LOG_LEVEL")
    if log_level:
        settings.runtime.log_level = log_level.upper()
    seed = os.getenv("AK_SEED")
    if seed:
        settings.sampling.seed = int(seed)

    return settings


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide settings."""
    return load_settings()
