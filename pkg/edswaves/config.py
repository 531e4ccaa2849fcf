"""
Runtime settings.

Values come from EDS_WAVES_* environment variables with defaults; CLI flags override
them per run. Nothing here changes a verdict: the gcd flag only trades speed for
expression size.
"""

import os
from functools import lru_cache

from pydantic import BaseModel, Field, field_validator


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


def _env_range(name: str, default: tuple[float, float]) -> tuple[float, float]:
    raw = os.getenv(name)
    if not raw:
        return default
    lo, hi = (float(part) for part in raw.split(","))
    return (lo, hi)


class Settings(BaseModel):
    """Process-wide settings."""

    gcd_reduce: bool = True
    grid_nx: int = Field(default=201, ge=2)
    grid_nt: int = Field(default=101, ge=1)
    x_range: tuple[float, float] = (-20.0, 20.0)
    t_range: tuple[float, float] = (0.0, 10.0)
    tolerance: float = Field(default=1e-8, gt=0)
    residual_limit: int = Field(default=200, ge=20)
    log_level: str = "WARNING"

    @field_validator("x_range", "t_range")
    @classmethod
    def _ordered(cls, value: tuple[float, float]) -> tuple[float, float]:
        if value[0] > value[1]:
            raise ValueError(f"range must be increasing, got {value}")
        return value


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build settings from the environment once per process."""
    return Settings(
        gcd_reduce=_env_bool("EDS_WAVES_GCD_REDUCE", True),
        grid_nx=int(os.getenv("EDS_WAVES_GRID_NX", "201")),
        grid_nt=int(os.getenv("EDS_WAVES_GRID_NT", "101")),
        x_range=_env_range("EDS_WAVES_X_RANGE", (-20.0, 20.0)),
        t_range=_env_range("EDS_WAVES_T_RANGE", (0.0, 10.0)),
        tolerance=float(os.getenv("EDS_WAVES_TOL", "1e-8")),
        residual_limit=int(os.getenv("EDS_WAVES_RESIDUAL_LIMIT", "200")),
        log_level=os.getenv("EDS_WAVES_LOG_LEVEL", "WARNING"),
    )
