"""
Basic configuration

- Settings loaded from environment variables (prefix DEEPREST_) and .env
- Unitarity tolerances for learned and loaded transforms
- Worker pool size for batch table runs
"""
from functools import lru_cache
from pathlib import Path
from typing import List

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Project root directory (parent of deeprest/)
PROJECT_ROOT = Path(__file__).parent.parent.parent


class Settings(BaseSettings):
    """
    Runtime settings for the CLI and HTTP surface
    """
    model_config = SettingsConfigDict(
        env_prefix="DEEPREST_",
        env_file=PROJECT_ROOT / ".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    data_dir: Path             = Field(Path("data"), description="Root directory for stored models and runs")
    log_level: str             = Field("INFO", description="Logging level name")
    enable_png: bool           = Field(True, description="Allow PNG input/output (requires Pillow)")
    unitarity_tol: float       = Field(1e-10, description="Contract checked after every Procrustes update")
    unitarity_warn_tol: float  = Field(1e-8, description="Model load warns above this deviation")
    unitarity_error_tol: float = Field(1e-4, description="Model load fails above this deviation")
    table_workers: int         = Field(1, description="Process pool size for batch table runs")
    model_cache_ttl: int       = Field(300, description="Seconds a loaded model stays cached")
    cors_origins: str          = Field("*", description="Comma-separated list of allowed origins")

    @field_validator("table_workers")
    @classmethod
    def validate_table_workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("table_workers must be at least 1")
        return value

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level: {value}")
        return value

    @property
    def cors_origin_list(self) -> List[str]:
        # Split by comma and clean up whitespace
        return [origin.strip() for origin in self.cors_origins.split(",") if origin.strip()]


@lru_cache
def get_settings() -> Settings:
    return Settings()
