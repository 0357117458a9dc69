"""Typed environment configuration using Pydantic Settings.

The Config class (config.py) holds the numeric defaults of config.yaml.
This module handles the process-level knobs that come from the
environment: thread count, log level and log directory.
"""

from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from LCIRT_* environment variables."""

    threads: int = Field(default=1, ge=1, description="Default worker threads")
    log_level: str = Field(default="INFO")
    log_dir: str = Field(default="", description="Directory for file logs (empty = none)")
    config: str = Field(default="", description="Alternate config.yaml path")

    model_config = {
        "env_prefix": "LCIRT_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }

    @field_validator("log_level")
    @classmethod
    def upper_log_level(cls, v: str) -> str:
        return v.upper()

    @property
    def has_log_dir(self) -> bool:
        return bool(self.log_dir)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings singleton."""
    return Settings()


settings = get_settings()
