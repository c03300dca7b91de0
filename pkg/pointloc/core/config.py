"""Configuration management."""

from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Ambient settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        env_prefix="POINTLOC_",
    )

    # Application
    debug: bool = False

    # Logging
    log_level: str = "INFO"
    log_format: str = "rich"

    # Observability
    enable_metrics: bool = True
    metrics_filename: str = "metrics.prom"

    # Execution
    default_workers: int = 1
    eval_seed: int = 20480


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """
    Get ambient settings.

    Returns:
        Settings instance
    """
    return settings
