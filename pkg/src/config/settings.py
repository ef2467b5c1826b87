# Environment-level settings for the maIoU toolkit.
# Run-specific knobs (dataset, anchors, assigners) live in run_config.py.

import os
import socket
from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

##############################################################################
# Settings Classes
##############################################################################

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class LoggingSettings(BaseSettings):
    LEVEL: str = Field(
        "WARNING",
        validation_alias=AliasChoices("MAIOU_LOG", "MAIOU_LOG_LEVEL"),
        description="Logging level"
    )
    FORMAT: str = Field(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        validation_alias=AliasChoices("MAIOU_LOG_FORMAT"),
        description="Log format string"
    )

    @field_validator("LEVEL")
    def validate_level(cls, v):
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"Log level must be one of {LOG_LEVELS}")
        return level

    model_config = SettingsConfigDict(populate_by_name=True, extra="ignore")


class AnalysisSettings(BaseSettings):
    SPEEDUP_FLOOR: float = Field(10.0, gt=0, description="Minimum fast/brute speedup accepted by the bench")
    MIN_REPETITIONS: int = Field(5, ge=1, description="Repetitions below this mark a bench run as low-confidence")
    DEFAULT_BINS: int = Field(20, ge=1, description="Histogram bins per axis")

    model_config = SettingsConfigDict(env_prefix="MAIOU_", extra="ignore")


class AppSettings(BaseSettings):
    PROJECT_NAME: str = Field("maiou", description="Project name")
    VERSION: str = Field("1.0.0", description="Package version")
    SCHEMA_VERSION: int = Field(1, description="Version stamped into every JSON report")

    # Sub-settings
    LOGGING: LoggingSettings = Field(default_factory=LoggingSettings)
    ANALYSIS: AnalysisSettings = Field(default_factory=AnalysisSettings)

    # Host information recorded in bench reports
    HOST_NAME: str = Field(default_factory=socket.gethostname)

    model_config = SettingsConfigDict(
        env_prefix="MAIOU_",
        env_file=(".env", f".env.{os.getenv('MAIOU_ENV', 'development').lower()}"),
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )


settings = AppSettings()
