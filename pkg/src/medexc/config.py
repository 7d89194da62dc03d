"""Configuration management for medexc."""

import logging
import os

from pydantic import BaseModel, ConfigDict, Field

from medexc.exceptions import ConfigurationError

# Track if logging has been configured to avoid duplicate configuration
_logging_configured = False


class MedexcConfig(BaseModel):
    """Process-wide numerical and runtime settings."""

    # Numerical settings
    clip: float = Field(
        default=0.01,
        gt=0.0,
        lt=0.5,
        description="Probability clipping bound standing in for the positivity constant",
    )
    ridge: float = Field(
        default=1e-4, ge=0.0, description="Ridge penalty on non-intercept coefficients"
    )
    max_iter: int = Field(default=100, ge=1, description="Maximum IRLS iterations")
    tolerance: float = Field(
        default=1e-8, gt=0.0, description="Gradient-norm tolerance for IRLS"
    )
    weight_ratio_warning: float = Field(
        default=100.0,
        gt=1.0,
        description="Cross-world weight ratio q(b)/q(a) above which a warning is recorded",
    )

    # Runtime settings
    threads: int = Field(default=1, ge=1, description="Worker threads for replicates")

    # Logging settings
    log_level: str | int | None = Field(
        default="WARNING",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL or numeric value). "
        "Set to None to disable logging configuration and manage it yourself.",
    )

    model_config = ConfigDict(
        frozen=True,  # Make config immutable
        extra="forbid",  # Don't allow extra fields
    )

    @classmethod
    def from_env(cls, **overrides) -> "MedexcConfig":
        """Build a config from ``MEDEXC_*`` environment variables.

        Explicit keyword overrides win over the environment; ``None`` overrides
        are ignored so CLI flags that were not given fall through.

        Example:
            >>> import os
            >>> os.environ["MEDEXC_THREADS"] = "4"
            >>> MedexcConfig.from_env().threads
            4
        """
        values: dict = {}
        if threads := os.environ.get("MEDEXC_THREADS"):
            try:
                values["threads"] = int(threads)
            except ValueError:
                raise ConfigurationError(
                    f"MEDEXC_THREADS must be an integer, got {threads!r}"
                ) from None
        if level := os.environ.get("MEDEXC_LOG_LEVEL"):
            values["log_level"] = level
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def setup_logging(log_level: str | int | None) -> None:
    """Configure logging for medexc.

    This function sets up logging with a standard format that includes
    timestamp, logger name, level, and message. It uses a singleton pattern
    to ensure logging is only configured once per process.

    Args:
        log_level: Logging level to use. Can be:
            - String: "DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"
            - Integer: logging.DEBUG, logging.INFO, etc.
            - None: Skip logging configuration (user manages their own logging)

    Example:
        >>> setup_logging("DEBUG")
        >>> setup_logging(logging.INFO)
        >>> setup_logging(None)  # Don't configure logging
    """
    global _logging_configured

    # If log_level is None, don't configure logging
    if log_level is None:
        return

    # Only configure logging once
    if _logging_configured:
        return

    # Convert string log levels to uppercase for consistency
    if isinstance(log_level, str):
        log_level = log_level.upper()

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,  # Override any existing configuration
    )

    _logging_configured = True
