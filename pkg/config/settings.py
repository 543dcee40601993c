"""
Configuration module for the cantor-index library.

This module loads tunable constants from environment variables (optionally
via a .env file) and validates them. Job documents may override tolerances
per run; those overrides travel with the job config and never mutate the
singleton defined here.
"""

import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


class ConfigurationError(Exception):
    """Raised when required configuration is missing or invalid."""
    pass


class Settings:
    """Configuration settings for cantor-index computations."""

    # Parallelism cap for job execution
    CANTOR_INDEX_THREADS: int = int(os.getenv("CANTOR_INDEX_THREADS", "1"))

    # Numerical tolerances
    MATRIX_TOLERANCE: float = float(os.getenv("MATRIX_TOLERANCE", "1e-9"))
    UNITARY_TOLERANCE: float = float(os.getenv("UNITARY_TOLERANCE", "1e-12"))

    # Extra telescoping levels tried before K0 equality is reported undecided
    K0_EQUALITY_SLACK: int = int(os.getenv("K0_EQUALITY_SLACK", "3"))

    # Report formatting
    FLOAT_SIGNIFICANT_DIGITS: int = int(os.getenv("FLOAT_SIGNIFICANT_DIGITS", "12"))

    # Sampling seed for property-style commands
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "0"))

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
    LOG_DIR: str = os.getenv("LOG_DIR", "logs")

    @classmethod
    def validate(cls) -> None:
        """
        Validate numeric ranges of the configured constants.

        Raises:
            ConfigurationError: If a value is out of range.
        """
        if cls.CANTOR_INDEX_THREADS < 1:
            raise ConfigurationError("CANTOR_INDEX_THREADS must be at least 1")

        if not (0.0 < cls.MATRIX_TOLERANCE < 1.0):
            raise ConfigurationError("MATRIX_TOLERANCE must be between 0.0 and 1.0")

        if not (0.0 < cls.UNITARY_TOLERANCE < 1.0):
            raise ConfigurationError("UNITARY_TOLERANCE must be between 0.0 and 1.0")

        if cls.K0_EQUALITY_SLACK < 0:
            raise ConfigurationError("K0_EQUALITY_SLACK must be non-negative")

        if not (1 <= cls.FLOAT_SIGNIFICANT_DIGITS <= 17):
            raise ConfigurationError("FLOAT_SIGNIFICANT_DIGITS must be between 1 and 17")

        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigurationError(f"LOG_LEVEL '{cls.LOG_LEVEL}' is not a logging level")

    @classmethod
    def float_format(cls) -> str:
        """
        Get the format spec used for floats in reports.

        Returns:
            str: A format spec such as ".12g".
        """
        return f".{cls.FLOAT_SIGNIFICANT_DIGITS}g"


# Create a singleton instance
settings = Settings()

# Validate configuration on module import
try:
    settings.validate()
except ConfigurationError as e:
    # Log the error but don't fail on import
    import warnings
    warnings.warn(f"Configuration validation failed: {e}", UserWarning)


__all__ = ["settings", "Settings", "ConfigurationError"]
