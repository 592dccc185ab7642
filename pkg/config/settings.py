"""
Centralized process settings for the flow map laboratory.
Loads and validates environment variables; experiment parameters live in
config.experiment instead.
"""

import os

from dotenv import load_dotenv


class Settings:
    """
    Centralized configuration class.
    Loads settings from environment variables with validation.
    """

    def __init__(self):
        """Initialize settings by loading environment variables."""
        # Load .env file
        load_dotenv()

        # Worker pool
        self.threads = self._get_int_env("FLOWMAP_THREADS", os.cpu_count() or 1)
        self.deterministic = os.getenv("FLOWMAP_DETERMINISTIC", "false").lower() == "true"

        # Output
        self.output_dir = os.getenv("FLOWMAP_OUTPUT_DIR", "runs")

        # Logging Configuration
        self.log_level = os.getenv("LOG_LEVEL", "INFO")
        self.log_file = os.getenv("FLOWMAP_LOG_FILE", "flowmap.log")
        self.log_max_bytes = self._get_int_env("LOG_MAX_BYTES", 10485760)  # 10MB
        self.log_backup_count = self._get_int_env("LOG_BACKUP_COUNT", 3)

    def _get_int_env(self, key: str, default: int) -> int:
        """
        Get a positive integer environment variable.

        Raises:
            ValueError: If the variable is set but not a positive integer
        """
        raw = os.getenv(key)
        if raw is None or raw.strip() == "":
            return int(default)
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"Environment variable '{key}' must be an integer, got '{raw}'")
        if value <= 0:
            raise ValueError(f"Environment variable '{key}' must be positive, got {value}")
        return value

    def worker_count(self, deterministic: bool = False) -> int:
        """Number of workers a run may use; deterministic mode forces one."""
        if deterministic or self.deterministic:
            return 1
        return max(1, self.threads)

    def __repr__(self):
        return (
            f"Settings("
            f"threads={self.threads}, "
            f"deterministic={self.deterministic}, "
            f"output_dir='{self.output_dir}', "
            f"log_level={self.log_level}"
            f")"
        )


# Global settings instance
settings = Settings()
