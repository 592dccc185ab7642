"""
Logging configuration for the flow map laboratory.
Console and rotating file logging, plus an optional per-run log file that
lands in the run's output directory.
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Dict, Optional

from config.settings import settings

RUN_LOG_NAME = "run.log"

DETAILED_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

_configured: Dict[str, logging.Logger] = {}
_run_handler: Optional[logging.Handler] = None


def get_logger(name: str) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__ of the module)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Only configure if not already configured
    if not logger.handlers:
        logger.setLevel(getattr(logging, settings.log_level.upper(), logging.INFO))

        detailed_formatter = logging.Formatter(DETAILED_FORMAT, datefmt=DATE_FORMAT)
        simple_formatter = logging.Formatter('%(levelname)s: %(message)s')

        # Console handler (simple format)
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(simple_formatter)
        logger.addHandler(console_handler)

        # File handler with rotation (detailed format)
        try:
            file_handler = RotatingFileHandler(
                settings.log_file,
                maxBytes=settings.log_max_bytes,
                backupCount=settings.log_backup_count
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(detailed_formatter)
            logger.addHandler(file_handler)
        except Exception as e:
            logger.warning(f"Could not create file handler: {e}")

        if _run_handler is not None:
            logger.addHandler(_run_handler)

    _configured[name] = logger
    return logger


def attach_run_log(output_dir: str) -> str:
    """
    Copy every module's records (DEBUG and up) into output_dir/run.log until
    detach_run_log is called. Loggers created later join automatically.
    """
    global _run_handler
    detach_run_log()
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, RUN_LOG_NAME)
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(DETAILED_FORMAT, datefmt=DATE_FORMAT))
    for logger in _configured.values():
        logger.addHandler(handler)
    _run_handler = handler
    return path


def detach_run_log() -> None:
    """Detach and close the per-run log file; a no-op when none is attached."""
    global _run_handler
    if _run_handler is None:
        return
    for logger in _configured.values():
        logger.removeHandler(_run_handler)
    _run_handler.close()
    _run_handler = None
