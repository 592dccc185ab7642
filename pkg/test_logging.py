"""
Tests for the logging setup and environment settings.
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler

import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.settings import Settings, settings
from utils.logger import attach_run_log, detach_run_log, get_logger


def test_logger_has_console_and_rotating_file_handlers():
    logger = get_logger("flowmap.test.handlers")
    kinds = {type(h) for h in logger.handlers}
    assert logging.StreamHandler in kinds
    assert RotatingFileHandler in kinds
    console = next(h for h in logger.handlers if type(h) is logging.StreamHandler)
    assert console.level == logging.INFO
    rotating = next(h for h in logger.handlers if isinstance(h, RotatingFileHandler))
    assert rotating.level == logging.DEBUG
    assert rotating.maxBytes == settings.log_max_bytes


def test_get_logger_configures_once():
    first = get_logger("flowmap.test.once")
    count = len(first.handlers)
    second = get_logger("flowmap.test.once")
    assert first is second
    assert len(second.handlers) == count


def test_console_shows_info_but_not_debug(capsys):
    logger = get_logger("flowmap.test.console")
    logger.setLevel(logging.DEBUG)
    logger.debug("debug line for the file only")
    logger.info("Training step 10: loss=0.5")
    out = capsys.readouterr().out
    assert "INFO: Training step 10: loss=0.5" in out
    assert "debug line" not in out


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("FLOWMAP_THREADS", "3")
    monkeypatch.setenv("FLOWMAP_DETERMINISTIC", "true")
    monkeypatch.setenv("FLOWMAP_OUTPUT_DIR", "elsewhere")
    fresh = Settings()
    assert fresh.threads == 3
    assert fresh.output_dir == "elsewhere"
    assert fresh.worker_count() == 1


def test_worker_count_respects_deterministic_flag(monkeypatch):
    monkeypatch.setenv("FLOWMAP_THREADS", "4")
    monkeypatch.setenv("FLOWMAP_DETERMINISTIC", "false")
    fresh = Settings()
    assert fresh.worker_count() == 4
    assert fresh.worker_count(deterministic=True) == 1


@pytest.mark.parametrize("raw", ["zero", "0", "-2"])
def test_settings_reject_bad_thread_count(monkeypatch, raw):
    monkeypatch.setenv("FLOWMAP_THREADS", raw)
    with pytest.raises(ValueError):
        Settings()


def test_run_log_collects_records_until_detached(tmp_path):
    early = get_logger("flowmap.test.run.early")
    path = attach_run_log(str(tmp_path))
    late = get_logger("flowmap.test.run.late")
    early.setLevel(logging.DEBUG)
    early.debug("step 5 of the early module")
    late.warning("late module warning")
    detach_run_log()
    early.info("after detach")
    text = open(path, encoding="utf-8").read()
    assert os.path.basename(path) == "run.log"
    assert "flowmap.test.run.early - DEBUG - step 5 of the early module" in text
    assert "late module warning" in text
    assert "after detach" not in text


def test_detach_without_run_log_is_a_no_op():
    detach_run_log()
    detach_run_log()
