"""
Teacher reconstruction error, mismatch point sets and metric reports.
"""

import csv
import os
from dataclasses import asdict, dataclass, fields
from typing import Callable, Dict, Optional

import numpy as np

from config.constants import MISMATCH_THRESHOLD
from utils.exceptions import NumericError, ValidationError
from utils.logger import get_logger
from utils.validators import validate_positive

logger = get_logger(__name__)

TeacherMap = Callable[[np.ndarray], np.ndarray]


def _one_step(student, x0: np.ndarray, label=None) -> np.ndarray:
    return np.asarray(student(0.0, 1.0, x0, label), dtype=float)


def teacher_l2(student, teacher: TeacherMap, x0: np.ndarray, label=None) -> float:
    """(1/N) sum |teacher(x) - X_{0,1}(x)|^2 over the same base points."""
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    diff = np.asarray(teacher(x0), dtype=float) - _one_step(student, x0, label)
    return float(np.mean(np.sum(diff * diff, axis=1)))


@dataclass
class MismatchReport:
    """
    Base points with the teacher and student one-step outputs.

    Attributes:
        exceeds: |teacher - student|^2 > threshold per point
    """
    x0: np.ndarray
    teacher_out: np.ndarray
    student_out: np.ndarray
    exceeds: np.ndarray
    threshold: float

    @property
    def flagged_fraction(self) -> float:
        return float(np.mean(self.exceeds)) if len(self.exceeds) else 0.0

    def write_csv(self, path: str) -> str:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        d = self.x0.shape[1]
        header = ([f"x0_{i}" for i in range(d)] + [f"teacher_{i}" for i in range(d)]
                  + [f"student_{i}" for i in range(d)] + ["exceeds"])
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for a, b, c, flag in zip(self.x0, self.teacher_out, self.student_out, self.exceeds):
                writer.writerow([repr(float(v)) for v in (*a, *b, *c)] + [int(flag)])
        return path


def mismatch_report(student, teacher: TeacherMap, x0: np.ndarray,
                    threshold: float = MISMATCH_THRESHOLD, label=None) -> MismatchReport:
    """Flag base points whose student image is farther than threshold (squared) from the teacher's."""
    validate_positive(threshold, "threshold")
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    teacher_out = np.asarray(teacher(x0), dtype=float)
    student_out = _one_step(student, x0, label)
    sq = np.sum((teacher_out - student_out) ** 2, axis=1)
    report = MismatchReport(x0, teacher_out, student_out, sq > threshold, float(threshold))
    logger.debug(f"Mismatch: {report.flagged_fraction:.3%} of {len(x0)} points above {threshold}")
    return report


@dataclass
class MetricReport:
    """One evaluation row."""
    run_id: str
    method: str
    n_steps: int
    kl: float
    w2sq: float
    w2sq_stderr: float
    n_model: int
    n_target: int
    seed: int
    teacher_l2: Optional[float] = None
    w2sq_teacher: Optional[float] = None
    w2sq_teacher_stderr: Optional[float] = None
    mismatch_fraction: Optional[float] = None

    def __post_init__(self):
        for name in ("kl", "w2sq", "w2sq_stderr", "teacher_l2", "w2sq_teacher", "w2sq_teacher_stderr"):
            value = getattr(self, name)
            if value is not None and not np.isfinite(value):
                raise NumericError(f"Metric {name} is not finite")
        for name in ("w2sq_stderr", "w2sq_teacher_stderr"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValidationError(f"{name} must be non-negative, got {value}")

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)

    def to_text(self) -> str:
        """Flat key=value block; absent optional metrics are omitted."""
        return "\n".join(f"{k}={v}" for k, v in self.as_dict().items() if v is not None) + "\n"

    def append_csv(self, path: str) -> str:
        columns = [f.name for f in fields(self)]
        new_file = not os.path.exists(path)
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "a", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            if new_file:
                writer.writeheader()
            writer.writerow({k: ("" if v is None else v) for k, v in self.as_dict().items()})
        return path
