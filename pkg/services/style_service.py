# services/style_service.py

import csv
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from config.constants import EXT_CSV, EXT_PNG
from config.experiment import ExperimentConfig
from interpolant.datasets import checkerboard_class
from interpolant.draws import make_rng
from sampler.integrators import invert_and_restyle
from sampler.output import write_scatter
from utils.exceptions import UsageError
from utils.logger import get_logger

from .builders import build_target, load_model

# Initialize logger
logger = get_logger(__name__)


@dataclass
class StyleReport:
    """
    Attributes:
        in_target_class: Fraction of restyled points inside the new class's cells
        cycle_median_error: Median |restyle(x; y -> y) - x|
    """
    source_label: int
    target_label: int
    s_prime: float
    in_target_class: float
    cycle_median_error: float
    files: List[str] = field(default_factory=list)

    def to_text(self) -> str:
        return (f"source_label={self.source_label}\ntarget_label={self.target_label}\n"
                f"s_prime={self.s_prime}\nin_target_class={self.in_target_class}\n"
                f"cycle_median_error={self.cycle_median_error}\n")


class StyleTransferService:
    """Inversion-based class transfer with a label-conditional flow map."""

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None):
        self.config = config
        self.output_dir = output_dir or config.output_dir
        os.makedirs(self.output_dir, exist_ok=True)
        logger.info(f"StyleTransferService initialized (output: {self.output_dir})")

    def run(self, checkpoint: str, s_prime: Optional[float] = None, source_label: Optional[int] = None,
            target_label: Optional[int] = None) -> StyleReport:
        """
        Restyle target points of class source_label into target_label.

        Raises:
            UsageError: If the checkpoint is not a label-conditional flow map
        """
        style = self.config.style
        s_prime = style.s_prime if s_prime is None else s_prime
        y = style.source_label if source_label is None else source_label
        y_new = style.target_label if target_label is None else target_label
        model = load_model(checkpoint)
        if model.kind != "flowmap" or model.num_labels < 2:
            raise UsageError(f"Style transfer needs a label-conditional flow map, got {checkpoint}")
        for label in (y, y_new):
            if not 0 <= label < model.num_labels:
                raise UsageError(f"Label {label} outside [0, {model.num_labels})")

        target = build_target(self.config)
        rng = make_rng(self.config.run.seed, 400)
        labels = np.full(style.count, y)
        x1 = target.sample_labelled(labels, rng)
        new_labels = np.full(style.count, y_new)

        restyled = invert_and_restyle(model, x1, labels, new_labels, s_prime,
                                      style.back_steps, style.forward_steps)
        cycled = invert_and_restyle(model, x1, labels, labels, s_prime, style.back_steps, style.forward_steps)
        classes = checkerboard_class(restyled)
        in_class = float(np.mean(classes == y_new))
        cycle_error = float(np.median(np.linalg.norm(cycled - x1, axis=1)))

        report = StyleReport(y, y_new, s_prime, in_class, cycle_error)
        stem = os.path.join(self.output_dir, f"style-{y}-to-{y_new}")
        report.files.append(self._write_pairs(stem + EXT_CSV, x1, restyled, cycled, classes))
        lo_hi = (self.config.eval.low, self.config.eval.high)
        report.files.append(write_scatter(stem + ".before" + EXT_PNG, x1, labels, lo_hi, "before"))
        report.files.append(write_scatter(stem + ".after" + EXT_PNG, restyled, new_labels, lo_hi, "after"))
        summary = stem + ".summary.txt"
        with open(summary, "w") as f:
            f.write(report.to_text())
        report.files.append(summary)
        logger.info(f"Style transfer {y}->{y_new} at s'={s_prime}: {in_class:.1%} in target class, "
                    f"cycle median error {cycle_error:.4f}")
        return report

    @staticmethod
    def _write_pairs(path: str, before, after, cycled, classes) -> str:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["before_x", "before_y", "after_x", "after_y", "cycle_x", "cycle_y", "after_class"])
            for b, a, c, k in zip(before, after, cycled, classes):
                writer.writerow([repr(float(v)) for v in (*b, *a, *c)] + [int(k)])
        return path
