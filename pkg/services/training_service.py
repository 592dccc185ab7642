# services/training_service.py

import csv
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config.constants import EXT_CKPT, EXT_CSV
from config.experiment import ExperimentConfig
from diffnet.checkpoint import save_checkpoint
from diffnet.graph import param_grad
from diffnet.optimizer import AdamHyper, AdamState, adam_step
from interpolant.draws import make_rng
from objectives.losses import LossBatchSpec, evaluate_loss
from utils.exceptions import NumericError
from utils.logger import get_logger

from .builders import build_hyper

# Initialize logger
logger = get_logger(__name__)


@dataclass
class TrainingResult:
    """
    Attributes:
        model: Model after the last completed step
        state: Optimizer state after the last completed step
        checkpoint: Path of the saved checkpoint
        curve_path: Path of the loss-curve CSV
        curve: Rows of the loss curve (one per logging window)
    """
    model: object
    state: AdamState
    checkpoint: str
    curve_path: str
    curve: List[Dict[str, float]] = field(default_factory=list)

    @property
    def final_loss(self) -> Optional[float]:
        return self.curve[-1]["loss"] if self.curve else None


class TrainingService:
    """Runs the Adam loop for any loss kind and writes checkpoint + loss curve."""

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None):
        self.config = config
        self.output_dir = output_dir or config.output_dir
        self.hyper: AdamHyper = build_hyper(config)
        os.makedirs(self.output_dir, exist_ok=True)
        logger.info(f"TrainingService initialized (output: {self.output_dir})")

    def _path(self, tag: str, suffix: str) -> str:
        return os.path.join(self.output_dir, f"{tag}{suffix}")

    def train(self, model, spec: LossBatchSpec, teacher=None, tag: str = "model",
              steps: Optional[int] = None, seed_offset: int = 0) -> TrainingResult:
        """
        Fit model to spec's loss.

        Every log_every steps the mean loss of the window is logged and added
        to the curve. On a non-finite loss, gradient or update the last good
        parameters are checkpointed and NumericError is re-raised.
        """
        steps = self.config.run.train_steps if steps is None else steps
        log_every = self.config.run.log_every
        rng = make_rng(self.config.run.seed, seed_offset)
        state = AdamState.zeros_like(model.params.arrays())
        curve: List[Dict[str, float]] = []
        window: List[float] = []
        window_terms: Dict[str, List[float]] = {}
        ckpt_path = self._path(tag, EXT_CKPT)
        logger.info(f"Training {model.kind} '{tag}' with {spec.kind.value} loss for {steps} steps "
                    f"(batch {spec.batch_size}, weight {spec.weight.label()})")

        for step in range(1, steps + 1):
            draw = spec.draw(rng)
            leaves = model.params.leaves(trainable=True)
            try:
                graph = evaluate_loss(spec, model, draw, teacher, leaves)
                grads = param_grad(graph)
                arrays, state = adam_step(model.params.arrays(), grads, state, self.hyper)
            except NumericError as e:
                save_checkpoint(self._path(f"{tag}.last-good", EXT_CKPT), model, state)
                logger.error(f"Training '{tag}' diverged at step {step}: {e}", exc_info=True)
                raise NumericError(f"Training diverged: {e}", step=step) from e
            model = model.with_params(model.params.with_arrays(arrays))
            window.append(graph.value)
            for name, value in graph.terms.items():
                window_terms.setdefault(name, []).append(value)

            if step % log_every == 0 or step == steps:
                row = {"step": step, "loss": float(np.mean(window)), "lr": self.hyper.rate(step)}
                row.update({name: float(np.mean(v)) for name, v in window_terms.items()})
                curve.append(row)
                logger.info(f"[{tag}] step {step}/{steps} loss={row['loss']:.6f} lr={row['lr']:.3e}")
                window, window_terms = [], {}

        save_checkpoint(ckpt_path, model, state)
        curve_path = self.write_curve(curve, self._path(f"{tag}.loss", EXT_CSV))
        logger.info(f"Saved '{tag}' checkpoint to {ckpt_path}")
        return TrainingResult(model, state, ckpt_path, curve_path, curve)

    @staticmethod
    def write_curve(curve: List[Dict[str, float]], path: str) -> str:
        columns = ["step", "loss", "lr"]
        for row in curve:
            columns.extend(k for k in row if k not in columns)
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            for row in curve:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return path
