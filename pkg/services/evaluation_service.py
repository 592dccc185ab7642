# services/evaluation_service.py

"""
Sampling from checkpoints and the metric panel (KL, W2^2, teacher L2, mismatch).
"""

import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from config.constants import EXT_CSV, EXT_PNG
from config.experiment import ExperimentConfig
from config.settings import settings
from diffnet.checkpoint import read_header
from interpolant.draws import make_rng
from metrics.divergence import HistogramGrid, kl_histogram, w2_assignment
from metrics.reports import MetricReport, mismatch_report, teacher_l2
from oracle.maps import OracleFlowMap
from sampler.grids import SampleRun
from sampler.integrators import integrate_ode, map_sample
from sampler.output import write_samples_csv, write_scatter
from utils.logger import get_logger

from .builders import build_target, gaussian_task, load_model

# Initialize logger
logger = get_logger(__name__)

TEACHER_L2_POINTS = 10000


@dataclass
class SampleBatch:
    points: np.ndarray
    labels: Optional[np.ndarray]
    method: str
    n_steps: int


@dataclass
class EvaluationResult:
    reports: List[MetricReport] = field(default_factory=list)
    files: List[str] = field(default_factory=list)


def generate(model, x0: np.ndarray, n_steps: int, labels=None, ode_method: str = "heun",
             seed: int = 0, run_id: str = "run") -> SampleBatch:
    """Push base points through a velocity (ODE) or flow map (map_sample) on a uniform grid."""
    if model.kind == "velocity":
        method = f"ode-{ode_method}"
    else:
        method = "map-onestep" if n_steps == 1 else "map-multistep"
    run = SampleRun.make(method, n_steps, seed=seed, count=len(x0), run_id=run_id)
    if run.uses_map:
        points = map_sample(model, x0, run.grid, labels)
    else:
        points = integrate_ode(model, x0, run.grid, ode_method, labels)
    return SampleBatch(points, labels, run.method.value, run.grid.n_steps)


class EvaluationService:
    """Backs the evaluate and sample subcommands."""

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None):
        self.config = config
        self.output_dir = output_dir or config.output_dir
        self.target = build_target(config)
        self.workers = settings.worker_count(config.run.deterministic)
        os.makedirs(self.output_dir, exist_ok=True)
        logger.info(f"EvaluationService initialized (output: {self.output_dir})")

    def _base(self, rng: np.random.Generator, count: int):
        x0 = rng.standard_normal((count, self.target.dim))
        labels = None
        if self.target.num_labels:
            labels = rng.integers(0, self.target.num_labels, size=count)
        return x0, labels

    def _teacher_map(self):
        """Callable x0 -> teacher one-shot output, or None without a teacher."""
        ev = self.config.eval
        if self.config.run.teacher:
            teacher = load_model(self.config.run.teacher)
            logger.info(f"Evaluation teacher: {self.config.run.teacher} ({teacher.kind})")
            return lambda x0, labels=None: generate(teacher, x0, ev.teacher_steps, labels, ev.teacher_method).points
        if self.config.task.name == "gaussian":
            oracle = OracleFlowMap(gaussian_task(self.config))
            return lambda x0, labels=None: oracle(0.0, 1.0, x0)
        return None

    def sample(self, checkpoint: str, steps: Optional[Sequence[int]] = None, count: Optional[int] = None,
               tag: str = "samples") -> EvaluationResult:
        """Write samples (CSV and scatter) for each step count."""
        model = load_model(checkpoint)
        steps = tuple(steps or self.config.eval.steps)
        count = count or self.config.eval.samples
        result = EvaluationResult()
        for n in steps:
            rng = make_rng(self.config.run.seed, 200 + n)
            x0, labels = self._base(rng, count)
            batch = generate(model, x0, n, labels, self.config.eval.teacher_method,
                             self.config.run.seed, self.config.run.name)
            result.files.extend(self._write_batch(batch, f"{tag}-N{n}"))
        return result

    def _write_batch(self, batch: SampleBatch, stem: str) -> List[str]:
        files = [write_samples_csv(os.path.join(self.output_dir, stem + EXT_CSV), batch.points,
                                   self.config.run.name, batch.method, batch.n_steps, batch.labels)]
        if self.config.eval.scatter and batch.points.shape[1] >= 2:
            files.append(write_scatter(os.path.join(self.output_dir, stem + EXT_PNG), batch.points,
                                       batch.labels, (self.config.eval.low, self.config.eval.high),
                                       title=f"{batch.method} N={batch.n_steps}"))
        return files

    def evaluate(self, checkpoint: str, steps: Optional[Sequence[int]] = None) -> EvaluationResult:
        """
        For each step count: samples, KL(target || model), W2^2 to the target,
        and, with a teacher, teacher L2, W2^2 to the teacher samples and the
        mismatch point set.
        """
        ev = self.config.eval
        header = read_header(checkpoint)
        model = load_model(checkpoint)
        steps = tuple(steps or ev.steps)
        teacher = self._teacher_map()
        result = EvaluationResult()
        metrics_path = os.path.join(self.output_dir, "metrics" + EXT_CSV)
        dim = self.target.dim
        grid = HistogramGrid.square(dim, ev.low, ev.high, ev.bins)

        try:
            for n in steps:
                rng = make_rng(self.config.run.seed, 300 + n)
                x0, labels = self._base(rng, ev.samples)
                target = (self.target.sample_labelled(labels, rng) if labels is not None
                          else self.target.sample(ev.samples, rng)[0])
                batch = generate(model, x0, n, labels, ev.teacher_method,
                                 self.config.run.seed, self.config.run.name)
                stem = f"eval-{header['model_kind']}-N{n}"
                result.files.extend(self._write_batch(batch, stem))

                kl = kl_histogram(target, batch.points, grid)
                w2, w2_se = w2_assignment(target, batch.points, ev.w2_subsample, ev.w2_repeats, rng,
                                             workers=self.workers)
                report = MetricReport(
                    run_id=self.config.run.name, method=batch.method, n_steps=n, kl=kl, w2sq=w2,
                    w2sq_stderr=w2_se, n_model=len(batch.points), n_target=len(target),
                    seed=self.config.run.seed,
                )
                if teacher is not None and model.kind == "flowmap":
                    self._teacher_metrics(report, model, teacher, x0, labels, batch, rng, stem, result)
                result.reports.append(report)
                report.append_csv(metrics_path)
                text_path = os.path.join(self.output_dir, f"{stem}.metrics.txt")
                with open(text_path, "w") as f:
                    f.write(report.to_text())
                result.files.append(text_path)
                logger.info(f"N={n}: KL={kl:.4f} W2^2={w2:.4f}+/-{w2_se:.4f}"
                            + ("" if report.teacher_l2 is None else f" teacher-L2={report.teacher_l2:.4f}"))
        except Exception as e:
            logger.error(f"Evaluation of {checkpoint} failed: {e}", exc_info=True)
            raise
        result.files.append(metrics_path)
        return result

    def _teacher_metrics(self, report: MetricReport, model, teacher, x0, labels, batch: SampleBatch,
                         rng, stem: str, result: EvaluationResult) -> None:
        ev = self.config.eval
        count = min(len(x0), TEACHER_L2_POINTS)
        sub_x0 = x0[:count]
        sub_labels = None if labels is None else labels[:count]
        teacher_fn = lambda x: teacher(x, sub_labels)  # noqa: E731
        report.teacher_l2 = teacher_l2(model, teacher_fn, sub_x0, sub_labels)
        teacher_points = teacher_fn(sub_x0)
        report.w2sq_teacher, report.w2sq_teacher_stderr = w2_assignment(
            teacher_points, batch.points[:count], min(ev.w2_subsample, count), ev.w2_repeats, rng,
            workers=self.workers,
        )
        mismatch = mismatch_report(model, teacher_fn, sub_x0, ev.mismatch_threshold, sub_labels)
        report.mismatch_fraction = mismatch.flagged_fraction
        result.files.append(mismatch.write_csv(os.path.join(self.output_dir, f"{stem}.mismatch{EXT_CSV}")))
