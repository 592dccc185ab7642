# services/pipeline_service.py

"""
Training pipelines: velocity regression, distillation (lmd, emd, pfmm) and
direct flow-map training (fmm, ee, denoiser).
"""

from typing import List, Optional

from config.experiment import ExperimentConfig
from diffnet.models import FlowMapModel
from objectives.losses import DISTILL_KINDS, LossKind, parse_loss_kind
from utils.exceptions import ConfigurationError
from utils.logger import get_logger

from .builders import (
    ExperimentSetup,
    build_loss_spec,
    build_setup,
    check_compatible,
    load_model,
    new_model,
    resolve_teacher,
)
from .training_service import TrainingResult, TrainingService

# Initialize logger
logger = get_logger(__name__)

DIRECT_KINDS = (LossKind.FMM, LossKind.EE, LossKind.DENOISER)
HALVING_K = 3


class PipelineService:
    """Entry points behind train-velocity, distill and train-fmm."""

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None):
        self.config = config
        self.trainer = TrainingService(config, output_dir)
        logger.info(f"PipelineService initialized for run '{config.run.name}'")

    def _setup(self, teacher_velocity=None) -> ExperimentSetup:
        return build_setup(self.config, teacher_velocity)

    def train_velocity(self) -> TrainingResult:
        """Regress a velocity field on Idot_t."""
        kind = parse_loss_kind(self.config.loss.kind)
        if kind is not LossKind.VELOCITY:
            raise ConfigurationError(f"train-velocity needs loss.kind = velocity, got {kind.value}")
        teacher = self._paired_teacher()
        setup = self._setup(teacher)
        model = new_model(self.config, setup, "velocity")
        spec = build_loss_spec(self.config, setup)
        return self.trainer.train(model, spec, tag="velocity")

    def distill(self, mode: Optional[str] = None) -> List[TrainingResult]:
        """
        Distill a student flow map from a frozen teacher.

        lmd and emd take a velocity teacher. pfmm takes a flow-map teacher and
        runs loss.pfmm_rounds rounds; round one uses loss.K, later rounds
        distill the previous student with K = 3.

        Raises:
            ConfigurationError: On an unknown mode, a wrong teacher kind, or a
                warm start between incompatible shapes
        """
        kind = parse_loss_kind(mode or self.config.loss.kind)
        if kind not in DISTILL_KINDS:
            raise ConfigurationError(f"distill supports lmd, emd and pfmm, got {kind.value}")
        teacher = resolve_teacher(self.config, kind)
        setup = self._setup(self._paired_teacher())
        if hasattr(teacher, "params"):
            check_compatible(teacher, setup, self.config.run.teacher)

        if kind is not LossKind.PFMM:
            student = new_model(self.config, setup, "flowmap")
            spec = build_loss_spec(self.config, setup, kind.value)
            return [self.trainer.train(student, spec, teacher=teacher, tag=f"student-{kind.value}")]

        results = []
        rounds = self.config.loss.pfmm_rounds
        for r in range(1, rounds + 1):
            K = self.config.loss.K if r == 1 else HALVING_K
            student = self._pfmm_student(setup, teacher)
            spec = build_loss_spec(self.config, setup, kind.value, K=K)
            tag = "student-pfmm" if rounds == 1 else f"student-pfmm-r{r}"
            logger.info(f"PFMM round {r}/{rounds} with K={K}")
            result = self.trainer.train(student, spec, teacher=teacher, tag=tag, seed_offset=r - 1)
            results.append(result)
            teacher = result.model
        return results

    def _pfmm_student(self, setup: ExperimentSetup, teacher):
        fresh = new_model(self.config, setup, "flowmap")
        if not self.config.run.warm_start or not isinstance(teacher, FlowMapModel):
            return fresh
        if list(teacher.params.widths) != list(fresh.params.widths) or teacher.spec != fresh.spec:
            raise ConfigurationError(
                f"Cannot warm-start: teacher widths {teacher.params.widths} differ from "
                f"student widths {fresh.params.widths}"
            )
        logger.info("Warm-starting the student from the teacher parameters")
        return fresh.with_params(teacher.params.copy())

    def train_direct(self) -> TrainingResult:
        """fmm, ee or denoiser training without a teacher."""
        kind = parse_loss_kind(self.config.loss.kind)
        if kind not in DIRECT_KINDS:
            raise ConfigurationError(f"train-fmm supports fmm, ee and denoiser, got {kind.value}")
        setup = self._setup(self._paired_teacher())
        model = new_model(self.config, setup, "flowmap")
        spec = build_loss_spec(self.config, setup)
        return self.trainer.train(model, spec, tag=kind.value)

    def _paired_teacher(self):
        """Velocity used to generate pairs for the paired-dataset coupling."""
        if self.config.interpolant.coupling != "paired-dataset":
            return None
        if not self.config.run.teacher:
            raise ConfigurationError("paired-dataset coupling needs [run] teacher (a velocity checkpoint)")
        return load_model(self.config.run.teacher, "velocity")
