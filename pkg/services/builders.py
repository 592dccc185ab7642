# services/builders.py

"""
Turns an ExperimentConfig into the objects a pipeline runs on.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.constants import ODE_STEPS
from config.experiment import ExperimentConfig
from diffnet.checkpoint import load_checkpoint, read_header
from diffnet.models import FlowMapModel, NetworkSpec, VelocityModel
from diffnet.optimizer import AdamHyper
from interpolant.couplings import Coupling, IndependentCoupling, PairedCoupling
from interpolant.datasets import TargetSampler
from interpolant.draws import make_rng
from interpolant.schedules import InterpolantSchedule, ScheduleKind, make_schedule
from interpolant.time_weights import TimeWeight, parse_weight
from objectives.losses import LossBatchSpec, LossKind, parse_loss_kind
from oracle.gaussian import GaussianTask
from oracle.maps import OracleFlowMap, OracleVelocity
from sampler.grids import TimeGrid
from sampler.integrators import integrate_ode
from utils.exceptions import ConfigurationError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class ExperimentSetup:
    """
    Attributes:
        schedule: Interpolant schedule
        target: Target sampler
        coupling: Base/target coupling used for training draws
        gaussian: The Gaussian task when task.name is gaussian
    """
    config: ExperimentConfig
    schedule: InterpolantSchedule
    target: TargetSampler
    coupling: Coupling
    gaussian: Optional[GaussianTask] = None

    @property
    def dim(self) -> int:
        return self.target.dim

    @property
    def num_labels(self) -> int:
        return self.target.num_labels


def gaussian_task(config: ExperimentConfig) -> GaussianTask:
    return GaussianTask(np.asarray(config.task.mean), np.asarray(config.task.std))


def build_target(config: ExperimentConfig) -> TargetSampler:
    if config.task.name == "gaussian":
        return gaussian_task(config).target
    return TargetSampler(config.task.name)


def build_weight(config: ExperimentConfig) -> TimeWeight:
    return parse_weight(config.weight.kind, config.weight.K)


def build_hyper(config: ExperimentConfig) -> AdamHyper:
    opt = config.optimizer
    return AdamHyper(lr=opt.lr, beta1=opt.beta1, beta2=opt.beta2, eps=opt.eps,
                     decay=opt.decay, decay_every=opt.decay_every)


def network_spec(config: ExperimentConfig, setup: ExperimentSetup) -> NetworkSpec:
    return NetworkSpec(
        dim=setup.dim,
        hidden=tuple(config.network.hidden),
        activation=config.network.activation,
        frequencies=config.network.frequencies,
        num_labels=setup.num_labels,
    )


def paired_coupling(target: TargetSampler, velocity, count: int, rng: np.random.Generator) -> PairedCoupling:
    """Pairs (x0, X_{0,1}(x0)) from Heun integration of a teacher velocity."""
    x0 = rng.standard_normal((count, target.dim))
    labels = None
    if target.num_labels:
        labels = rng.integers(0, target.num_labels, size=count)
    x1 = integrate_ode(velocity, x0, TimeGrid.uniform(ODE_STEPS), "heun", labels)
    logger.info(f"Generated {count} teacher pairs for the paired coupling")
    return PairedCoupling(x0, x1, labels)


def build_setup(config: ExperimentConfig, teacher_velocity=None) -> ExperimentSetup:
    """
    Raises:
        ConfigurationError: If the coupling is paired but no teacher velocity is available
    """
    schedule = make_schedule(config.interpolant.schedule, config.interpolant.horizon)
    target = build_target(config)
    if config.interpolant.coupling == "independent":
        coupling = IndependentCoupling(target)
    elif config.interpolant.coupling == "paired-dataset":
        if teacher_velocity is None:
            raise ConfigurationError("paired-dataset coupling needs a teacher velocity")
        rng = make_rng(config.run.seed, 1)
        coupling = paired_coupling(target, teacher_velocity, config.interpolant.pairs, rng)
    else:
        raise ConfigurationError(f"Unknown coupling '{config.interpolant.coupling}'")
    gaussian = gaussian_task(config) if config.task.name == "gaussian" else None
    return ExperimentSetup(config, schedule, target, coupling, gaussian)


def build_loss_spec(config: ExperimentConfig, setup: ExperimentSetup, kind: Optional[str] = None,
                    K: Optional[int] = None) -> LossBatchSpec:
    return LossBatchSpec(
        batch_size=config.run.batch_size,
        weight=build_weight(config),
        schedule=setup.schedule,
        coupling=setup.coupling,
        kind=parse_loss_kind(kind or config.loss.kind),
        K=config.loss.K if K is None else K,
        lam=config.loss.lam,
    )


def load_model(path: str, expected_kind: Optional[str] = None, fd_time_derivative: bool = False):
    """
    Load a checkpoint, optionally requiring a model kind.

    Raises:
        ConfigurationError: If the file is missing, malformed or of the wrong kind
    """
    header = read_header(path)
    if expected_kind is not None and header["model_kind"] != expected_kind:
        raise ConfigurationError(
            f"{path} holds a {header['model_kind']} model, expected {expected_kind}"
        )
    model, _ = load_checkpoint(path)
    if isinstance(model, FlowMapModel) and fd_time_derivative:
        model = FlowMapModel(model.spec, model.params, fd_time_derivative=True)
    return model


def check_compatible(model, setup: ExperimentSetup, path: str) -> None:
    if model.dim != setup.dim or model.num_labels != setup.num_labels:
        raise ConfigurationError(
            f"{path} has d={model.dim}, labels={model.num_labels}; the task needs "
            f"d={setup.dim}, labels={setup.num_labels}"
        )


def resolve_teacher(config: ExperimentConfig, kind: LossKind):
    """
    Teacher for a distillation loss: a velocity for lmd/emd, a flow map for pfmm.

    Without a checkpoint the Gaussian task falls back to its closed forms.
    """
    expected = "flowmap" if kind is LossKind.PFMM else "velocity"
    if config.run.teacher:
        return load_model(config.run.teacher, expected)
    if config.task.name != "gaussian":
        raise ConfigurationError(f"loss '{kind.value}' requires [run] teacher")
    if config.interpolant.schedule != ScheduleKind.LINEAR.value:
        raise ConfigurationError("The closed-form Gaussian teacher needs the linear schedule")
    task = gaussian_task(config)
    logger.info(f"Using the closed-form Gaussian {expected} as teacher")
    return OracleFlowMap(task) if expected == "flowmap" else OracleVelocity(task)


def new_model(config: ExperimentConfig, setup: ExperimentSetup, kind: str, seed_offset: int = 0):
    rng = make_rng(config.run.seed, 100 + seed_offset)
    spec = network_spec(config, setup)
    if kind == "velocity":
        return VelocityModel.initialize(spec, rng)
    model = FlowMapModel.initialize(spec, rng)
    if config.network.fd_time_derivative:
        model = FlowMapModel(model.spec, model.params, fd_time_derivative=True)
    return model
