"""
Experiment configuration.

A run is described by a sectioned key=value file:

    [run]          name, seed, deterministic, output_dir, train_steps, batch_size,
                   log_every, teacher, warm_start
    [task]         name (checkerboard | checkerboard-2class | gaussian), mean, std
    [interpolant]  schedule, horizon, coupling, pairs
    [weight]       kind, K
    [network]      hidden, activation, frequencies, fd_time_derivative
    [optimizer]    lr, beta1, beta2, eps, decay, decay_every
    [loss]         kind, K, lam, pfmm_rounds
    [eval]         steps, method, samples, bins, low, high, w2_subsample,
                   w2_repeats, mismatch_threshold, teacher_steps, teacher_method, scatter
    [style]        s_prime, back_steps, forward_steps, source_label, target_label, count
    [oracle]       loss_samples, base_samples, perturbed_maps, perturbation_scale,
                   direction_sign, normalization, denoiser_steps

Lists are comma separated. Every key has a default, so an empty file is a
valid config.
"""

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Tuple, get_type_hints

from config.constants import (
    ACTIVATION,
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    ADAM_LR,
    BATCH_SIZE,
    GAUSSIAN_MEAN,
    GAUSSIAN_STD,
    HIDDEN_WIDTHS,
    KL_BINS,
    KL_RANGE,
    KL_SAMPLES,
    LOG_EVERY,
    LR_DECAY,
    LR_DECAY_EVERY,
    MISMATCH_THRESHOLD,
    ODE_STEPS,
    PAPER_HIDDEN_WIDTHS,
    PAPER_TRAIN_STEPS,
    STYLE_LEG_STEPS,
    STYLE_S_PRIME,
    TIME_FREQUENCIES,
    TRAIN_STEPS,
    VE_HORIZON,
    W2_REPEATS,
    W2_SUBSAMPLE,
)
from config.settings import settings
from utils.exceptions import ConfigurationError
from utils.logger import get_logger
from utils.validators import validate_file_exists

logger = get_logger(__name__)


@dataclass(frozen=True)
class RunSection:
    name: str = "run"
    seed: int = 0
    deterministic: bool = False
    output_dir: str = ""
    train_steps: int = TRAIN_STEPS
    batch_size: int = BATCH_SIZE
    log_every: int = LOG_EVERY
    teacher: Optional[str] = None
    warm_start: bool = True


@dataclass(frozen=True)
class TaskSection:
    name: str = "checkerboard"
    mean: Tuple[float, ...] = GAUSSIAN_MEAN
    std: Tuple[float, ...] = GAUSSIAN_STD


@dataclass(frozen=True)
class InterpolantSection:
    schedule: str = "linear"
    horizon: float = VE_HORIZON
    coupling: str = "independent"
    pairs: int = 20000


@dataclass(frozen=True)
class WeightSection:
    kind: str = "uniform-square"
    K: Optional[int] = None


@dataclass(frozen=True)
class NetworkSection:
    hidden: Tuple[int, ...] = HIDDEN_WIDTHS
    activation: str = ACTIVATION
    frequencies: int = TIME_FREQUENCIES
    fd_time_derivative: bool = False


@dataclass(frozen=True)
class OptimizerSection:
    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    decay: float = LR_DECAY
    decay_every: int = LR_DECAY_EVERY


@dataclass(frozen=True)
class LossSection:
    kind: str = "velocity"
    K: int = 2
    lam: float = 1.0
    pfmm_rounds: int = 1


@dataclass(frozen=True)
class EvalSection:
    steps: Tuple[int, ...] = (1,)
    method: str = "map"
    samples: int = KL_SAMPLES
    bins: int = KL_BINS
    low: float = KL_RANGE[0]
    high: float = KL_RANGE[1]
    w2_subsample: int = W2_SUBSAMPLE
    w2_repeats: int = W2_REPEATS
    mismatch_threshold: float = MISMATCH_THRESHOLD
    teacher_steps: int = ODE_STEPS
    teacher_method: str = "heun"
    scatter: bool = True


@dataclass(frozen=True)
class StyleSection:
    s_prime: float = STYLE_S_PRIME
    back_steps: int = STYLE_LEG_STEPS
    forward_steps: int = STYLE_LEG_STEPS
    source_label: int = 0
    target_label: int = 1
    count: int = 2000


@dataclass(frozen=True)
class OracleSection:
    loss_samples: int = 8192
    base_samples: int = 4096
    perturbed_maps: int = 20
    perturbation_scale: float = 0.1
    direction_sign: float = 1.0
    normalization: str = "square"
    denoiser_steps: int = 3000


SECTIONS = {
    "run": RunSection,
    "task": TaskSection,
    "interpolant": InterpolantSection,
    "weight": WeightSection,
    "network": NetworkSection,
    "optimizer": OptimizerSection,
    "loss": LossSection,
    "eval": EvalSection,
    "style": StyleSection,
    "oracle": OracleSection,
}


def _parse_value(raw: str, annotation, where: str):
    raw = raw.strip()
    optional = getattr(annotation, "__origin__", None) is not None and type(None) in getattr(annotation, "__args__", ())
    if optional:
        if raw == "":
            return None
        annotation = next(a for a in annotation.__args__ if a is not type(None))
    try:
        if annotation is bool:
            lowered = raw.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: '{raw}'")
        if annotation is int:
            return int(raw)
        if annotation is float:
            return float(raw)
        if annotation is str:
            return raw
        if getattr(annotation, "__origin__", None) is tuple:
            item = annotation.__args__[0]
            return tuple(item(v.strip()) for v in raw.split(",") if v.strip())
    except ValueError as e:
        raise ConfigurationError(f"Bad value for {where}: {e}")
    raise ConfigurationError(f"Unsupported field type for {where}")


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _build_section(cls, items: dict, section: str):
    hints = get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, raw in items.items():
        if key not in known:
            raise ConfigurationError(f"Unknown key '{key}' in section [{section}]")
        kwargs[key] = _parse_value(raw, hints[key], f"[{section}] {key}")
    return cls(**kwargs)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full declarative description of one run."""
    run: RunSection = field(default_factory=RunSection)
    task: TaskSection = field(default_factory=TaskSection)
    interpolant: InterpolantSection = field(default_factory=InterpolantSection)
    weight: WeightSection = field(default_factory=WeightSection)
    network: NetworkSection = field(default_factory=NetworkSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    loss: LossSection = field(default_factory=LossSection)
    eval: EvalSection = field(default_factory=EvalSection)
    style: StyleSection = field(default_factory=StyleSection)
    oracle: OracleSection = field(default_factory=OracleSection)

    @classmethod
    def from_string(cls, text: str, source: str = "<string>") -> "ExperimentConfig":
        """
        Parse a config text.

        Raises:
            ConfigurationError: On syntax errors, unknown sections or keys, or bad values
        """
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read_string(text, source=source)
        except configparser.Error as e:
            raise ConfigurationError(f"Cannot parse {source}: {e}")
        sections = {}
        for name in parser.sections():
            if name not in SECTIONS:
                raise ConfigurationError(f"Unknown section [{name}] in {source}")
            sections[name] = _build_section(SECTIONS[name], dict(parser.items(name)), name)
        config = cls(**sections)
        config.validate()
        return config

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        validate_file_exists(path, "Config file")
        with open(path, encoding="utf-8") as f:
            config = cls.from_string(f.read(), source=path)
        logger.debug(f"Loaded config {path} (hash {config.config_hash()[:12]})")
        return config

    def validate(self) -> None:
        """Cross-field checks; checkpoint compatibility is checked when the teacher is loaded."""
        if self.run.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.run.seed}")
        if self.run.train_steps < 0:
            raise ConfigurationError(f"train_steps must be non-negative, got {self.run.train_steps}")
        if self.run.batch_size < 1:
            raise ConfigurationError(f"batch_size must be positive, got {self.run.batch_size}")
        if self.run.log_every < 1:
            raise ConfigurationError(f"log_every must be positive, got {self.run.log_every}")
        if self.task.name not in ("checkerboard", "checkerboard-2class", "gaussian"):
            raise ConfigurationError(f"Unknown task '{self.task.name}'")
        if len(self.task.mean) != len(self.task.std):
            raise ConfigurationError("task mean and std must have equal length")
        if self.loss.kind in ("lmd", "emd", "pfmm") and self.run.teacher is None and self.task.name != "gaussian":
            raise ConfigurationError(f"loss '{self.loss.kind}' requires [run] teacher")
        if not self.network.hidden:
            raise ConfigurationError("network.hidden needs at least one layer")
        if any(n < 1 for n in self.eval.steps):
            raise ConfigurationError(f"eval.steps must be positive, got {self.eval.steps}")
        if not 0.0 < self.style.s_prime < 1.0:
            raise ConfigurationError(f"style.s_prime must lie in (0, 1), got {self.style.s_prime}")
        if self.loss.pfmm_rounds < 1:
            raise ConfigurationError(f"loss.pfmm_rounds must be positive, got {self.loss.pfmm_rounds}")

    def as_dict(self) -> dict:
        return asdict(self)

    def serialize(self) -> str:
        """Canonical text form; parsing it gives back an equal config."""
        lines = []
        for name in SECTIONS:
            lines.append(f"[{name}]")
            section = getattr(self, name)
            for f in fields(section):
                lines.append(f"{f.name} = {_format_value(getattr(section, f.name))}")
            lines.append("")
        return "\n".join(lines)

    def config_hash(self) -> str:
        """SHA-256 of the key-sorted config, independent of key order in the source file."""
        canonical = json.dumps(self.as_dict(), sort_keys=True, default=list)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(self, seed: Optional[int] = None, deterministic: bool = False,
                       paper_scale: bool = False, output_dir: Optional[str] = None) -> "ExperimentConfig":
        """Apply command-line overrides."""
        run = self.run
        if seed is not None:
            run = replace(run, seed=int(seed))
        if deterministic:
            run = replace(run, deterministic=True)
        if output_dir:
            run = replace(run, output_dir=output_dir)
        config = replace(self, run=run)
        if paper_scale:
            config = replace(
                config,
                run=replace(config.run, train_steps=PAPER_TRAIN_STEPS),
                network=replace(config.network, hidden=PAPER_HIDDEN_WIDTHS),
            )
        config.validate()
        return config

    @property
    def output_dir(self) -> str:
        return self.run.output_dir or f"{settings.output_dir}/{self.run.name}"
