"""
Batch estimators of the training losses.

Every loss takes the model being fit, a batch of interpolant draws and the
trainable leaves of that model, and returns a LossGraph whose root is the
batch mean of the per-sample squared residuals.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from diffnet.graph import LossGraph, Var, mean_sq_norm, stop_gradient, value_of
from diffnet.models import flow_map_ds, flow_map_dt, flow_map_eval, flow_map_jvp_x
from interpolant.couplings import Coupling
from interpolant.draws import InterpolantDraw, draw_interpolant, eval_at
from interpolant.schedules import InterpolantSchedule
from interpolant.time_weights import TimeWeight
from utils.exceptions import ConfigurationError, ValidationError


class LossKind(Enum):
    VELOCITY = "velocity"
    LMD = "lmd"
    EMD = "emd"
    FMM = "fmm"
    PFMM = "pfmm"
    EE = "ee"
    DENOISER = "denoiser"


FLOW_MAP_KINDS = (LossKind.LMD, LossKind.EMD, LossKind.FMM, LossKind.PFMM, LossKind.EE, LossKind.DENOISER)
DISTILL_KINDS = (LossKind.LMD, LossKind.EMD, LossKind.PFMM)


def parse_loss_kind(kind: str) -> LossKind:
    try:
        return LossKind(kind)
    except ValueError:
        raise ConfigurationError(
            f"Unknown loss '{kind}'. Expected one of: {', '.join(k.value for k in LossKind)}"
        )


@dataclass(frozen=True)
class LossBatchSpec:
    """
    What one training step draws and which loss it evaluates.

    Attributes:
        batch_size: M
        weight: Time-pair weight
        schedule: Interpolant schedule
        coupling: Base/target coupling
        kind: Loss kind
        K: Grid points of the progressive teacher composition (pfmm)
        lam: Relative weight of the invertibility term (fmm)
    """
    batch_size: int
    weight: TimeWeight
    schedule: InterpolantSchedule
    coupling: Coupling
    kind: LossKind
    K: int = 2
    lam: float = 1.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigurationError(f"Batch size must be at least 1, got {self.batch_size}")
        if self.kind is LossKind.PFMM and self.K < 2:
            raise ConfigurationError(f"pfmm needs K >= 2, got {self.K}")
        if self.kind is LossKind.FMM and not self.weight.symmetric:
            raise ConfigurationError(
                f"fmm learns both directions of the map and needs a symmetric weight, got {self.weight.label()}"
            )

    def draw(self, rng: np.random.Generator) -> InterpolantDraw:
        return draw_interpolant(self.schedule, self.coupling, self.weight, rng, self.batch_size)


def _label(model, draw: InterpolantDraw):
    return draw.label if getattr(model, "num_labels", 0) else None


def _graph(residual: Var, leaves, **terms) -> LossGraph:
    r = value_of(residual)
    return LossGraph(
        root=mean_sq_norm(residual),
        leaves=tuple(leaves or ()),
        per_sample=np.sum(r * r, axis=1),
        terms={k: float(v) for k, v in terms.items()},
    )


def _at_s(draw: InterpolantDraw, schedule: InterpolantSchedule):
    return eval_at(draw, schedule, draw.s)


def loss_velocity(model, draw: InterpolantDraw, leaves: Optional[Sequence[Var]] = None) -> LossGraph:
    """(1/M) sum |b_t(I_t) - Idot_t|^2."""
    pred = model.evaluate(draw.t, draw.I, _label(model, draw), leaves)
    return _graph(pred - draw.Idot, leaves)


def loss_lmd(flow_map, velocity, draw: InterpolantDraw, schedule: InterpolantSchedule,
             leaves: Optional[Sequence[Var]] = None) -> LossGraph:
    """
    Lagrangian distillation: (1/M) sum |d_t X_{s,t}(I_s) - b_t(X_{s,t}(I_s))|^2.

    The velocity is frozen; gradient reaches the map through both terms.
    """
    I_s, _ = _at_s(draw, schedule)
    X, dX = flow_map_dt(flow_map, draw.s, draw.t, I_s, _label(flow_map, draw), leaves)
    b = velocity.evaluate(draw.t, X, _label(velocity, draw))
    return _graph(dX - b, leaves)


def loss_emd(flow_map, velocity, draw: InterpolantDraw, schedule: InterpolantSchedule,
             leaves: Optional[Sequence[Var]] = None, direction_sign: float = 1.0) -> LossGraph:
    """
    Eulerian distillation: (1/M) sum |d_s X_{s,t}(I_s) + grad X_{s,t}(I_s) . b_s(I_s)|^2.

    Both derivatives come from a single tangent pass seeded on s and on x.
    direction_sign flips the transport direction and exists only so audits
    can check that a wrong sign is detected.
    """
    I_s, _ = _at_s(draw, schedule)
    label = _label(flow_map, draw)
    direction = direction_sign * velocity.evaluate(draw.s, I_s, _label(velocity, draw)).value
    if getattr(flow_map, "fd_time_derivative", False):
        _, dXds = flow_map_ds(flow_map, draw.s, draw.t, I_s, label, leaves)
        _, jvp = flow_map_jvp_x(flow_map, draw.s, draw.t, I_s, direction, label, leaves)
        residual = dXds + jvp
    else:
        residual = flow_map.dual(draw.s, draw.t, I_s, label, leaves, s_dot=1.0, x_dot=direction).tangent
    return _graph(residual, leaves)


def loss_fmm(flow_map, draw: InterpolantDraw, leaves: Optional[Sequence[Var]] = None,
             lam: float = 1.0) -> LossGraph:
    """
    Flow map matching with y = X_{t,s}(I_t):
    (1/M) sum |d_t X_{s,t}(y) - Idot_t|^2 + lam |X_{s,t}(y) - I_t|^2.

    d_t is the partial derivative in the outer map's second time with y held
    fixed; gradient flows through the inner and outer evaluations.
    """
    label = _label(flow_map, draw)
    y = flow_map_eval(flow_map, draw.t, draw.s, draw.I, label, leaves)
    X, dX = flow_map_dt(flow_map, draw.s, draw.t, y, label, leaves)
    lagrangian = dX - draw.Idot
    invertibility = X - draw.I
    r1, r2 = lagrangian.value, invertibility.value
    root = mean_sq_norm(lagrangian) + mean_sq_norm(invertibility) * lam
    return LossGraph(
        root=root,
        leaves=tuple(leaves or ()),
        per_sample=np.sum(r1 * r1, axis=1) + lam * np.sum(r2 * r2, axis=1),
        terms={"lagrangian": float(np.mean(np.sum(r1 * r1, axis=1))),
               "invertibility": float(np.mean(np.sum(r2 * r2, axis=1)))},
    )


def pfmm_grid(s: np.ndarray, t: np.ndarray, K: int) -> np.ndarray:
    """
    Times t_k = s + ((k - 1) / (K - 1))(t - s), k = 1..K, shape (K, M).

    The first and last rows are exactly s and t.
    """
    if K < 2:
        raise ValidationError(f"K must be at least 2, got {K}")
    fractions = np.linspace(0.0, 1.0, K)[:, None]
    grid = s[None, :] + fractions * (t - s)[None, :]
    grid[0], grid[-1] = s, t
    return np.clip(grid, 0.0, 1.0)


def loss_pfmm(student, teacher, K: int, draw: InterpolantDraw, schedule: InterpolantSchedule,
              leaves: Optional[Sequence[Var]] = None,
              teacher_leaves: Optional[Sequence[Var]] = None) -> LossGraph:
    """
    Progressive matching: (1/M) sum |X'_{s,t}(I_s) - (X_{t_{K-1},t_K} o ... o X_{t_1,t_2})(I_s)|^2.

    The teacher composition sits behind a stop-gradient barrier.
    """
    I_s, _ = _at_s(draw, schedule)
    grid = pfmm_grid(draw.s, draw.t, K)
    target = Var(I_s)
    teacher_label = _label(teacher, draw)
    for k in range(K - 1):
        target = flow_map_eval(teacher, grid[k], grid[k + 1], target, teacher_label, teacher_leaves)
    target = stop_gradient(target)
    pred = flow_map_eval(student, draw.s, draw.t, I_s, _label(student, draw), leaves)
    return _graph(pred - target, leaves)


def loss_ee(flow_map, draw: InterpolantDraw, schedule: InterpolantSchedule,
            leaves: Optional[Sequence[Var]] = None) -> LossGraph:
    """
    Eulerian estimation: (1/M) sum |d_s X_{s,t}(I_s) + stopgrad(grad X_{s,t}(I_s) . Idot_s)|^2.

    Only the d_s branch carries gradient.
    """
    I_s, Idot_s = _at_s(draw, schedule)
    label = _label(flow_map, draw)
    _, dXds = flow_map_ds(flow_map, draw.s, draw.t, I_s, label, leaves)
    _, jvp = flow_map_jvp_x(flow_map, draw.s, draw.t, I_s, Idot_s, label, leaves)
    return _graph(dXds + stop_gradient(jvp), leaves)


def loss_denoiser(flow_map, draw: InterpolantDraw, schedule: InterpolantSchedule,
                  leaves: Optional[Sequence[Var]] = None) -> LossGraph:
    """
    (1/M) sum |d_t X_{s,t}(I_s) - Idot_t|^2, minimized by E[I_t | I_s = x].

    At (s, t) = (0, 1) its minimizer maps every point to the target mean.
    """
    I_s, _ = _at_s(draw, schedule)
    _, dX = flow_map_dt(flow_map, draw.s, draw.t, I_s, _label(flow_map, draw), leaves)
    return _graph(dX - draw.Idot, leaves)


def evaluate_loss(spec: LossBatchSpec, model, draw: InterpolantDraw, teacher=None,
                  leaves: Optional[Sequence[Var]] = None) -> LossGraph:
    """
    Dispatch on spec.kind.

    Raises:
        ConfigurationError: If a distillation loss is requested without a teacher
    """
    kind = spec.kind
    if kind in DISTILL_KINDS and teacher is None:
        raise ConfigurationError(f"{kind.value} needs a teacher")
    if kind is LossKind.VELOCITY:
        return loss_velocity(model, draw, leaves)
    if kind is LossKind.LMD:
        return loss_lmd(model, teacher, draw, spec.schedule, leaves)
    if kind is LossKind.EMD:
        return loss_emd(model, teacher, draw, spec.schedule, leaves)
    if kind is LossKind.FMM:
        return loss_fmm(model, draw, leaves, spec.lam)
    if kind is LossKind.PFMM:
        return loss_pfmm(model, teacher, spec.K, draw, spec.schedule, leaves)
    if kind is LossKind.EE:
        return loss_ee(model, draw, spec.schedule, leaves)
    return loss_denoiser(model, draw, spec.schedule, leaves)
