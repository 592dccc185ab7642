"""
Interpolant schedules.

A schedule is the coefficient triple (alpha_t, beta_t, gamma_t) with its time
derivatives; the interpolant is I_t = alpha_t x0 + beta_t x1 + gamma_t z.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np

from config.constants import DERIVATIVE_CHECK_RTOL, DERIVATIVE_CHECK_STEP, VE_HORIZON
from utils.exceptions import ConfigurationError
from utils.logger import get_logger
from utils.validators import validate_time

logger = get_logger(__name__)

Coefficient = Callable[[np.ndarray], np.ndarray]


class ScheduleKind(Enum):
    """Supported schedule families"""
    LINEAR = "linear"
    TRIG = "trig"
    VP_DIFFUSION = "vp-diffusion"
    VE_DIFFUSION = "ve-diffusion"
    CUSTOM = "custom"


class ScheduleValues(NamedTuple):
    """The six schedule coefficients at one or more times."""
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    alpha_dot: np.ndarray
    beta_dot: np.ndarray
    gamma_dot: np.ndarray


@dataclass(frozen=True)
class InterpolantSchedule:
    """
    Coefficient functions of an interpolant.

    Attributes:
        kind: Schedule family
        coefficients: (alpha, beta, gamma, alpha_dot, beta_dot, gamma_dot) callables
        gaussian_base: True when gamma_0 = 1 and alpha = 0, so that I_0 = z
        pinned: True when the endpoint conditions alpha_0 = beta_1 = 1,
            alpha_1 = beta_0 = 0, gamma_1 = 0 hold
        horizon: T for the variance-exploding family
    """
    kind: ScheduleKind
    coefficients: tuple = field(repr=False)
    gaussian_base: bool = False
    pinned: bool = True
    horizon: Optional[float] = None

    def __call__(self, t) -> ScheduleValues:
        return schedule_eval(self, t)


def schedule_eval(schedule: InterpolantSchedule, t) -> ScheduleValues:
    """
    Evaluate all six coefficients at time(s) t.

    Raises:
        DomainError: If t lies outside [0, 1]
    """
    validate_time(t)
    t_arr = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = [np.broadcast_to(np.asarray(fn(t_arr), dtype=float), t_arr.shape).copy()
                  for fn in schedule.coefficients]
    return ScheduleValues(*values)


def _const(c: float) -> Coefficient:
    return lambda t: np.full_like(t, c, dtype=float)


def linear_schedule() -> InterpolantSchedule:
    """alpha_t = 1 - t, beta_t = t, gamma_t = 0."""
    return InterpolantSchedule(
        kind=ScheduleKind.LINEAR,
        coefficients=(
            lambda t: 1.0 - t, lambda t: t, _const(0.0),
            _const(-1.0), _const(1.0), _const(0.0),
        ),
    )


def trig_schedule() -> InterpolantSchedule:
    """alpha_t = cos(pi t / 2), beta_t = sin(pi t / 2), gamma_t = 0."""
    h = 0.5 * np.pi
    return InterpolantSchedule(
        kind=ScheduleKind.TRIG,
        coefficients=(
            lambda t: np.cos(h * t), lambda t: np.sin(h * t), _const(0.0),
            lambda t: -h * np.sin(h * t), lambda t: h * np.cos(h * t), _const(0.0),
        ),
    )


def vp_schedule() -> InterpolantSchedule:
    """
    Variance-preserving diffusion: alpha_t = 0, beta_t = t, gamma_t = sqrt(1 - t^2).

    gamma_dot diverges at t = 1; samplers draw t in [0, 1).
    """
    return InterpolantSchedule(
        kind=ScheduleKind.VP_DIFFUSION,
        coefficients=(
            _const(0.0), lambda t: t, lambda t: np.sqrt(1.0 - t * t),
            _const(0.0), _const(1.0), lambda t: -t / np.sqrt(1.0 - t * t),
        ),
        gaussian_base=True,
        pinned=False,
    )


def ve_schedule(horizon: float = VE_HORIZON) -> InterpolantSchedule:
    """Variance-exploding diffusion: alpha_t = 0, beta_t = 1, gamma_t = T - t (unpinned)."""
    return InterpolantSchedule(
        kind=ScheduleKind.VE_DIFFUSION,
        coefficients=(
            _const(0.0), _const(1.0), lambda t: horizon - t,
            _const(0.0), _const(0.0), _const(-1.0),
        ),
        pinned=False,
        horizon=float(horizon),
    )


def custom_schedule(
    alpha: Coefficient,
    beta: Coefficient,
    gamma: Coefficient,
    alpha_dot: Coefficient,
    beta_dot: Coefficient,
    gamma_dot: Coefficient,
    pinned: bool = True,
    grid_points: int = 101,
) -> InterpolantSchedule:
    """
    Build a schedule from user-supplied closed forms.

    The supplied derivatives are checked against central differences on a
    uniform grid before the schedule is returned.

    Raises:
        ConfigurationError: If a derivative disagrees with its coefficient
            or a pinned schedule misses its endpoint conditions
    """
    schedule = InterpolantSchedule(
        kind=ScheduleKind.CUSTOM,
        coefficients=(alpha, beta, gamma, alpha_dot, beta_dot, gamma_dot),
        pinned=pinned,
    )
    worst = derivative_mismatch(schedule, grid_points=grid_points)
    if worst > DERIVATIVE_CHECK_RTOL:
        raise ConfigurationError(
            f"Custom schedule derivatives disagree with central differences "
            f"(max relative error {worst:.3e} > {DERIVATIVE_CHECK_RTOL:g})"
        )
    if pinned:
        gap = endpoint_violation(schedule)
        if gap > 1e-12:
            raise ConfigurationError(f"Custom schedule violates endpoint conditions by {gap:.3e}")
    logger.debug(f"Custom schedule accepted (derivative error {worst:.2e})")
    return schedule


def derivative_mismatch(
    schedule: InterpolantSchedule,
    grid_points: int = 101,
    h: float = DERIVATIVE_CHECK_STEP,
    t_max: float = 1.0,
) -> float:
    """
    Largest relative error between supplied derivatives and finite differences.

    Central differences are used inside [0, 1]; within h of an end the
    second-order one-sided stencil keeps every evaluation in the domain. The
    error is measured relative to max(1, |derivative|).
    """
    t = np.linspace(0.0, t_max, grid_points)
    exact = schedule_eval(schedule, t)
    worst = 0.0
    for k in range(3):
        fd = _finite_difference(schedule.coefficients[k], t, h)
        err = np.abs(fd - exact[k + 3]) / np.maximum(1.0, np.abs(exact[k + 3]))
        worst = max(worst, float(np.max(err)))
    return worst


def _finite_difference(fn: Coefficient, t: np.ndarray, h: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        central = (fn(t + h) - fn(t - h)) / (2.0 * h)
        forward = (-3.0 * fn(t) + 4.0 * fn(t + h) - fn(t + 2.0 * h)) / (2.0 * h)
        backward = (3.0 * fn(t) - 4.0 * fn(t - h) + fn(t - 2.0 * h)) / (2.0 * h)
    out = np.where(t - h < 0.0, forward, central)
    return np.where(t + h > 1.0, backward, out)


def endpoint_violation(schedule: InterpolantSchedule) -> float:
    """Largest deviation from alpha_0 = beta_1 = 1, alpha_1 = beta_0 = gamma_1 = 0."""
    v0 = schedule_eval(schedule, 0.0)
    v1 = schedule_eval(schedule, 1.0)
    return float(max(
        abs(v0.alpha - 1.0), abs(v0.beta), abs(v1.alpha), abs(v1.beta - 1.0), abs(v1.gamma)
    ))


def make_schedule(kind: str, horizon: float = VE_HORIZON) -> InterpolantSchedule:
    """
    Build a named schedule.

    Raises:
        ConfigurationError: If the kind is unknown or custom (custom schedules
            are built with custom_schedule)
    """
    builders = {
        ScheduleKind.LINEAR.value: linear_schedule,
        ScheduleKind.TRIG.value: trig_schedule,
        ScheduleKind.VP_DIFFUSION.value: vp_schedule,
        ScheduleKind.VE_DIFFUSION.value: lambda: ve_schedule(horizon),
    }
    if kind not in builders:
        raise ConfigurationError(
            f"Unknown schedule '{kind}'. Expected one of: {', '.join(builders)}"
        )
    return builders[kind]()
