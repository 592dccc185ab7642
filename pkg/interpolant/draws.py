"""
Batched interpolant draws (s, t, x0, x1, z, I_t, Idot_t, label).
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from utils.exceptions import ValidationError

from .couplings import Coupling
from .schedules import InterpolantSchedule, schedule_eval
from .time_weights import TimeWeight


def make_rng(base_seed: int, worker_index: int = 0) -> np.random.Generator:
    """Independent deterministic stream for one worker, keyed by the pair (base_seed, worker_index)."""
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(worker_index)]))


@dataclass(frozen=True)
class InterpolantDraw:
    """
    A batch of M interpolant samples; I and Idot are evaluated at t.

    Attributes:
        s, t: Times, shape (M,)
        x0, x1, z: Points, shape (M, d)
        I, Idot: Interpolant and its velocity at t, shape (M, d)
        label: Optional class per sample, shape (M,)
    """
    s: np.ndarray
    t: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    z: np.ndarray
    I: np.ndarray
    Idot: np.ndarray
    label: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.t)

    @property
    def dim(self) -> int:
        return self.x0.shape[1]

    def with_times(self, s: np.ndarray, t: np.ndarray, schedule: InterpolantSchedule) -> "InterpolantDraw":
        """Same stochastic paths at new times; I and Idot are re-evaluated at t."""
        s = np.broadcast_to(np.asarray(s, dtype=float), (self.size,)).copy()
        t = np.broadcast_to(np.asarray(t, dtype=float), (self.size,)).copy()
        I, Idot = _path(schedule, t, self.x0, self.x1, self.z)
        return replace(self, s=s, t=t, I=I, Idot=Idot)

    def subset(self, idx) -> "InterpolantDraw":
        label = None if self.label is None else self.label[idx]
        return InterpolantDraw(
            s=self.s[idx], t=self.t[idx], x0=self.x0[idx], x1=self.x1[idx],
            z=self.z[idx], I=self.I[idx], Idot=self.Idot[idx], label=label,
        )


def _path(schedule: InterpolantSchedule, tau: np.ndarray, x0, x1, z) -> Tuple[np.ndarray, np.ndarray]:
    c = schedule_eval(schedule, tau)
    col = lambda v: np.reshape(v, (-1, 1))
    I = col(c.alpha) * x0 + col(c.beta) * x1 + col(c.gamma) * z
    Idot = col(c.alpha_dot) * x0 + col(c.beta_dot) * x1 + col(c.gamma_dot) * z
    return I, Idot


def draw_interpolant(
    schedule: InterpolantSchedule,
    coupling: Coupling,
    weight: TimeWeight,
    rng: np.random.Generator,
    size: int = 1,
) -> InterpolantDraw:
    """
    Draw a batch (s, t, x0, x1, z) and evaluate I, Idot at t.

    z ~ N(0, Id) is drawn independently of the coupling.
    """
    if size < 1:
        raise ValidationError(f"Batch size must be at least 1, got {size}")
    s, t = weight.sample(size, rng)
    x0, x1, label = coupling.sample(size, rng)
    z = rng.standard_normal(x0.shape)
    I, Idot = _path(schedule, t, x0, x1, z)
    return InterpolantDraw(s=s, t=t, x0=x0, x1=x1, z=z, I=I, Idot=Idot, label=label)


def draw_from_points(
    schedule: InterpolantSchedule,
    x0: np.ndarray,
    x1: np.ndarray,
    z: np.ndarray,
    s,
    t,
    label: Optional[np.ndarray] = None,
) -> InterpolantDraw:
    """Build a draw from explicit endpoints and times."""
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = len(x0)
    s = np.broadcast_to(np.asarray(s, dtype=float), (n,)).copy()
    t = np.broadcast_to(np.asarray(t, dtype=float), (n,)).copy()
    I, Idot = _path(schedule, t, x0, x1, z)
    return InterpolantDraw(s=s, t=t, x0=x0, x1=x1, z=z, I=I, Idot=Idot, label=label)


def eval_at(draw: InterpolantDraw, schedule: InterpolantSchedule, tau) -> Tuple[np.ndarray, np.ndarray]:
    """
    Re-evaluate the same stochastic paths at time(s) tau.

    Raises:
        DomainError: If tau lies outside [0, 1]
    """
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (draw.size,))
    return _path(schedule, tau, draw.x0, draw.x1, draw.z)
