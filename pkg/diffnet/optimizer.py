"""
Adam with bias correction and stepwise multiplicative learning-rate decay.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from config.constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, ADAM_LR, LR_DECAY, LR_DECAY_EVERY
from utils.exceptions import NumericError, ValidationError


@dataclass(frozen=True)
class AdamHyper:
    """
    Attributes:
        lr: Base learning rate
        beta1, beta2: Moment decay rates
        eps: Denominator floor
        decay: Learning rate multiplier applied every decay_every steps
    """
    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    decay: float = LR_DECAY
    decay_every: int = LR_DECAY_EVERY

    def rate(self, step: int) -> float:
        """Learning rate used by the step-th update (1-based)."""
        if self.decay_every <= 0:
            return self.lr
        return self.lr * self.decay ** ((step - 1) // self.decay_every)


@dataclass
class AdamState:
    """First/second moment estimates and the number of updates taken."""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], step=0)


def adam_step(
    params: Sequence[np.ndarray],
    grad: Sequence[np.ndarray],
    state: AdamState,
    hyper: AdamHyper = AdamHyper(),
) -> Tuple[List[np.ndarray], AdamState]:
    """
    One Adam update.

    Returns:
        (updated parameters, updated state); inputs are not modified

    Raises:
        ValidationError: If shapes do not match
        NumericError: If the update is not finite
    """
    if len(params) != len(grad):
        raise ValidationError(f"{len(params)} parameter arrays but {len(grad)} gradients")
    if not state.m:
        state = AdamState.zeros_like(params)
    step = state.step + 1
    lr = hyper.rate(step)
    new_params, new_m, new_v = [], [], []
    for i, (p, g, m, v) in enumerate(zip(params, grad, state.m, state.v)):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValidationError(f"Shape mismatch at parameter {i}: {p.shape} vs {g.shape}")
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * (g * g)
        m_hat = m / (1.0 - hyper.beta1 ** step)
        v_hat = v / (1.0 - hyper.beta2 ** step)
        update = lr * m_hat / (np.sqrt(v_hat) + hyper.eps)
        if not np.isfinite(update).all():
            raise NumericError("Non-finite Adam update", step=step, node=f"param{i}")
        new_params.append(p - update)
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(m=new_m, v=new_v, step=step)
