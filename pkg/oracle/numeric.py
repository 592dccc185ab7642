"""
High-accuracy numeric flow maps from any velocity field.
"""

import numpy as np

from config.constants import ORACLE_RK4_STEPS
from sampler.grids import TimeGrid
from sampler.integrators import integrate_ode
from utils.validators import validate_positive_int, validate_time


def teacher_flowmap_numeric(b, s: float, t: float, x: np.ndarray, nsteps: int = ORACLE_RK4_STEPS,
                            label=None) -> np.ndarray:
    """
    X_{s,t}(x) by RK4 on a uniform grid of nsteps steps from s to t.

    Raises:
        NumericError: If the state becomes non-finite, with the step index
    """
    validate_positive_int(nsteps, "nsteps")
    validate_time(s, "s")
    validate_time(t, "t")
    x = np.array(np.atleast_2d(x), dtype=float)
    if s == t:
        return x
    return integrate_ode(b, x, TimeGrid.uniform(nsteps, start=float(s), end=float(t)), "rk4", label)


class NumericFlowMap:
    """Callable flow map backed by RK4 integration of a velocity."""

    def __init__(self, b, nsteps: int = ORACLE_RK4_STEPS):
        self.b = b
        self.nsteps = nsteps

    def __call__(self, s, t, x, label=None) -> np.ndarray:
        return teacher_flowmap_numeric(self.b, s, t, x, self.nsteps, label)
