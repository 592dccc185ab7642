"""
Fixed-step ODE integration and flow-map sampling over a TimeGrid.
"""

from typing import Callable, List, Tuple, Union

import numpy as np

from utils.exceptions import ConfigurationError, NumericError
from utils.logger import get_logger
from utils.validators import validate_finite

from .grids import TimeGrid

logger = get_logger(__name__)

Velocity = Callable[..., np.ndarray]


def _velocity_fn(b, label) -> Callable[[float, np.ndarray], np.ndarray]:
    if label is None:
        return lambda t, x: np.asarray(b(t, x), dtype=float)
    return lambda t, x: np.asarray(b(t, x, label), dtype=float)


def _heun(f, t0: float, t1: float, x: np.ndarray) -> np.ndarray:
    h = t1 - t0
    k1 = f(t0, x)
    k2 = f(t1, x + h * k1)
    return x + 0.5 * h * (k1 + k2)


def _rk4(f, t0: float, t1: float, x: np.ndarray) -> np.ndarray:
    h = t1 - t0
    mid = t0 + 0.5 * h
    k1 = f(t0, x)
    k2 = f(mid, x + 0.5 * h * k1)
    k3 = f(mid, x + 0.5 * h * k2)
    k4 = f(t1, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


STEPPERS = {"heun": _heun, "ode-heun": _heun, "rk4": _rk4, "ode-rk4": _rk4}


def integrate_ode(
    b: Velocity,
    x0: np.ndarray,
    grid: TimeGrid,
    method: str = "heun",
    label=None,
    keep_trajectory: bool = False,
) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """
    Integrate dx/dt = b_t(x) over the grid with a fixed-step scheme.

    Args:
        b: Velocity callable b(t, x[, label]) -> (n, d)
        x0: Initial states, shape (n, d)
        grid: Integration times; decreasing grids integrate backwards
        method: heun or rk4
        label: Class labels forwarded to conditional velocities
        keep_trajectory: Also return all intermediate states

    Returns:
        Final states, or (final states, trajectory of shape (N + 1, n, d))

    Raises:
        NumericError: If the state becomes non-finite, with the step index
    """
    if method not in STEPPERS:
        raise ConfigurationError(f"Unknown integrator '{method}'. Expected heun or rk4")
    step = STEPPERS[method]
    f = _velocity_fn(b, label)
    x = np.array(np.atleast_2d(x0), dtype=float)
    validate_finite(x, "x0")
    trajectory: List[np.ndarray] = [x.copy()] if keep_trajectory else []
    with np.errstate(over="ignore", invalid="ignore"):
        for k, (t0, t1) in enumerate(grid.intervals()):
            x = step(f, t0, t1, x)
            if not np.isfinite(x).all():
                raise NumericError("ODE state became non-finite", step=k)
            if keep_trajectory:
                trajectory.append(x.copy())
    logger.debug(f"Integrated {len(x)} states with {method} over {grid.n_steps} steps")
    if keep_trajectory:
        return x, np.stack(trajectory)
    return x


def map_sample(flow_map, x0: np.ndarray, grid: TimeGrid, label=None,
               keep_trajectory: bool = False):
    """
    Iterate x_k = X_{t_{k-1}, t_k}(x_{k-1}) over the grid.

    Performs exactly grid.n_steps map evaluations.

    Raises:
        NumericError: If a map output is non-finite, with the step index
    """
    x = np.array(np.atleast_2d(x0), dtype=float)
    validate_finite(x, "x0")
    trajectory = [x.copy()] if keep_trajectory else []
    for k, (s, t) in enumerate(grid.intervals()):
        x = np.asarray(flow_map(s, t, x, label), dtype=float)
        if not np.isfinite(x).all():
            raise NumericError("Flow map output became non-finite", step=k)
        if keep_trajectory:
            trajectory.append(x.copy())
    logger.debug(f"Mapped {len(x)} states over {grid.n_steps} steps")
    if keep_trajectory:
        return x, np.stack(trajectory)
    return x


def invert_and_restyle(
    flow_map,
    x1: np.ndarray,
    label,
    new_label,
    s_prime: float,
    back_steps: int = 8,
    forward_steps: int = 8,
) -> np.ndarray:
    """
    X_{s',1}(X_{1,s'}(x1; label); new_label).

    The backward leg runs on a decreasing grid from 1 to s' under label, the
    forward leg on an increasing grid from s' to 1 under new_label.
    """
    if not 0.0 < s_prime < 1.0:
        raise ConfigurationError(f"s' must lie in (0, 1), got {s_prime}")
    back = TimeGrid.uniform(back_steps, start=1.0, end=s_prime)
    forward = TimeGrid.uniform(forward_steps, start=s_prime, end=1.0)
    latent = map_sample(flow_map, x1, back, label)
    restyled = map_sample(flow_map, latent, forward, new_label)
    logger.debug(f"Restyled {len(restyled)} points through s'={s_prime}")
    return restyled
