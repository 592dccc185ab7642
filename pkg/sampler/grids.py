"""
Time grids and sampling-run descriptors.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from utils.exceptions import ConfigurationError, DomainError
from utils.validators import validate_positive_int, validate_time


class SampleMethod(Enum):
    ODE_HEUN = "ode-heun"
    ODE_RK4 = "ode-rk4"
    MAP_ONESTEP = "map-onestep"
    MAP_MULTISTEP = "map-multistep"


@dataclass(frozen=True)
class TimeGrid:
    """
    Strictly monotone times in [0, 1].

    Increasing grids run forward; decreasing grids run the map or ODE
    backwards, which is how inversion is expressed.
    """
    times: Tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if len(times) < 2:
            raise ConfigurationError(f"A time grid needs at least two points, got {times}")
        validate_time(np.asarray(times), "grid")
        steps = np.diff(times)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise DomainError(f"Time grid must be strictly monotone, got {times}")

    @classmethod
    def uniform(cls, n_steps: int, start: float = 0.0, end: float = 1.0) -> "TimeGrid":
        validate_positive_int(n_steps, "n_steps")
        return cls(tuple(np.linspace(start, end, n_steps + 1)))

    @classmethod
    def from_sequence(cls, times: Sequence[float]) -> "TimeGrid":
        return cls(tuple(times))

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def start(self) -> float:
        return self.times[0]

    @property
    def end(self) -> float:
        return self.times[-1]

    @property
    def forward(self) -> bool:
        return self.end > self.start

    def reversed(self) -> "TimeGrid":
        return TimeGrid(tuple(reversed(self.times)))

    def intervals(self) -> Iterator[Tuple[float, float]]:
        return zip(self.times[:-1], self.times[1:])


@dataclass(frozen=True)
class SampleRun:
    """
    Description of one sampling pass.

    Attributes:
        method: Integrator or map sampling mode
        grid: Time grid; {0, 1} for map-onestep
        seed: Seed of the base draws
        count: Number of samples
        label: Class label for conditional models
    """
    method: SampleMethod
    grid: TimeGrid
    seed: int = 0
    count: int = 1
    label: Optional[int] = None
    run_id: str = field(default="run")

    def __post_init__(self):
        if self.method is SampleMethod.MAP_ONESTEP and self.grid.times != (0.0, 1.0):
            raise ConfigurationError(f"map-onestep requires the grid {{0, 1}}, got {self.grid.times}")
        validate_positive_int(self.count, "count")

    @classmethod
    def make(cls, method: str, n_steps: int, seed: int = 0, count: int = 1,
             label: Optional[int] = None, run_id: str = "run") -> "SampleRun":
        """Build a run on a uniform grid from config-level names."""
        try:
            kind = SampleMethod(method)
        except ValueError:
            raise ConfigurationError(
                f"Unknown sampling method '{method}'. Expected one of: "
                f"{', '.join(m.value for m in SampleMethod)}"
            )
        if kind is SampleMethod.MAP_ONESTEP:
            n_steps = 1
        return cls(kind, TimeGrid.uniform(n_steps), seed=seed, count=count, label=label, run_id=run_id)

    @property
    def uses_map(self) -> bool:
        return self.method in (SampleMethod.MAP_ONESTEP, SampleMethod.MAP_MULTISTEP)
