"""ODE integration, flow-map sampling and style transfer."""

from .grids import SampleMethod, SampleRun, TimeGrid
from .integrators import integrate_ode, invert_and_restyle, map_sample
from .output import write_samples_csv, write_scatter

__all__ = [
    'SampleMethod', 'SampleRun', 'TimeGrid', 'integrate_ode', 'invert_and_restyle', 'map_sample',
    'write_samples_csv', 'write_scatter',
]
