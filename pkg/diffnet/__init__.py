"""Networks and the mixed-mode differentiation engine."""

from .graph import LossGraph, Var, param_grad, stop_gradient, mean_sq_norm
from .dual import DualBatch
from .mlp import MlpParams
from .models import (
    FlowMapModel,
    NetworkSpec,
    VelocityModel,
    flow_map_ds,
    flow_map_dt,
    flow_map_eval,
    flow_map_jvp_x,
    velocity_eval,
)
from .optimizer import AdamHyper, AdamState, adam_step
from .checkpoint import load_checkpoint, read_header, save_checkpoint

__all__ = [
    'LossGraph', 'Var', 'param_grad', 'stop_gradient', 'mean_sq_norm', 'DualBatch', 'MlpParams',
    'FlowMapModel', 'NetworkSpec', 'VelocityModel', 'flow_map_ds', 'flow_map_dt', 'flow_map_eval',
    'flow_map_jvp_x', 'velocity_eval', 'AdamHyper', 'AdamState', 'adam_step',
    'load_checkpoint', 'read_header', 'save_checkpoint',
]
