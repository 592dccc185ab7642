"""Closed-form and numeric ground truths for the Gaussian task."""

from .gaussian import (
    GaussianTask,
    LipschitzProfile,
    oracle_denoiser_gaussian,
    oracle_flowmap_gaussian,
    oracle_velocity_gaussian,
)
from .maps import (
    FunctionVelocity,
    IdentityFlowMap,
    OracleDenoiserMap,
    OracleFlowMap,
    OracleVelocity,
    PerturbedFlowMap,
)
from .numeric import NumericFlowMap, teacher_flowmap_numeric
from .bounds import BoundAudit, BoundNormalization, wasserstein_bound_check

__all__ = [
    'GaussianTask', 'LipschitzProfile', 'oracle_denoiser_gaussian', 'oracle_flowmap_gaussian',
    'oracle_velocity_gaussian', 'FunctionVelocity', 'IdentityFlowMap', 'OracleDenoiserMap',
    'OracleFlowMap', 'OracleVelocity', 'PerturbedFlowMap', 'NumericFlowMap', 'teacher_flowmap_numeric',
    'BoundAudit', 'BoundNormalization', 'wasserstein_bound_check',
]
