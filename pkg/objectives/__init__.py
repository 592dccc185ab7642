"""Training losses as batch estimators over interpolant draws."""

from .losses import (
    LossBatchSpec,
    LossKind,
    evaluate_loss,
    loss_denoiser,
    loss_ee,
    loss_emd,
    loss_fmm,
    loss_lmd,
    loss_pfmm,
    loss_velocity,
    parse_loss_kind,
    pfmm_grid,
)

__all__ = [
    'LossBatchSpec', 'LossKind', 'evaluate_loss', 'loss_denoiser', 'loss_ee', 'loss_emd', 'loss_fmm',
    'loss_lmd', 'loss_pfmm', 'loss_velocity', 'parse_loss_kind', 'pfmm_grid',
]
