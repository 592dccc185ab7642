"""Interpolant schedules, couplings, time weights and batch draws."""

from .schedules import (
    InterpolantSchedule,
    ScheduleKind,
    ScheduleValues,
    schedule_eval,
    make_schedule,
    custom_schedule,
    linear_schedule,
    trig_schedule,
    vp_schedule,
    ve_schedule,
)
from .datasets import GaussianTarget, TargetSampler, checkerboard_class, in_checkerboard
from .couplings import Coupling, CouplingKind, IndependentCoupling, PairedCoupling
from .time_weights import TimeWeight, WeightKind, parse_weight
from .draws import InterpolantDraw, draw_interpolant, draw_from_points, eval_at, make_rng

__all__ = [
    'InterpolantSchedule', 'ScheduleKind', 'ScheduleValues', 'schedule_eval', 'make_schedule',
    'custom_schedule', 'linear_schedule', 'trig_schedule', 'vp_schedule', 've_schedule',
    'GaussianTarget', 'TargetSampler', 'checkerboard_class', 'in_checkerboard',
    'Coupling', 'CouplingKind', 'IndependentCoupling', 'PairedCoupling',
    'TimeWeight', 'WeightKind', 'parse_weight',
    'InterpolantDraw', 'draw_interpolant', 'draw_from_points', 'eval_at', 'make_rng',
]
