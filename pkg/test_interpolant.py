"""
Tests for interpolant schedules, couplings, time weights and draws.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy.stats import ks_2samp

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from interpolant import (
    IndependentCoupling,
    PairedCoupling,
    TargetSampler,
    TimeWeight,
    WeightKind,
    checkerboard_class,
    custom_schedule,
    draw_from_points,
    draw_interpolant,
    eval_at,
    in_checkerboard,
    linear_schedule,
    make_rng,
    make_schedule,
    parse_weight,
    schedule_eval,
    trig_schedule,
    ve_schedule,
    vp_schedule,
)
from interpolant.schedules import derivative_mismatch, endpoint_violation
from utils.exceptions import ConfigurationError, DomainError, ValidationError


def test_linear_schedule_values():
    assert tuple(float(v) for v in schedule_eval(linear_schedule(), 0.0)) == (1.0, 0.0, 0.0, -1.0, 1.0, 0.0)
    assert tuple(float(v) for v in schedule_eval(linear_schedule(), 0.5)) == (0.5, 0.5, 0.0, -1.0, 1.0, 0.0)


def test_vp_schedule_has_gaussian_base():
    schedule = vp_schedule()
    assert schedule.gaussian_base
    assert tuple(float(v) for v in schedule_eval(schedule, 0.0)) == (0.0, 0.0, 1.0, 0.0, 1.0, 0.0)


@pytest.mark.parametrize("t", [-0.1, 1.5, np.nan])
def test_schedule_rejects_times_outside_unit_interval(t):
    with pytest.raises(DomainError):
        schedule_eval(linear_schedule(), t)


@pytest.mark.parametrize("schedule", [linear_schedule(), trig_schedule()])
def test_pinned_schedules_meet_endpoint_conditions(schedule):
    assert endpoint_violation(schedule) <= 1e-12


@pytest.mark.parametrize("kind", ["linear", "trig", "ve-diffusion"])
def test_derivatives_match_finite_differences(kind):
    assert derivative_mismatch(make_schedule(kind)) <= 1e-6


def test_vp_derivatives_match_on_interior_points():
    assert derivative_mismatch(vp_schedule(), t_max=0.95) <= 1e-6


def test_ve_schedule_is_unpinned():
    schedule = ve_schedule(80.0)
    assert not schedule.pinned
    assert float(schedule_eval(schedule, 0.0).gamma) == 80.0


def test_make_schedule_rejects_unknown_and_custom():
    with pytest.raises(ConfigurationError):
        make_schedule("cosine")
    with pytest.raises(ConfigurationError):
        make_schedule("custom")


def test_custom_schedule_accepts_consistent_derivatives():
    schedule = custom_schedule(
        lambda t: 1.0 - t * t, lambda t: t * t, lambda t: 0.0 * t,
        lambda t: -2.0 * t, lambda t: 2.0 * t, lambda t: 0.0 * t,
    )
    assert float(schedule_eval(schedule, 0.5).beta) == 0.25


def test_custom_schedule_rejects_wrong_derivative():
    with pytest.raises(ConfigurationError):
        custom_schedule(
            lambda t: 1.0 - t, lambda t: t, lambda t: 0.0 * t,
            lambda t: -2.0 + 0.0 * t, lambda t: 1.0 + 0.0 * t, lambda t: 0.0 * t,
        )


def test_draw_from_points_matches_closed_form():
    schedule = linear_schedule()
    x0, x1, z = np.array([[0.0, 0.0]]), np.array([[2.0, 0.0]]), np.array([[3.0, -7.0]])
    end = draw_from_points(schedule, x0, x1, z, 0.0, 1.0)
    np.testing.assert_array_equal(end.I, [[2.0, 0.0]])
    quarter = draw_from_points(schedule, x0, x1, z, 0.0, 0.25)
    np.testing.assert_allclose(quarter.I, [[0.5, 0.0]])
    np.testing.assert_allclose(quarter.Idot, [[2.0, 0.0]])


def test_eval_at_ignores_noise_for_linear_schedule():
    draw = draw_from_points(linear_schedule(), [[1.0, 1.0]], [[-1.0, 1.0]], [[5.0, 5.0]], 0.0, 0.3)
    I, Idot = eval_at(draw, linear_schedule(), 0.5)
    np.testing.assert_allclose(I, [[0.0, 1.0]])
    np.testing.assert_allclose(Idot, [[-2.0, 0.0]])


@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(["linear", "trig"]))
@hyp_settings(max_examples=25, deadline=None)
def test_endpoint_pinning(seed, kind):
    schedule = make_schedule(kind)
    rng = make_rng(seed)
    coupling = IndependentCoupling(TargetSampler("checkerboard"))
    draw = draw_interpolant(schedule, coupling, TimeWeight(), rng, 16)
    np.testing.assert_allclose(eval_at(draw, schedule, 0.0)[0], draw.x0, atol=1e-15)
    np.testing.assert_allclose(eval_at(draw, schedule, 1.0)[0], draw.x1, atol=1e-15)


def test_worker_streams_are_reproducible_and_distinct():
    np.testing.assert_array_equal(make_rng(7, 3).random(4), make_rng(7, 3).random(4))
    # pairs with equal XOR must still get different streams
    assert not np.array_equal(make_rng(3, 1).random(4), make_rng(2, 0).random(4))
    assert not np.array_equal(make_rng(1, 2).random(4), make_rng(2, 1).random(4))


def test_draw_interpolant_matches_schedule_exactly():
    schedule = trig_schedule()
    rng = make_rng(3)
    draw = draw_interpolant(schedule, IndependentCoupling(TargetSampler("checkerboard")), TimeWeight(), rng, 64)
    c = schedule_eval(schedule, draw.t)
    col = lambda v: v[:, None]  # noqa: E731
    np.testing.assert_array_equal(draw.I, col(c.alpha) * draw.x0 + col(c.beta) * draw.x1 + col(c.gamma) * draw.z)
    np.testing.assert_array_equal(draw.Idot, col(c.alpha_dot) * draw.x0 + col(c.beta_dot) * draw.x1
                                  + col(c.gamma_dot) * draw.z)


def test_draw_interpolant_rejects_empty_batch():
    with pytest.raises(ValidationError):
        draw_interpolant(linear_schedule(), IndependentCoupling(TargetSampler("checkerboard")),
                         TimeWeight(), make_rng(0), 0)


def test_strip_weight_support():
    s, t = TimeWeight(WeightKind.STRIP, 4).sample(100000, make_rng(1))
    assert np.max(np.abs(t - s)) <= 0.25


def test_forward_weights_keep_order():
    for weight in (TimeWeight(WeightKind.FORWARD_ONLY), TimeWeight(WeightKind.FORWARD_STRIP, 3)):
        s, t = weight.sample(20000, make_rng(2))
        assert np.all(s <= t)
    assert not TimeWeight(WeightKind.FORWARD_ONLY).symmetric


@pytest.mark.parametrize("weight", [TimeWeight(), TimeWeight(WeightKind.STRIP, 4)])
def test_symmetric_weights_are_swap_invariant(weight):
    s, t = weight.sample(100000, make_rng(5))
    # KS on each coordinate of (s, t) against (t, s)
    assert ks_2samp(s, t).pvalue > 0.01
    assert ks_2samp(t - s, s - t).pvalue > 0.01


def test_strip_acceptance_rate():
    assert TimeWeight(WeightKind.STRIP, 4).acceptance_rate() == pytest.approx(2 / 4 - 1 / 16)


def test_parse_weight_requires_K_for_strip():
    with pytest.raises(ConfigurationError):
        parse_weight("strip", None)
    assert parse_weight("strip", 4).label() == "strip(4)"


def test_independent_coupling_marginals():
    rng = make_rng(11)
    x0, x1, labels = IndependentCoupling(TargetSampler("checkerboard")).sample(50000, rng)
    assert labels is None
    np.testing.assert_allclose(x0.mean(axis=0), 0.0, atol=0.03)
    np.testing.assert_allclose(np.cov(x0.T), np.eye(2), atol=0.03)
    assert np.all(in_checkerboard(x1))


def test_two_class_board_labels_match_cells():
    rng = make_rng(4)
    x1, labels = TargetSampler("checkerboard-2class").sample(5000, rng)
    np.testing.assert_array_equal(checkerboard_class(x1), labels)


def test_checkerboard_class_marks_white_and_off_board():
    # (-3, -1) lies in column 0, row 1: a white cell
    np.testing.assert_array_equal(checkerboard_class(np.array([[-3.0, -1.0], [5.0, 0.0]])), [-1, -1])


def test_paired_coupling_resamples_pairs():
    x0 = np.arange(10.0).reshape(5, 2)
    coupling = PairedCoupling(x0, 2.0 * x0)
    a, b, _ = coupling.sample(100, make_rng(0))
    np.testing.assert_array_equal(b, 2.0 * a)


def test_paired_coupling_rejects_mismatched_shapes():
    with pytest.raises(ValidationError):
        PairedCoupling(np.zeros((4, 2)), np.zeros((3, 2)))


def test_make_rng_streams_are_reproducible():
    np.testing.assert_array_equal(make_rng(7, 3).random(4), make_rng(7, 3).random(4))
    assert not np.array_equal(make_rng(7, 3).random(4), make_rng(7, 4).random(4))
