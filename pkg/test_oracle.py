"""
Tests for the Gaussian closed forms, the numeric oracle, the bound audit and the oracle suite.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.experiment import ExperimentConfig
from interpolant import make_rng
from oracle import (
    FunctionVelocity,
    GaussianTask,
    IdentityFlowMap,
    LipschitzProfile,
    OracleFlowMap,
    OracleVelocity,
    PerturbedFlowMap,
    oracle_denoiser_gaussian,
    oracle_flowmap_gaussian,
    oracle_velocity_gaussian,
    teacher_flowmap_numeric,
    wasserstein_bound_check,
)
from services import OracleSuiteService
from utils.exceptions import AcceptanceError, ConfigurationError, DomainError, ValidationError

TASK = GaussianTask(mean=np.array([1.5, -0.5]), std=np.array([0.7, 1.3]))

SUITE_CONFIG = """
[run]
name = oracle-test
seed = 3

[task]
name = gaussian
mean = 1.5, -0.5
std = 0.7, 1.3

[oracle]
loss_samples = 2048
base_samples = 1024
perturbed_maps = 3
perturbation_scale = 0.1
normalization = square
"""


def test_task_rejects_bad_moments():
    with pytest.raises(ValidationError):
        GaussianTask(mean=np.zeros(2), std=np.array([1.0, 0.0]))
    with pytest.raises(ValidationError):
        GaussianTask(mean=np.zeros(2), std=np.ones(3))


def test_moments_at_endpoints():
    m_t, sigma_t, _, _ = TASK.moments(0.0)
    np.testing.assert_array_equal(m_t[0], 0.0)
    np.testing.assert_array_equal(sigma_t[0], 1.0)
    m_t, sigma_t, _, _ = TASK.moments(1.0)
    np.testing.assert_allclose(m_t[0], TASK.mean)
    np.testing.assert_allclose(sigma_t[0], TASK.std)


def test_moments_reject_times_outside_unit_interval():
    with pytest.raises(DomainError):
        TASK.moments(1.2)


def test_velocity_of_standard_target_vanishes_at_midpoint():
    task = GaussianTask(mean=np.zeros(2), std=np.ones(2))
    x = make_rng(0).standard_normal((5, 2))
    np.testing.assert_allclose(oracle_velocity_gaussian(task, 0.5, x), 0.0, atol=1e-15)


def test_velocity_at_time_zero_points_from_x_to_mean():
    task = GaussianTask(mean=np.array([2.0, -1.0]), std=np.ones(2))
    x = make_rng(1).standard_normal((5, 2))
    np.testing.assert_allclose(oracle_velocity_gaussian(task, 0.0, x), task.mean - x, atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.3, 0.7, 1.0])
def test_velocity_at_path_mean_is_target_mean(t):
    m_t, _, _, _ = TASK.moments(t)
    np.testing.assert_allclose(oracle_velocity_gaussian(TASK, t, m_t), TASK.mean[None, :], atol=1e-14)


@given(seed=st.integers(0, 10000))
@hyp_settings(max_examples=30, deadline=None)
def test_flow_map_semigroup(seed):
    rng = make_rng(seed)
    s, u, t = rng.random(3)
    x = rng.standard_normal((16, 2)) * 3.0
    composed = oracle_flowmap_gaussian(TASK, u, t, oracle_flowmap_gaussian(TASK, s, u, x))
    np.testing.assert_allclose(composed, oracle_flowmap_gaussian(TASK, s, t, x), atol=1e-12)


def test_flow_map_inverse_identity():
    rng = make_rng(2)
    x = rng.standard_normal((1000, 2)) * 3.0
    s, t = rng.random(1000), rng.random(1000)
    back = oracle_flowmap_gaussian(TASK, t, s, oracle_flowmap_gaussian(TASK, s, t, x))
    assert np.max(np.linalg.norm(back - x, axis=1)) <= 1e-12


def test_denoiser_from_base_to_target_is_the_mean():
    x = make_rng(3).standard_normal((10, 2)) * 5.0
    np.testing.assert_allclose(oracle_denoiser_gaussian(TASK, 0.0, 1.0, x), np.tile(TASK.mean, (10, 1)))


def test_denoiser_at_equal_times_is_identity():
    x = make_rng(4).standard_normal((10, 2))
    np.testing.assert_allclose(oracle_denoiser_gaussian(TASK, 0.4, 0.4, x), x, atol=1e-14)


def test_oracle_map_objects_match_functions():
    x = make_rng(5).standard_normal((8, 2))
    np.testing.assert_allclose(OracleFlowMap(TASK)(0.1, 0.6, x), oracle_flowmap_gaussian(TASK, 0.1, 0.6, x))
    np.testing.assert_allclose(OracleVelocity(TASK)(0.3, x), oracle_velocity_gaussian(TASK, 0.3, x))
    np.testing.assert_array_equal(IdentityFlowMap(2)(0.0, 1.0, x), x)


def test_perturbed_map_is_identity_at_equal_times():
    perturbed = PerturbedFlowMap.random(OracleFlowMap(TASK), make_rng(6), 0.5)
    x = make_rng(7).standard_normal((8, 2))
    np.testing.assert_allclose(perturbed(0.3, 0.3, x), x, atol=1e-14)
    assert not np.allclose(perturbed(0.0, 1.0, x), oracle_flowmap_gaussian(TASK, 0.0, 1.0, x))


def test_numeric_flow_map_of_zero_field_is_identity():
    x = make_rng(8).standard_normal((6, 2))
    zero = FunctionVelocity(lambda t, y: np.zeros_like(y), 2)
    np.testing.assert_array_equal(teacher_flowmap_numeric(zero, 0.0, 1.0, x, 10), x)


def test_numeric_flow_map_of_linear_field_is_exponential():
    x = make_rng(9).standard_normal((6, 2))
    linear = FunctionVelocity(lambda t, y: y, 2)
    np.testing.assert_allclose(teacher_flowmap_numeric(linear, 0.0, 1.0, x, 1000), np.e * x, atol=1e-9)


def test_numeric_flow_map_at_equal_times_returns_input():
    x = make_rng(10).standard_normal((6, 2))
    np.testing.assert_array_equal(teacher_flowmap_numeric(OracleVelocity(TASK), 0.5, 0.5, x), x)


@pytest.mark.parametrize("s,t", [(0.0, 1.0), (0.2, 0.9), (0.8, 0.1)])
def test_numeric_flow_map_matches_closed_form(s, t):
    x = make_rng(11).standard_normal((64, 2))
    numeric = teacher_flowmap_numeric(OracleVelocity(TASK), s, t, x)
    assert np.max(np.abs(numeric - oracle_flowmap_gaussian(TASK, s, t, x))) <= 1e-8


def test_lipschitz_profile():
    profile = LipschitzProfile(TASK)
    assert profile.integral() > 0.0
    assert profile.lmd_constant() == pytest.approx(np.exp(1.0 + 2.0 * profile.integral()))
    # for sigma = 1 the slope is (2t - 1) / ((1 - t)^2 + t^2)
    unit = LipschitzProfile(GaussianTask(mean=np.zeros(1), std=np.ones(1)))
    assert float(unit.C(0.0)[0]) == pytest.approx(-1.0)
    assert float(unit.C(0.5)[0]) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kind", ["lmd", "emd"])
def test_bound_audit_of_exact_map_is_zero(kind):
    audit = wasserstein_bound_check(TASK, OracleFlowMap(TASK), kind, make_rng(12),
                                    loss_samples=1024, base_samples=512, subsample=256, repeats=3)
    assert audit.lhs == pytest.approx(0.0, abs=1e-20)
    assert audit.loss <= 1e-10
    assert audit.holds


@pytest.mark.parametrize("kind", ["lmd", "emd"])
def test_bound_audit_of_identity_map(kind):
    task = GaussianTask(mean=np.array([1.0, 0.0]), std=np.ones(2))
    audit = wasserstein_bound_check(task, IdentityFlowMap(2), kind, make_rng(13),
                                    loss_samples=4096, base_samples=1024, subsample=256, repeats=3)
    # the exact map is a pure shift by m, so the paired cost is |m|^2
    assert audit.lhs == pytest.approx(1.0, abs=1e-9)
    assert audit.holds


@pytest.mark.parametrize("seed", range(20))
def test_bound_audit_holds_for_perturbed_maps(seed):
    rng = make_rng(seed, 14)
    perturbed = PerturbedFlowMap.random(OracleFlowMap(TASK), rng, 0.1)
    for kind in ("lmd", "emd"):
        audit = wasserstein_bound_check(TASK, perturbed, kind, rng,
                                        loss_samples=2048, base_samples=512, subsample=256, repeats=3)
        assert audit.lhs > 0.0
        assert audit.holds, audit.summary()


def test_bound_audit_slice_normalization():
    perturbed = PerturbedFlowMap.random(OracleFlowMap(TASK), make_rng(15), 0.1)
    audit = wasserstein_bound_check(TASK, perturbed, "lmd", make_rng(16), normalization="slice",
                                    loss_samples=2048, base_samples=512, subsample=256, repeats=3)
    assert audit.normalization == "slice"
    assert audit.holds, audit.summary()


def test_bound_audit_does_not_depend_on_worker_count():
    perturbed = PerturbedFlowMap.random(OracleFlowMap(TASK), make_rng(17), 0.1)
    audits = [wasserstein_bound_check(TASK, perturbed, "emd", make_rng(18), loss_samples=1024,
                                      base_samples=512, subsample=128, repeats=4, workers=workers)
              for workers in (1, 4)]
    assert audits[0].lhs == audits[1].lhs
    assert audits[0].lhs_stderr == audits[1].lhs_stderr


def test_deterministic_oracle_suite_uses_one_worker(tmp_path):
    config = ExperimentConfig.from_string(SUITE_CONFIG).with_overrides(deterministic=True)
    assert OracleSuiteService(config, str(tmp_path)).workers == 1


def test_bound_audit_rejects_unknown_kind_and_normalization():
    with pytest.raises(ConfigurationError):
        wasserstein_bound_check(TASK, OracleFlowMap(TASK), "fmm", make_rng(0))
    with pytest.raises(ConfigurationError):
        wasserstein_bound_check(TASK, OracleFlowMap(TASK), "lmd", make_rng(0), normalization="circle")


def test_oracle_suite_passes_without_training(tmp_path):
    config = ExperimentConfig.from_string(SUITE_CONFIG)
    service = OracleSuiteService(config, str(tmp_path))
    report = service.run(train_denoiser=False)
    assert report.passed
    assert not any("denoiser" in c.name for c in report.checks)
    text = (tmp_path / "oracle-suite.txt").read_text()
    assert text.endswith(f"{len(report.checks)}/{len(report.checks)} checks passed\n")


def test_oracle_suite_catches_flipped_transport_direction(tmp_path):
    config = ExperimentConfig.from_string(SUITE_CONFIG + "direction_sign = -1\n")
    with pytest.raises(AcceptanceError):
        OracleSuiteService(config, str(tmp_path)).run(train_denoiser=False)
    report = (tmp_path / "oracle-suite.txt").read_text()
    assert "FAIL emd zero at truth" in report
