"""
Tests for time grids, integrators, map sampling, restyling and sample output.
"""

import csv
import os
import sys

import numpy as np
import pytest
from matplotlib.image import imread

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.constants import SCATTER_PIXELS
from interpolant import make_rng
from oracle import FunctionVelocity, GaussianTask, OracleFlowMap, OracleVelocity, oracle_flowmap_gaussian
from sampler import (
    SampleMethod,
    SampleRun,
    TimeGrid,
    integrate_ode,
    invert_and_restyle,
    map_sample,
    write_samples_csv,
    write_scatter,
)
from services.evaluation_service import generate
from utils.exceptions import ConfigurationError, DomainError, NumericError

TASK = GaussianTask(mean=np.array([1.5, -0.5]), std=np.array([0.7, 1.3]))


class CountingMap:
    """Wraps a flow map and records every (s, t) it is called with."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    def __call__(self, s, t, x, label=None):
        self.calls.append((s, t, label))
        return self.inner(s, t, x, label)


class ShiftByLabel:
    """X_{s,t}(x; label) = x + (t - s) * label, so labels are visible in the output."""

    def __call__(self, s, t, x, label=None):
        shift = 0.0 if label is None else np.asarray(label, dtype=float)[:, None]
        return x + (t - s) * shift


def test_uniform_grid():
    grid = TimeGrid.uniform(4)
    assert grid.times == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert grid.n_steps == 4
    assert grid.forward
    assert list(grid.intervals())[1] == (0.25, 0.5)


def test_decreasing_grid_runs_backwards():
    grid = TimeGrid.uniform(2, start=1.0, end=0.5)
    assert not grid.forward
    assert grid.reversed().times == (0.5, 0.75, 1.0)


@pytest.mark.parametrize("times,error", [
    ((0.0,), ConfigurationError),
    ((0.0, 0.5, 0.5, 1.0), DomainError),
    ((0.0, 0.7, 0.3), DomainError),
    ((0.0, 1.2), DomainError),
])
def test_invalid_grids_are_rejected(times, error):
    with pytest.raises(error):
        TimeGrid.from_sequence(times)


def test_sample_run_validation():
    assert SampleRun.make("map-onestep", 8).grid.times == (0.0, 1.0)
    assert SampleRun.make("map-multistep", 4).uses_map
    assert not SampleRun.make("ode-heun", 4).uses_map
    with pytest.raises(ConfigurationError):
        SampleRun(SampleMethod.MAP_ONESTEP, TimeGrid.uniform(2))
    with pytest.raises(ConfigurationError):
        SampleRun.make("euler", 4)


@pytest.mark.parametrize("method,order", [("heun", 2), ("rk4", 4)])
def test_integrator_convergence_order(method, order):
    x0 = np.array([[1.0, -2.0]])
    linear = FunctionVelocity(lambda t, y: y, 2)
    errors = [np.max(np.abs(integrate_ode(linear, x0, TimeGrid.uniform(n), method) - np.e * x0))
              for n in (20, 40)]
    assert np.log2(errors[0] / errors[1]) == pytest.approx(order, abs=0.2)


def test_backward_integration_inverts_forward():
    x0 = make_rng(0).standard_normal((32, 2))
    velocity = OracleVelocity(TASK)
    x1 = integrate_ode(velocity, x0, TimeGrid.uniform(200), "rk4")
    back = integrate_ode(velocity, x1, TimeGrid.uniform(200, start=1.0, end=0.0), "rk4")
    np.testing.assert_allclose(back, x0, atol=1e-7)


def test_integrator_keeps_trajectory():
    x0 = np.zeros((3, 2))
    constant = FunctionVelocity(lambda t, y: np.ones_like(y), 2)
    final, trajectory = integrate_ode(constant, x0, TimeGrid.uniform(4), "heun", keep_trajectory=True)
    assert trajectory.shape == (5, 3, 2)
    np.testing.assert_allclose(trajectory[2], 0.5)
    np.testing.assert_allclose(final, 1.0)


def test_integrator_reports_blow_up_step():
    explosive = FunctionVelocity(lambda t, y: 1e200 * y * y, 1)
    with pytest.raises(NumericError) as info:
        integrate_ode(explosive, np.array([[1.0]]), TimeGrid.uniform(10), "heun")
    assert info.value.step is not None


def test_integrator_rejects_unknown_method():
    with pytest.raises(ConfigurationError):
        integrate_ode(OracleVelocity(TASK), np.zeros((1, 2)), TimeGrid.uniform(2), "euler")


@pytest.mark.parametrize("n_steps", [1, 2, 4, 8])
def test_map_sample_calls_the_map_once_per_step(n_steps):
    counting = CountingMap(OracleFlowMap(TASK))
    x0 = make_rng(1).standard_normal((16, 2))
    out = map_sample(counting, x0, TimeGrid.uniform(n_steps))
    assert len(counting.calls) == n_steps
    assert [c[:2] for c in counting.calls] == list(TimeGrid.uniform(n_steps).intervals())
    np.testing.assert_allclose(out, oracle_flowmap_gaussian(TASK, 0.0, 1.0, x0), atol=1e-12)


def test_map_sample_reports_non_finite_output():
    with pytest.raises(NumericError) as info:
        map_sample(lambda s, t, x, label=None: x / 0.0 if t > 0.5 else x,
                   np.ones((2, 2)), TimeGrid.uniform(4))
    assert info.value.step == 2


def test_invert_and_restyle_switches_label_between_legs():
    counting = CountingMap(ShiftByLabel())
    x1 = np.zeros((4, 2))
    source, target = np.zeros(4, dtype=int), np.ones(4, dtype=int)
    out = invert_and_restyle(counting, x1, source, target, s_prime=0.5, back_steps=3, forward_steps=2)
    # backward leg under label 0 leaves x unchanged, forward leg adds (1 - s') * 1
    np.testing.assert_allclose(out, 0.5)
    assert len(counting.calls) == 5
    assert all(np.all(c[2] == 0) for c in counting.calls[:3])
    assert all(np.all(c[2] == 1) for c in counting.calls[3:])
    assert counting.calls[0][:2] == (1.0, pytest.approx(1.0 - 0.5 / 3))


def test_invert_and_restyle_with_same_label_is_cycle():
    x1 = make_rng(2).standard_normal((32, 2))
    out = invert_and_restyle(OracleFlowMap(TASK), x1, None, None, s_prime=0.3)
    np.testing.assert_allclose(out, x1, atol=1e-12)


@pytest.mark.parametrize("s_prime", [0.0, 1.0, 1.5])
def test_invert_and_restyle_rejects_bad_split_time(s_prime):
    with pytest.raises(ConfigurationError):
        invert_and_restyle(OracleFlowMap(TASK), np.zeros((1, 2)), None, None, s_prime)


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_samples_csv_rows(tmp_path):
    points = make_rng(3).standard_normal((10, 2))
    labels = np.arange(10) % 2
    path = write_samples_csv(str(tmp_path / "s" / "samples.csv"), points, "run", "map-multistep", 4, labels)
    rows = read_rows(path)
    np.testing.assert_array_equal([[float(r["x0"]), float(r["x1"])] for r in rows], points)
    assert [int(r["label"]) for r in rows] == list(labels)
    assert {r["N"] for r in rows} == {"4"}
    header = open(path).readline().strip()
    assert header == "run_id,method,N,label,x0,x1"


def test_samples_csv_append_without_labels(tmp_path):
    path = str(tmp_path / "samples.csv")
    write_samples_csv(path, np.zeros((2, 2)), "a", "ode-heun", 8)
    write_samples_csv(path, np.ones((3, 2)), "b", "ode-heun", 8, append=True)
    rows = read_rows(path)
    assert [r["run_id"] for r in rows] == ["a", "a", "b", "b", "b"]
    assert all(r["label"] == "" for r in rows)


def test_generate_names_the_sampling_method():
    x0 = make_rng(5).standard_normal((8, 2))
    assert generate(OracleFlowMap(TASK), x0, 1).method == "map-onestep"
    assert generate(OracleFlowMap(TASK), x0, 3).method == "map-multistep"
    batch = generate(OracleVelocity(TASK), x0, 16, ode_method="rk4")
    assert (batch.method, batch.n_steps) == ("ode-rk4", 16)
    np.testing.assert_allclose(batch.points, oracle_flowmap_gaussian(TASK, 0.0, 1.0, x0), atol=1e-3)
    with pytest.raises(ConfigurationError):
        generate(OracleVelocity(TASK), x0, 4, ode_method="euler")


def test_scatter_has_fixed_pixel_size(tmp_path):
    points = make_rng(4).standard_normal((500, 2))
    path = write_scatter(str(tmp_path / "scatter.png"), points, labels=np.arange(500) % 2, title="N=1")
    image = imread(path)
    assert image.shape[:2] == (SCATTER_PIXELS, SCATTER_PIXELS)
