"""
Tests for KL and W2 estimators, teacher error and metric reports.
"""

import csv
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from interpolant import make_rng
from metrics import (
    HistogramGrid,
    MetricReport,
    assignment_cost,
    gaussian_w2sq,
    kl_histogram,
    mismatch_report,
    teacher_l2,
    w2_assignment,
)
from oracle import GaussianTask, IdentityFlowMap, OracleFlowMap, oracle_flowmap_gaussian
from utils.exceptions import NumericError, UsageError, ValidationError

TASK = GaussianTask(mean=np.array([1.5, -0.5]), std=np.array([0.7, 1.3]))


def test_kl_of_identical_samples_is_zero():
    x = make_rng(0).standard_normal((5000, 2))
    assert kl_histogram(x, x) == pytest.approx(0.0, abs=1e-12)


def test_kl_is_positive_for_shifted_samples():
    rng = make_rng(1)
    p = rng.standard_normal((20000, 2))
    q = rng.standard_normal((20000, 2)) + 1.0
    assert kl_histogram(p, q) > 0.3


def test_kl_matches_gaussian_closed_form():
    # KL(N(0,1) || N(0.5,1)) = 0.5**2 / 2
    rng = make_rng(11)
    p = rng.standard_normal((1_000_000, 1))
    q = rng.standard_normal((1_000_000, 1)) + 0.5
    grid = HistogramGrid.square(1, -5.0, 5.5, bins=200)
    assert kl_histogram(p, q, grid) == pytest.approx(0.125, abs=0.01)


def test_kl_smoothing_keeps_disjoint_supports_finite():
    grid = HistogramGrid.square(1, 0.0, 2.0, bins=2)
    kl = kl_histogram(np.full((10, 1), 0.5), np.full((10, 1), 1.5), grid)
    assert np.isfinite(kl)
    assert kl > 10.0


def test_kl_rejects_empty_and_mismatched_inputs():
    with pytest.raises(UsageError):
        kl_histogram(np.zeros((0, 2)), np.zeros((3, 2)))
    with pytest.raises(UsageError):
        kl_histogram(np.zeros((3, 2)), np.zeros((3, 3)))


def test_histogram_grid_validation():
    with pytest.raises(ValidationError):
        HistogramGrid(bins=1)
    with pytest.raises(ValidationError):
        HistogramGrid(ranges=((1.0, 1.0), (0.0, 1.0)))
    assert HistogramGrid().cells == 64 * 64


def test_assignment_cost_finds_the_permutation():
    p = make_rng(2).standard_normal((50, 2))
    q = p[make_rng(3).permutation(50)]
    assert assignment_cost(p, q) == pytest.approx(0.0, abs=1e-24)


def test_assignment_cost_of_shift():
    p = make_rng(4).standard_normal((100, 2))
    assert assignment_cost(p, p + np.array([3.0, 4.0])) == pytest.approx(25.0)


@given(seed=st.integers(0, 10000))
@hyp_settings(max_examples=20, deadline=None)
def test_assignment_beats_identity_pairing(seed):
    rng = make_rng(seed)
    p, q = rng.standard_normal((20, 2)), rng.standard_normal((20, 2))
    assert assignment_cost(p, q) <= float(np.mean(np.sum((p - q) ** 2, axis=1))) + 1e-12


def test_w2_of_identical_sets_is_zero():
    x = make_rng(5).standard_normal((600, 2))
    mean, se = w2_assignment(x, x, n=100, repeats=4, paired=True)
    assert mean == 0.0
    assert se == 0.0


def test_w2_matches_gaussian_closed_form():
    rng = make_rng(6)
    p = rng.standard_normal((20000, 2))
    q = TASK.mean + TASK.std * rng.standard_normal((20000, 2))
    mean, se = w2_assignment(p, q, n=512, repeats=8, rng=rng)
    exact = gaussian_w2sq(np.zeros(2), np.ones(2), TASK.mean, TASK.std)
    # finite subsamples bias W2 upwards
    assert exact - 3 * se <= mean <= exact + 0.5


def test_w2_is_independent_of_worker_count():
    rng_p = make_rng(7)
    p, q = rng_p.standard_normal((2000, 2)), rng_p.standard_normal((2000, 2)) + 1.0
    serial = w2_assignment(p, q, n=128, repeats=6, rng=make_rng(8), workers=1)
    threaded = w2_assignment(p, q, n=128, repeats=6, rng=make_rng(8), workers=4)
    assert serial == threaded


def test_w2_validation():
    x = np.zeros((10, 2))
    with pytest.raises(ValidationError):
        w2_assignment(x, x, n=20)
    with pytest.raises(ValidationError):
        w2_assignment(x, x, n=5, repeats=0)
    with pytest.raises(ValidationError):
        w2_assignment(x, np.zeros((12, 2)), n=5, paired=True)
    with pytest.raises(UsageError):
        w2_assignment(np.zeros((0, 2)), x, n=1)


def test_gaussian_w2sq():
    assert gaussian_w2sq([0, 0], [1, 1], [3, 4], [1, 1]) == pytest.approx(25.0)
    assert gaussian_w2sq([0], [1], [0], [3]) == pytest.approx(4.0)


def test_teacher_l2_of_exact_student_is_zero():
    x0 = make_rng(9).standard_normal((100, 2))
    teacher = lambda x: oracle_flowmap_gaussian(TASK, 0.0, 1.0, x)  # noqa: E731
    assert teacher_l2(OracleFlowMap(TASK), teacher, x0) == pytest.approx(0.0, abs=1e-24)


def test_mismatch_report_flags_distant_points(tmp_path):
    x0 = np.array([[0.0, 0.0], [5.0, 0.0]])
    teacher = lambda x: 2.0 * x  # noqa: E731
    report = mismatch_report(IdentityFlowMap(2), teacher, x0, threshold=1.0)
    np.testing.assert_array_equal(report.exceeds, [False, True])
    assert report.flagged_fraction == 0.5
    path = report.write_csv(str(tmp_path / "mismatch.csv"))
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0][-1] == "exceeds"
    assert rows[2][-1] == "1"


def test_metric_report_rejects_non_finite_and_negative_stderr():
    with pytest.raises(NumericError):
        MetricReport("r", "map-onestep", 1, float("nan"), 0.1, 0.01, 10, 10, 0)
    with pytest.raises(ValidationError):
        MetricReport("r", "map-onestep", 1, 0.1, 0.1, -0.01, 10, 10, 0)


def test_metric_report_text_and_csv(tmp_path):
    report = MetricReport("r", "map-multistep", 4, 0.02, 0.05, 0.001, 1000, 1000, 3, teacher_l2=0.01)
    text = report.to_text()
    assert "kl=0.02\n" in text
    assert "teacher_l2=0.01\n" in text
    assert "w2sq_teacher" not in text
    path = str(tmp_path / "metrics.csv")
    report.append_csv(path)
    report.append_csv(path)
    with open(path) as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert rows[0]["n_steps"] == "4"
    assert rows[0]["mismatch_fraction"] == ""
