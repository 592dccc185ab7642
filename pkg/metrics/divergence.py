"""
Histogram KL divergence and exact-assignment squared 2-Wasserstein distance.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from config.constants import KL_BINS, KL_RANGE, W2_REPEATS, W2_SUBSAMPLE
from config.settings import settings
from utils.exceptions import InternalError, UsageError, ValidationError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class HistogramGrid:
    """
    Attributes:
        ranges: (low, high) per dimension
        bins: Bins per dimension
        eps: Mass added to every cell before renormalization; defaults to 1e-6 / cells
    """
    ranges: Tuple[Tuple[float, float], ...] = (KL_RANGE, KL_RANGE)
    bins: int = KL_BINS
    eps: Optional[float] = None

    def __post_init__(self):
        if self.bins < 2:
            raise ValidationError(f"Histogram needs at least 2 bins per axis, got {self.bins}")
        if self.eps is not None and self.eps <= 0:
            raise ValidationError(f"Smoothing mass must be positive, got {self.eps}")
        for lo, hi in self.ranges:
            if not hi > lo:
                raise ValidationError(f"Empty histogram range ({lo}, {hi})")

    @classmethod
    def square(cls, dim: int, lo: float, hi: float, bins: int = KL_BINS) -> "HistogramGrid":
        return cls(ranges=tuple((lo, hi) for _ in range(dim)), bins=bins)

    @property
    def cells(self) -> int:
        return self.bins ** len(self.ranges)

    @property
    def smoothing(self) -> float:
        return 1e-6 / self.cells if self.eps is None else self.eps

    def density(self, samples: np.ndarray) -> np.ndarray:
        """Smoothed, normalized cell masses. Points outside the ranges are dropped."""
        counts, _ = np.histogramdd(samples, bins=self.bins, range=self.ranges)
        total = counts.sum()
        mass = counts / total if total > 0 else counts
        mass = mass + self.smoothing
        return mass / mass.sum()


def kl_histogram(samples_p: np.ndarray, samples_q: np.ndarray, grid: Optional[HistogramGrid] = None) -> float:
    """
    KL(p || q) between histogram estimates; p is the target, q the model.

    Raises:
        UsageError: If either sample set is empty
    """
    samples_p = np.atleast_2d(np.asarray(samples_p, dtype=float))
    samples_q = np.atleast_2d(np.asarray(samples_q, dtype=float))
    if samples_p.size == 0 or samples_q.size == 0:
        raise UsageError("KL estimate needs non-empty sample sets")
    if samples_p.shape[1] != samples_q.shape[1]:
        raise UsageError(f"Dimension mismatch: {samples_p.shape[1]} vs {samples_q.shape[1]}")
    grid = grid or HistogramGrid.square(samples_p.shape[1], *KL_RANGE)
    if len(grid.ranges) != samples_p.shape[1]:
        raise UsageError(f"Grid has {len(grid.ranges)} axes, samples have {samples_p.shape[1]}")
    p = grid.density(samples_p)
    q = grid.density(samples_q)
    kl = float(np.sum(p * np.log(p / q)))
    logger.debug(f"KL over {grid.cells} cells: {kl:.6f}")
    return kl


def assignment_cost(p: np.ndarray, q: np.ndarray) -> float:
    """
    Minimum mean squared Euclidean cost over one-to-one matchings of p and q.

    Raises:
        InternalError: If the assignment solver fails
    """
    cost = cdist(p, q, "sqeuclidean")
    try:
        rows, cols = linear_sum_assignment(cost)
    except ValueError as e:
        raise InternalError(f"Assignment solver failed: {e}")
    return float(cost[rows, cols].mean())


def w2_assignment(
    samples_p: np.ndarray,
    samples_q: np.ndarray,
    n: int = W2_SUBSAMPLE,
    repeats: int = W2_REPEATS,
    rng: Optional[np.random.Generator] = None,
    paired: bool = False,
    workers: Optional[int] = None,
) -> Tuple[float, float]:
    """
    Squared 2-Wasserstein distance from exact assignment on n-vs-n subsamples.

    Args:
        samples_p, samples_q: Point sets, shape (N_p, d) and (N_q, d)
        n: Subsample size per repeat
        repeats: Number of independent subsamples
        rng: Random generator for the subsample indices
        paired: Use the same indices in both sets; requires N_p == N_q and
            is meant for pushforwards of the same base points
        workers: Thread count; defaults to the settings worker cap

    Returns:
        (mean over repeats, standard error over repeats)
    """
    samples_p = np.atleast_2d(np.asarray(samples_p, dtype=float))
    samples_q = np.atleast_2d(np.asarray(samples_q, dtype=float))
    if len(samples_p) == 0 or len(samples_q) == 0:
        raise UsageError("W2 estimate needs non-empty sample sets")
    if n > min(len(samples_p), len(samples_q)):
        raise ValidationError(f"Subsample size {n} exceeds sample counts {len(samples_p)}, {len(samples_q)}")
    if repeats < 1:
        raise ValidationError(f"repeats must be at least 1, got {repeats}")
    if paired and len(samples_p) != len(samples_q):
        raise ValidationError("Paired subsampling needs equally many points on both sides")
    rng = rng or np.random.default_rng(0)

    # indices are drawn serially so results do not depend on the worker count
    subsets = []
    for _ in range(repeats):
        idx_p = rng.choice(len(samples_p), size=n, replace=False)
        idx_q = idx_p if paired else rng.choice(len(samples_q), size=n, replace=False)
        subsets.append((idx_p, idx_q))

    def solve(pair):
        idx_p, idx_q = pair
        return assignment_cost(samples_p[idx_p], samples_q[idx_q])

    workers = settings.worker_count() if workers is None else max(1, workers)
    if workers == 1 or repeats == 1:
        costs = [solve(pair) for pair in subsets]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, repeats)) as pool:
            costs = list(pool.map(solve, subsets))
    costs = np.asarray(costs)
    stderr = float(costs.std(ddof=1) / np.sqrt(repeats)) if repeats > 1 else 0.0
    logger.debug(f"W2^2 over {repeats} x {n} points: {costs.mean():.6f} +/- {stderr:.6f}")
    return float(costs.mean()), stderr


def gaussian_w2sq(mean_p: Sequence[float], std_p: Sequence[float],
                  mean_q: Sequence[float], std_q: Sequence[float]) -> float:
    """Closed-form W2^2 between diagonal Gaussians."""
    mean_p, mean_q = np.asarray(mean_p, dtype=float), np.asarray(mean_q, dtype=float)
    std_p, std_q = np.asarray(std_p, dtype=float), np.asarray(std_q, dtype=float)
    return float(np.sum((mean_p - mean_q) ** 2) + np.sum((std_p - std_q) ** 2))
