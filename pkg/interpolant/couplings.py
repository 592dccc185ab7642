"""
Couplings between base and target samples.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from utils.exceptions import ValidationError
from utils.logger import get_logger

from .datasets import TargetSampler, sample_standard_normal

logger = get_logger(__name__)

CouplingSample = Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]


class CouplingKind(Enum):
    INDEPENDENT = "independent"
    PAIRED_DATASET = "paired-dataset"


class Coupling:
    """Base class: draws (x0, x1, label) triples."""
    kind: CouplingKind
    dim: int
    num_labels: int = 0

    def sample(self, n: int, rng: np.random.Generator) -> CouplingSample:
        raise NotImplementedError

    def sample_base(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


class IndependentCoupling(Coupling):
    """x0 ~ N(0, Id) independent of (x1, label) ~ target."""
    kind = CouplingKind.INDEPENDENT

    def __init__(self, target: TargetSampler):
        self.target = target
        self.dim = target.dim
        self.num_labels = target.num_labels

    def sample(self, n: int, rng: np.random.Generator) -> CouplingSample:
        x0 = sample_standard_normal(n, self.dim, rng)
        x1, labels = self.target.sample(n, rng)
        return x0, x1, labels

    def sample_base(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_standard_normal(n, self.dim, rng)


@dataclass
class PairedCoupling(Coupling):
    """
    Resamples fixed (x0, x1[, label]) pairs with replacement.

    Useful for pairs produced by a teacher map, where x1 is a deterministic
    function of x0.
    """
    x0: np.ndarray
    x1: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.kind = CouplingKind.PAIRED_DATASET
        self.x0 = np.asarray(self.x0, dtype=float)
        self.x1 = np.asarray(self.x1, dtype=float)
        if self.x0.shape != self.x1.shape or self.x0.ndim != 2 or len(self.x0) == 0:
            raise ValidationError(
                f"Paired coupling needs matching (n, d) arrays, got {self.x0.shape} and {self.x1.shape}"
            )
        if self.labels is not None and len(self.labels) != len(self.x0):
            raise ValidationError("Paired coupling labels must match the number of pairs")
        self.dim = self.x0.shape[1]
        self.num_labels = 0 if self.labels is None else int(np.max(self.labels)) + 1
        logger.debug(f"PairedCoupling over {len(self.x0)} pairs in d={self.dim}")

    def sample(self, n: int, rng: np.random.Generator) -> CouplingSample:
        idx = rng.integers(0, len(self.x0), size=n)
        labels = None if self.labels is None else np.asarray(self.labels)[idx]
        return self.x0[idx], self.x1[idx], labels

    def sample_base(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.x0[rng.integers(0, len(self.x0), size=n)]
