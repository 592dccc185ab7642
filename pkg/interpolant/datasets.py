"""
Procedural base and target samplers.

The checkerboard is a 4x4 board of side-2 cells tiling [-4, 4]^2 with mass on
the cells whose row + column index is even. On the two-class board, label 0
holds the black cells with (col - row) % 4 == 0 and label 1 those with
(col - row) % 4 == 2.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config.constants import BOARD_CELLS, BOARD_HALF_WIDTH
from utils.exceptions import ValidationError

CELL_SIDE = 2.0 * BOARD_HALF_WIDTH / BOARD_CELLS


def sample_standard_normal(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, dim))


def _black_cells(label: Optional[int] = None) -> np.ndarray:
    cells = []
    for row in range(BOARD_CELLS):
        for col in range(BOARD_CELLS):
            if (row + col) % 2:
                continue
            cls = 0 if (col - row) % 4 == 0 else 1
            if label is None or cls == label:
                cells.append((col, row))
    return np.asarray(cells, dtype=float)


def sample_checkerboard(
    n: int,
    rng: np.random.Generator,
    labels: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Draw n points uniformly from the black cells.

    Args:
        n: Number of points
        rng: Random generator
        labels: Optional per-point class; points are then drawn from their
            class's cells only
    """
    out = np.empty((n, 2))
    if labels is None:
        cells = _black_cells()
        idx = rng.integers(0, len(cells), size=n)
        corner = cells[idx]
    else:
        labels = np.asarray(labels)
        corner = np.empty((n, 2))
        for cls in (0, 1):
            mask = labels == cls
            cells = _black_cells(cls)
            corner[mask] = cells[rng.integers(0, len(cells), size=int(mask.sum()))]
    offset = rng.random((n, 2))
    out[:] = -BOARD_HALF_WIDTH + (corner + offset) * CELL_SIDE
    return out


def checkerboard_class(x: np.ndarray) -> np.ndarray:
    """
    Class of the cell containing each point.

    Returns:
        Array of 0/1 for points in black cells, -1 for white cells or points
        off the board
    """
    x = np.asarray(x, dtype=float)
    cols = np.floor((x[:, 0] + BOARD_HALF_WIDTH) / CELL_SIDE).astype(int)
    rows = np.floor((x[:, 1] + BOARD_HALF_WIDTH) / CELL_SIDE).astype(int)
    on_board = (cols >= 0) & (cols < BOARD_CELLS) & (rows >= 0) & (rows < BOARD_CELLS)
    black = ((rows + cols) % 2) == 0
    cls = np.where((cols - rows) % 4 == 0, 0, 1)
    return np.where(on_board & black, cls, -1)


def in_checkerboard(x: np.ndarray) -> np.ndarray:
    """Whether each point lies on a black cell."""
    return checkerboard_class(x) >= 0


@dataclass(frozen=True)
class GaussianTarget:
    """Diagonal Gaussian N(mean, diag(std^2))."""
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.std) <= 0):
            raise ValidationError(f"Gaussian std must be positive, got {self.std}")

    @property
    def dim(self) -> int:
        return len(self.mean)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.mean) + np.asarray(self.std) * rng.standard_normal((n, self.dim))


class TargetSampler:
    """
    Uniform interface over the procedural targets.

    Attributes:
        name: checkerboard, checkerboard-2class or gaussian
        dim: Dimension d
        num_labels: 0 for unconditional targets, 2 for the two-class board
    """

    def __init__(self, name: str, gaussian: Optional[GaussianTarget] = None):
        self.name = name
        self.gaussian = gaussian
        if name in ("checkerboard", "checkerboard-2class"):
            self.dim = 2
        elif name == "gaussian":
            if gaussian is None:
                raise ValidationError("gaussian target requires mean and std")
            self.dim = gaussian.dim
        else:
            raise ValidationError(f"Unknown target '{name}'")
        self.num_labels = 2 if name == "checkerboard-2class" else 0

    def sample(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Draw n target points and, for conditional targets, their labels."""
        if self.name == "gaussian":
            return self.gaussian.sample(n, rng), None
        if self.num_labels:
            labels = rng.integers(0, self.num_labels, size=n)
            return sample_checkerboard(n, rng, labels), labels
        return sample_checkerboard(n, rng), None

    def sample_labelled(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Draw one target point per requested label."""
        if not self.num_labels:
            return self.sample(len(labels), rng)[0]
        return sample_checkerboard(len(labels), rng, labels)
