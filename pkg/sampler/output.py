"""
Sample records: CSV rows and fixed-size scatter rasters.
"""

import csv
import os
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config.constants import KL_RANGE, SCATTER_PIXELS  # noqa: E402
from utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

SCATTER_DPI = 100
POINT_SIZE = 0.5
COLORMAP = "coolwarm"


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_samples_csv(
    path: str,
    points: np.ndarray,
    run_id: str,
    method: str,
    n_steps: int,
    labels: Optional[np.ndarray] = None,
    append: bool = False,
) -> str:
    """One row per point: run_id, method, N, label, x0..x{d-1}."""
    points = np.atleast_2d(points)
    _ensure_parent(path)
    new_file = not (append and os.path.exists(path))
    with open(path, "a" if append else "w", newline="") as f:
        writer = csv.writer(f)
        if new_file:
            writer.writerow(["run_id", "method", "N", "label"] + [f"x{i}" for i in range(points.shape[1])])
        for i, p in enumerate(points):
            label = "" if labels is None else int(labels[i])
            writer.writerow([run_id, method, n_steps, label] + [repr(float(v)) for v in p])
    logger.debug(f"Wrote {len(points)} samples to {path}")
    return path


def write_scatter(
    path: str,
    points: np.ndarray,
    labels: Optional[np.ndarray] = None,
    axis_range: Sequence[float] = KL_RANGE,
    title: str = "",
) -> str:
    """Fixed SCATTER_PIXELS x SCATTER_PIXELS scatter of the first two coordinates."""
    _ensure_parent(path)
    inches = SCATTER_PIXELS / SCATTER_DPI
    fig, ax = plt.subplots(figsize=(inches, inches), dpi=SCATTER_DPI)
    try:
        colors = None if labels is None else np.asarray(labels, dtype=float)
        ax.scatter(points[:, 0], points[:, 1], s=POINT_SIZE, c=colors, cmap=COLORMAP if colors is not None else None,
                   linewidths=0)
        lo, hi = axis_range
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)
        fig.savefig(path, dpi=SCATTER_DPI)
    finally:
        plt.close(fig)
    logger.debug(f"Wrote scatter {path}")
    return path
