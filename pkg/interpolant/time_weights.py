"""
Time-pair weights w_{s,t} and their samplers.

uniform-square and strip(K) are symmetric under (s, t) -> (t, s);
forward-only and forward-strip(K) restrict to s <= t. Strip kinds are sampled
by rejection from the unit square, with acceptance rate 2/K - 1/K^2.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from utils.exceptions import ConfigurationError


class WeightKind(Enum):
    UNIFORM_SQUARE = "uniform-square"
    STRIP = "strip"
    FORWARD_ONLY = "forward-only"
    FORWARD_STRIP = "forward-strip"


@dataclass(frozen=True)
class TimeWeight:
    """
    Attributes:
        kind: Weight family
        K: Strip parameter; pairs satisfy |t - s| <= 1/K for strip kinds
    """
    kind: WeightKind = WeightKind.UNIFORM_SQUARE
    K: Optional[int] = None

    def __post_init__(self):
        if self.kind in (WeightKind.STRIP, WeightKind.FORWARD_STRIP):
            if self.K is None or int(self.K) < 1:
                raise ConfigurationError(f"{self.kind.value} weight needs a positive K, got {self.K}")

    @property
    def symmetric(self) -> bool:
        return self.kind in (WeightKind.UNIFORM_SQUARE, WeightKind.STRIP)

    @property
    def width(self) -> float:
        """Largest admissible |t - s|."""
        return 1.0 / self.K if self.K else 1.0

    def acceptance_rate(self) -> float:
        """Expected fraction of unit-square proposals kept by the sampler."""
        if self.kind in (WeightKind.STRIP, WeightKind.FORWARD_STRIP):
            w = self.width
            return 2.0 * w - w * w
        return 1.0

    def label(self) -> str:
        if self.K is None:
            return self.kind.value
        return f"{self.kind.value}({self.K})"

    def sample(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n pairs (s, t) in [0, 1)^2 distributed per the weight."""
        s = np.empty(n)
        t = np.empty(n)
        filled = 0
        width = self.width
        while filled < n:
            want = n - filled
            batch = int(np.ceil(want / self.acceptance_rate() * 1.1)) + 8
            u = rng.random((batch, 2))
            if self.kind in (WeightKind.STRIP, WeightKind.FORWARD_STRIP):
                u = u[np.abs(u[:, 1] - u[:, 0]) <= width]
            if self.kind in (WeightKind.FORWARD_ONLY, WeightKind.FORWARD_STRIP):
                u = np.sort(u, axis=1)
            take = min(want, len(u))
            s[filled:filled + take] = u[:take, 0]
            t[filled:filled + take] = u[:take, 1]
            filled += take
        return s, t


def parse_weight(kind: str, K: Optional[int] = None) -> TimeWeight:
    """
    Build a TimeWeight from its config name.

    Raises:
        ConfigurationError: If the name is unknown
    """
    try:
        weight_kind = WeightKind(kind)
    except ValueError:
        raise ConfigurationError(
            f"Unknown weight '{kind}'. Expected one of: "
            f"{', '.join(k.value for k in WeightKind)}"
        )
    if weight_kind in (WeightKind.UNIFORM_SQUARE, WeightKind.FORWARD_ONLY):
        K = None
    return TimeWeight(kind=weight_kind, K=None if K is None else int(K))
