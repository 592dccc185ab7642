"""
Multilayer perceptron parameters and evaluation.
"""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from utils.exceptions import NumericError, ValidationError

from .dual import DualBatch, dual_activation, dual_linear
from .graph import ACTIVATIONS, Var


@dataclass
class MlpParams:
    """
    Weights and biases of a fully connected network.

    Attributes:
        widths: Layer widths from input to output
        activation: gelu, silu or tanh
        weights: Matrices of shape (widths[i], widths[i + 1])
        biases: Vectors of shape (widths[i + 1],)
    """
    widths: List[int]
    activation: str
    weights: List[np.ndarray] = field(default_factory=list)
    biases: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"Unknown activation '{self.activation}'")
        if len(self.widths) < 2:
            raise ValidationError(f"Need at least input and output widths, got {self.widths}")
        if self.weights:
            self.check()

    @classmethod
    def initialize(cls, widths: Sequence[int], activation: str, rng: np.random.Generator,
                   zero_final: bool = True) -> "MlpParams":
        """Fan-in scaled uniform init; the final layer is zero when zero_final."""
        widths = [int(w) for w in widths]
        weights, biases = [], []
        n_layers = len(widths) - 1
        for i in range(n_layers):
            fan_in, fan_out = widths[i], widths[i + 1]
            if zero_final and i == n_layers - 1:
                weights.append(np.zeros((fan_in, fan_out)))
                biases.append(np.zeros(fan_out))
                continue
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(widths=widths, activation=activation, weights=weights, biases=biases)

    def check(self) -> None:
        """Shapes chain and all entries are finite."""
        n_layers = len(self.widths) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ValidationError(f"Expected {n_layers} layers, got {len(self.weights)}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.widths[i], self.widths[i + 1]) or b.shape != (self.widths[i + 1],):
                raise ValidationError(f"Layer {i} has shapes {w.shape}/{b.shape}, widths {self.widths}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise NumericError("Non-finite parameters", layer=i)

    def arrays(self) -> List[np.ndarray]:
        """Parameters in declaration order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "MlpParams":
        arrays = list(arrays)
        return MlpParams(
            widths=list(self.widths), activation=self.activation,
            weights=[np.array(a, dtype=float) for a in arrays[0::2]],
            biases=[np.array(a, dtype=float) for a in arrays[1::2]],
        )

    def leaves(self, trainable: bool = True) -> List[Var]:
        """Graph leaves in declaration order; constants when not trainable."""
        if trainable:
            return [Var.leaf(a, name=f"param{i}") for i, a in enumerate(self.arrays())]
        return [Var(a, op=f"param{i}") for i, a in enumerate(self.arrays())]

    @property
    def size(self) -> int:
        return int(sum(a.size for a in self.arrays()))

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def unflatten(self, flat: np.ndarray) -> "MlpParams":
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.size:
            raise ValidationError(f"Expected {self.size} parameters, got {flat.size}")
        arrays, pos = [], 0
        for a in self.arrays():
            arrays.append(flat[pos:pos + a.size].reshape(a.shape))
            pos += a.size
        return self.with_arrays(arrays)

    def copy(self) -> "MlpParams":
        return self.with_arrays([a.copy() for a in self.arrays()])


def mlp_forward(leaves: Sequence[Var], activation: str, inp: DualBatch) -> DualBatch:
    """
    Evaluate the network on a dual batch.

    Raises:
        NumericError: If a layer produces non-finite values
    """
    n_layers = len(leaves) // 2
    h = inp
    for i in range(n_layers):
        h = dual_linear(h, leaves[2 * i], leaves[2 * i + 1])
        if i < n_layers - 1:
            h = dual_activation(h, activation)
        if not np.isfinite(h.primal.value).all():
            raise NumericError("Non-finite network output", layer=i)
    return h
