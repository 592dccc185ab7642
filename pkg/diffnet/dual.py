"""
Batched primal/tangent pairs.

The tangent channel carries a directional derivative through network
evaluation. It is built from recorded graph operations, so a loss that
contains tangents can be differentiated by reverse accumulation.
"""

from dataclasses import dataclass
from typing import Optional

from .graph import Var, activation, activation_slope, as_var


@dataclass
class DualBatch:
    """
    Attributes:
        primal: Batch of values, shape (M, k)
        tangent: Directional derivative of primal, same shape; None means zero
    """
    primal: Var
    tangent: Optional[Var] = None

    @classmethod
    def seed(cls, primal, tangent=None) -> "DualBatch":
        return cls(as_var(primal), None if tangent is None else as_var(tangent))


def dual_linear(inp: DualBatch, weight: Var, bias: Var) -> DualBatch:
    """x W + b; the tangent of an affine layer is the linear part applied to the tangent."""
    primal = inp.primal @ weight + bias
    tangent = None if inp.tangent is None else inp.tangent @ weight
    return DualBatch(primal, tangent)


def dual_activation(inp: DualBatch, kind: str) -> DualBatch:
    """sigma(a) with tangent sigma'(a) * a_dot."""
    primal = activation(inp.primal, kind)
    if inp.tangent is None:
        return DualBatch(primal, None)
    return DualBatch(primal, activation_slope(inp.primal, kind) * inp.tangent)
