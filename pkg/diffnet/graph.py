"""
Recorded computation graph with reverse-mode accumulation.

Every operation on a Var that depends on a trainable leaf records its parents
and a backward closure. Forward-mode tangents (see diffnet.dual) are built from
these same operations, so reverse accumulation differentiates through them.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, ndtr

from utils.exceptions import NumericError, ValidationError
from utils.logger import get_logger

logger = get_logger(__name__)

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

Backward = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Var:
    """
    A node of the recorded graph holding a float64 array.

    Attributes:
        value: The primal array
        parents: Input nodes, empty for leaves and constants
        backward_fn: Maps the output cotangent to one cotangent per parent
        requires_grad: True for trainable leaves and nodes depending on them
        op: Operation name, reported when a gradient turns non-finite
    """
    __slots__ = ("value", "parents", "backward_fn", "requires_grad", "op")
    __array_ufunc__ = None

    def __init__(self, value, parents: Tuple["Var", ...] = (), backward_fn: Optional[Backward] = None,
                 requires_grad: bool = False, op: str = "const"):
        self.value = np.asarray(value, dtype=float)
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad
        self.op = op

    @classmethod
    def leaf(cls, value, name: str = "param") -> "Var":
        """Trainable leaf."""
        return cls(np.array(value, dtype=float), requires_grad=True, op=name)

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __repr__(self):
        return f"Var(op={self.op}, shape={self.value.shape}, requires_grad={self.requires_grad})"


def as_var(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Var) else np.asarray(x, dtype=float)


def _record(value: np.ndarray, op: str, parents: Tuple[Var, ...], backward_fn: Backward) -> Var:
    if any(p.requires_grad for p in parents):
        return Var(value, parents, backward_fn, requires_grad=True, op=op)
    return Var(value, op=op)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return _record(
        a.value + b.value, "add", (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return _record(
        a.value - b.value, "sub", (a, b),
        lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)),
    )


def mul(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return _record(
        a.value * b.value, "mul", (a, b),
        lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)),
    )


def matmul(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return _record(
        a.value @ b.value, "matmul", (a, b),
        lambda g: (g @ b.value.T, a.value.T @ g),
    )


def total(a) -> Var:
    """Sum of all entries, as a scalar."""
    a = as_var(a)
    return _record(
        np.asarray(a.value.sum()), "sum", (a,),
        lambda g: (np.broadcast_to(g, a.shape).copy(),),
    )


def mean_sq_norm(residual) -> Var:
    """(1/M) sum_i |r_i|^2 over a (M, d) residual."""
    residual = as_var(residual)
    return total(residual * residual) * (1.0 / residual.shape[0])


def concat(parts: Sequence, axis: int = 1) -> Var:
    parts = [as_var(p) for p in parts]
    sizes = [p.shape[axis] for p in parts]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(parts))
        )

    return _record(np.concatenate([p.value for p in parts], axis=axis), "concat", tuple(parts), backward)


def stop_gradient(a) -> Var:
    """Barrier: same value, no recorded dependence."""
    return Var(value_of(a).copy(), op="stopgrad")


def _gelu(x):
    return x * ndtr(x)


def _gelu_d1(x):
    return ndtr(x) + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _gelu_d2(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x) * (2.0 - x * x)


def _silu(x):
    return x * expit(x)


def _silu_d1(x):
    sig = expit(x)
    return sig + x * sig * (1.0 - sig)


def _silu_d2(x):
    sig = expit(x)
    return sig * (1.0 - sig) * (2.0 + x * (1.0 - 2.0 * sig))


def _tanh_d1(x):
    return 1.0 - np.tanh(x) ** 2


def _tanh_d2(x):
    th = np.tanh(x)
    return -2.0 * th * (1.0 - th * th)


ACTIVATIONS: Dict[str, Tuple[Callable, Callable, Callable]] = {
    "gelu": (_gelu, _gelu_d1, _gelu_d2),
    "silu": (_silu, _silu_d1, _silu_d2),
    "tanh": (np.tanh, _tanh_d1, _tanh_d2),
}


def _activation_table(kind: str):
    if kind not in ACTIVATIONS:
        raise ValidationError(f"Unknown activation '{kind}'. Expected one of: {', '.join(ACTIVATIONS)}")
    return ACTIVATIONS[kind]


def activation(a, kind: str) -> Var:
    fn, d1, _ = _activation_table(kind)
    a = as_var(a)
    return _record(fn(a.value), kind, (a,), lambda g: (g * d1(a.value),))


def activation_slope(a, kind: str) -> Var:
    """Elementwise derivative of the activation, itself differentiable."""
    _, d1, d2 = _activation_table(kind)
    a = as_var(a)
    return _record(d1(a.value), f"{kind}'", (a,), lambda g: (g * d2(a.value),))


def _topological_order(root: Var) -> List[Var]:
    order: List[Var] = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(root: Var) -> Dict[int, np.ndarray]:
    """
    Reverse accumulation from a scalar root.

    Returns:
        Cotangents of the trainable leaves, keyed by id(leaf)

    Raises:
        NumericError: If the root or any propagated cotangent is non-finite
    """
    if root.value.size != 1:
        raise ValidationError(f"backward needs a scalar root, got shape {root.shape}")
    if not np.isfinite(root.value).all():
        raise NumericError("Loss is not finite", node=root.op)
    grads: Dict[int, np.ndarray] = {id(root): np.ones_like(root.value)}
    leaf_grads: Dict[int, np.ndarray] = {}
    for node in reversed(_topological_order(root)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.backward_fn is None:
            leaf_grads[id(node)] = g
            continue
        for parent, pg in zip(node.parents, node.backward_fn(g)):
            if pg is None or not parent.requires_grad:
                continue
            if not np.isfinite(pg).all():
                raise NumericError("Non-finite gradient", node=node.op)
            key = id(parent)
            grads[key] = grads[key] + pg if key in grads else pg
    return leaf_grads


@dataclass
class LossGraph:
    """
    Recorded scalar loss.

    Attributes:
        root: Scalar Var
        leaves: Trainable leaves of the model being fit, in parameter layout
        per_sample: Per-sample loss contributions (for standard errors)
        terms: Named scalar components of the loss
    """
    root: Var
    leaves: Sequence[Var] = ()
    per_sample: Optional[np.ndarray] = None
    terms: Dict[str, float] = field(default_factory=dict)
    _cache: Optional[Dict[int, np.ndarray]] = field(default=None, repr=False)

    @property
    def value(self) -> float:
        return float(self.root.value)

    def standard_error(self) -> float:
        if self.per_sample is None or len(self.per_sample) < 2:
            return 0.0
        return float(np.std(self.per_sample, ddof=1) / np.sqrt(len(self.per_sample)))

    def cotangents(self) -> Dict[int, np.ndarray]:
        if self._cache is None:
            self._cache = backward(self.root) if self.root.requires_grad else {}
        return self._cache


def param_grad(graph: LossGraph, leaves: Optional[Sequence[Var]] = None) -> List[np.ndarray]:
    """
    Exact gradient of the loss with respect to the given leaves (default: the
    graph's own), in parameter layout. Leaves the loss does not reach get zeros.
    """
    leaves = graph.leaves if leaves is None else leaves
    cot = graph.cotangents()
    out = []
    for leaf in leaves:
        g = cot.get(id(leaf))
        out.append(np.zeros_like(leaf.value) if g is None else np.reshape(g, leaf.shape).copy())
    return out
