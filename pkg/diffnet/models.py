"""
Velocity and two-time flow map networks.

Both embed each time input with sinusoidal features at frequencies
2^k * pi, k = 0..F-1, and append an optional one-hot label after the spatial
input. The flow map uses the residual form X_{s,t}(x) = x + (t - s) v_{s,t}(x),
so X_{s,s} is the identity for every parameter setting.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from config.constants import ACTIVATION, HIDDEN_WIDTHS, TIME_FREQUENCIES
from utils.exceptions import UsageError
from utils.validators import validate_time

from .dual import DualBatch
from .graph import Var, as_var, concat
from .mlp import MlpParams, mlp_forward

FD_TIME_STEP = 1e-4


@dataclass(frozen=True)
class NetworkSpec:
    """
    Shape of a model.

    Attributes:
        dim: Spatial dimension d
        hidden: Hidden layer widths
        activation: gelu, silu or tanh
        frequencies: Sinusoidal frequencies per time input
        num_labels: Number of classes for one-hot conditioning (0 = none)
    """
    dim: int = 2
    hidden: Tuple[int, ...] = HIDDEN_WIDTHS
    activation: str = ACTIVATION
    frequencies: int = TIME_FREQUENCIES
    num_labels: int = 0


def time_features(t: np.ndarray, frequencies: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sinusoidal embedding of t and its derivative in t.

    Returns:
        (features, d features / dt), each of shape (M, 2 * frequencies)
    """
    omega = np.pi * 2.0 ** np.arange(frequencies)
    phase = t[:, None] * omega[None, :]
    sin, cos = np.sin(phase), np.cos(phase)
    feats = np.concatenate([sin, cos], axis=1)
    dfeats = np.concatenate([omega * cos, -omega * sin], axis=1)
    return feats, dfeats


def _times(t, n: int, name: str) -> np.ndarray:
    validate_time(t, name)
    return np.broadcast_to(np.asarray(t, dtype=float), (n,)).copy()


def _one_hot(label, n: int, num_labels: int) -> np.ndarray:
    if num_labels == 0:
        return np.zeros((n, 0))
    if label is None:
        raise UsageError("Conditional model evaluated without labels")
    label = np.broadcast_to(np.asarray(label, dtype=int), (n,))
    if label.min() < 0 or label.max() >= num_labels:
        raise UsageError(f"Labels must lie in [0, {num_labels}), got {np.unique(label)}")
    return np.eye(num_labels)[label]


class VelocityModel:
    """Network estimate of b_t(x) = E[Idot_t | I_t = x]."""
    kind = "velocity"
    time_inputs = 1

    def __init__(self, spec: NetworkSpec, params: MlpParams):
        self.spec = spec
        self.params = params

    @classmethod
    def input_width(cls, spec: NetworkSpec) -> int:
        return 2 * spec.frequencies * cls.time_inputs + spec.dim + spec.num_labels

    @classmethod
    def initialize(cls, spec: NetworkSpec, rng: np.random.Generator, zero_final: bool = False):
        widths = [cls.input_width(spec), *spec.hidden, spec.dim]
        return cls(spec, MlpParams.initialize(widths, spec.activation, rng, zero_final=zero_final))

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def num_labels(self) -> int:
        return self.spec.num_labels

    def with_params(self, params: MlpParams) -> "VelocityModel":
        return type(self)(self.spec, params)

    def evaluate(self, t, x, label=None, leaves: Optional[Sequence[Var]] = None) -> Var:
        x = as_var(x)
        n = x.shape[0]
        t = _times(t, n, "t")
        leaves = self.params.leaves(trainable=False) if leaves is None else leaves
        feats, _ = time_features(t, self.spec.frequencies)
        inp = concat([feats, x, _one_hot(label, n, self.num_labels)])
        return mlp_forward(leaves, self.spec.activation, DualBatch(inp)).primal

    def __call__(self, t, x, label=None) -> np.ndarray:
        return self.evaluate(t, np.atleast_2d(x), label).value


class FlowMapModel:
    """
    Two-time flow map X_{s,t}(x) = x + (t - s) v_{s,t}(x).

    Attributes:
        fd_time_derivative: Replace exact time tangents by central
            differences (debugging only)
    """
    kind = "flowmap"
    time_inputs = 2

    def __init__(self, spec: NetworkSpec, params: MlpParams, fd_time_derivative: bool = False):
        self.spec = spec
        self.params = params
        self.fd_time_derivative = fd_time_derivative

    @classmethod
    def input_width(cls, spec: NetworkSpec) -> int:
        return 2 * spec.frequencies * cls.time_inputs + spec.dim + spec.num_labels

    @classmethod
    def initialize(cls, spec: NetworkSpec, rng: np.random.Generator, zero_final: bool = True):
        widths = [cls.input_width(spec), *spec.hidden, spec.dim]
        return cls(spec, MlpParams.initialize(widths, spec.activation, rng, zero_final=zero_final))

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def num_labels(self) -> int:
        return self.spec.num_labels

    def with_params(self, params: MlpParams) -> "FlowMapModel":
        return type(self)(self.spec, params, self.fd_time_derivative)

    def dual(self, s, t, x, label=None, leaves: Optional[Sequence[Var]] = None,
             s_dot: float = 0.0, t_dot: float = 0.0, x_dot=None) -> DualBatch:
        """
        Evaluate X_{s,t}(x) with a tangent seeded by (s_dot, t_dot, x_dot).

        The tangent is None when no seed is given.
        """
        x = as_var(x)
        n = x.shape[0]
        s = _times(s, n, "s")
        t = _times(t, n, "t")
        leaves = self.params.leaves(trainable=False) if leaves is None else leaves
        freq = self.spec.frequencies
        fs, dfs = time_features(s, freq)
        ft, dft = time_features(t, freq)
        onehot = _one_hot(label, n, self.num_labels)
        primal_in = concat([fs, ft, x, onehot])
        seeded = s_dot != 0.0 or t_dot != 0.0 or x_dot is not None
        tangent_in = None
        if seeded:
            x_part = np.zeros((n, self.dim)) if x_dot is None else x_dot
            tangent_in = concat([s_dot * dfs, t_dot * dft, x_part, np.zeros_like(onehot)])
        v = mlp_forward(leaves, self.spec.activation, DualBatch(primal_in, tangent_in))
        gap = (t - s)[:, None]
        X = x + gap * v.primal
        if not seeded:
            return DualBatch(X)
        tangent = gap * v.tangent + (t_dot - s_dot) * v.primal
        if x_dot is not None:
            tangent = tangent + x_dot
        return DualBatch(X, tangent)

    def __call__(self, s, t, x, label=None) -> np.ndarray:
        return self.dual(s, t, np.atleast_2d(x), label).primal.value


def flow_map_eval(model, s, t, x, label=None, leaves=None) -> Var:
    """X_{s,t}(x)."""
    return model.dual(s, t, x, label, leaves).primal


def _fd_time_derivative(model, s, t, x, label, leaves, wrt: str) -> Tuple[Var, Var]:
    x = as_var(x)
    n = x.shape[0]
    s = _times(s, n, "s")
    t = _times(t, n, "t")
    centre = model.dual(s, t, x, label, leaves).primal
    moving = t if wrt == "t" else s
    hi = np.minimum(moving + FD_TIME_STEP, 1.0)
    lo = np.maximum(moving - FD_TIME_STEP, 0.0)
    if wrt == "t":
        up, down = model.dual(s, hi, x, label, leaves).primal, model.dual(s, lo, x, label, leaves).primal
    else:
        up, down = model.dual(hi, t, x, label, leaves).primal, model.dual(lo, t, x, label, leaves).primal
    return centre, (up - down) * (1.0 / (hi - lo))[:, None]


def flow_map_dt(model, s, t, x, label=None, leaves=None) -> Tuple[Var, Var]:
    """(X_{s,t}(x), d/dt X_{s,t}(x)) from one tangent pass seeded on t."""
    if getattr(model, "fd_time_derivative", False):
        return _fd_time_derivative(model, s, t, x, label, leaves, "t")
    out = model.dual(s, t, x, label, leaves, t_dot=1.0)
    return out.primal, out.tangent


def flow_map_ds(model, s, t, x, label=None, leaves=None) -> Tuple[Var, Var]:
    """(X_{s,t}(x), d/ds X_{s,t}(x)) from one tangent pass seeded on s."""
    if getattr(model, "fd_time_derivative", False):
        return _fd_time_derivative(model, s, t, x, label, leaves, "s")
    out = model.dual(s, t, x, label, leaves, s_dot=1.0)
    return out.primal, out.tangent


def flow_map_jvp_x(model, s, t, x, direction, label=None, leaves=None) -> Tuple[Var, Var]:
    """(X_{s,t}(x), grad X_{s,t}(x) . direction)."""
    out = model.dual(s, t, x, label, leaves, x_dot=direction)
    return out.primal, out.tangent


def velocity_eval(model, t, x, label=None, leaves=None) -> Var:
    """b_t(x)."""
    return model.evaluate(t, x, label, leaves)
