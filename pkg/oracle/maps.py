"""
Closed-form maps exposed through the same dual interface as FlowMapModel.

Each map implements dual(s, t, x, label, leaves, s_dot, t_dot, x_dot), so the
losses, samplers and metrics treat oracles and networks alike. leaves and
label are accepted and ignored.
"""

from typing import Optional

import numpy as np

from diffnet.dual import DualBatch
from diffnet.graph import Var, as_var

from .gaussian import GaussianTask, _cross_cov, oracle_velocity_gaussian


class _ClosedFormMap:
    kind = "flowmap"
    num_labels = 0
    fd_time_derivative = False

    def __init__(self, task: GaussianTask):
        self.task = task

    @property
    def dim(self) -> int:
        return self.task.dim

    def _parts(self, s, t, x):
        """(X, dX/ds, dX/dt, spatial gain) with X = offset + gain * x for an affine map."""
        raise NotImplementedError

    def dual(self, s, t, x, label=None, leaves=None, s_dot: float = 0.0, t_dot: float = 0.0,
             x_dot=None) -> DualBatch:
        x = as_var(x)
        X, dXds, dXdt, gain = self._parts(s, t, x)
        if s_dot == 0.0 and t_dot == 0.0 and x_dot is None:
            return DualBatch(as_var(X))
        tangent = as_var(np.zeros(x.shape))
        if s_dot != 0.0:
            tangent = tangent + dXds * s_dot
        if t_dot != 0.0:
            tangent = tangent + dXdt * t_dot
        if x_dot is not None:
            tangent = tangent + gain * x_dot
        return DualBatch(as_var(X), tangent)

    def __call__(self, s, t, x, label=None) -> np.ndarray:
        return self.dual(s, t, np.atleast_2d(x)).primal.value


class OracleFlowMap(_ClosedFormMap):
    """Exact flow map X_{s,t}(x) = m_t + (sigma_t / sigma_s)(x - m_s)."""

    def _parts(self, s, t, x):
        m_s, sig_s, md_s, sd_s = self.task.moments(s)
        m_t, sig_t, md_t, sd_t = self.task.moments(t)
        gain = sig_t / sig_s
        centred = x - m_s
        X = gain * centred + m_t
        dXdt = (sd_t / sig_s) * centred + md_t
        dXds = (-gain * sd_s / sig_s) * centred - gain * md_s
        return X, dXds, dXdt, gain


class OracleDenoiserMap(_ClosedFormMap):
    """E[I_t | I_s = x] for the Gaussian task."""

    def _parts(self, s, t, x):
        m_s, sig_s, md_s, sd_s = self.task.moments(s)
        m_t, _, md_t, _ = self.task.moments(t)
        cov, dcov_dt = _cross_cov(self.task, s, t)
        t_col = np.reshape(np.asarray(t, dtype=float), (-1, 1))
        dcov_ds = -(1.0 - t_col) + t_col * self.task.std ** 2
        var_s = sig_s ** 2
        gain = cov / var_s
        dgain_ds = (dcov_ds * var_s - cov * 2.0 * sig_s * sd_s) / var_s ** 2
        centred = x - m_s
        X = gain * centred + m_t
        dXdt = (dcov_dt / var_s) * centred + md_t
        dXds = dgain_ds * centred - gain * md_s
        return X, dXds, dXdt, gain


class IdentityFlowMap:
    """X_{s,t}(x) = x; the map of a zero-initialized network."""
    kind = "flowmap"
    num_labels = 0
    fd_time_derivative = False

    def __init__(self, dim: int):
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def dual(self, s, t, x, label=None, leaves=None, s_dot: float = 0.0, t_dot: float = 0.0,
             x_dot=None) -> DualBatch:
        x = as_var(x)
        if s_dot == 0.0 and t_dot == 0.0 and x_dot is None:
            return DualBatch(x)
        return DualBatch(x, as_var(np.zeros(x.shape)) if x_dot is None else as_var(x_dot))

    def __call__(self, s, t, x, label=None) -> np.ndarray:
        return np.array(np.atleast_2d(x), dtype=float)


class PerturbedFlowMap:
    """
    base + (t - s)(x A + c): still the identity at s = t, off the exact map elsewhere.
    """
    kind = "flowmap"
    num_labels = 0
    fd_time_derivative = False

    def __init__(self, base, A: np.ndarray, c: np.ndarray):
        self.base = base
        self.A = np.asarray(A, dtype=float)
        self.c = np.asarray(c, dtype=float)

    @property
    def dim(self) -> int:
        return self.base.dim

    @classmethod
    def random(cls, base, rng: np.random.Generator, scale: float = 0.1) -> "PerturbedFlowMap":
        d = base.dim
        return cls(base, scale * rng.standard_normal((d, d)), scale * rng.standard_normal(d))

    def dual(self, s, t, x, label=None, leaves=None, s_dot: float = 0.0, t_dot: float = 0.0,
             x_dot=None) -> DualBatch:
        x = as_var(x)
        n = x.shape[0]
        gap = np.broadcast_to(np.asarray(t, dtype=float) - np.asarray(s, dtype=float), (n,))[:, None]
        shift = x @ self.A + self.c
        inner = self.base.dual(s, t, x, label, leaves, s_dot=s_dot, t_dot=t_dot, x_dot=x_dot)
        X = inner.primal + gap * shift
        if inner.tangent is None:
            return DualBatch(X)
        tangent = inner.tangent + shift * (t_dot - s_dot)
        if x_dot is not None:
            tangent = tangent + gap * (as_var(x_dot) @ self.A)
        return DualBatch(X, tangent)

    def __call__(self, s, t, x, label=None) -> np.ndarray:
        return self.dual(s, t, np.atleast_2d(x)).primal.value


class OracleVelocity:
    """b_t(x) for the Gaussian task, with the VelocityModel interface."""
    kind = "velocity"
    num_labels = 0

    def __init__(self, task: GaussianTask):
        self.task = task

    @property
    def dim(self) -> int:
        return self.task.dim

    def evaluate(self, t, x, label=None, leaves=None) -> Var:
        return as_var(oracle_velocity_gaussian(self.task, t, as_var(x)))

    def __call__(self, t, x, label=None) -> np.ndarray:
        return self.evaluate(t, np.atleast_2d(x)).value


class FunctionVelocity:
    """Wraps a plain callable fn(t, x) -> array as a frozen velocity field."""
    kind = "velocity"
    num_labels = 0

    def __init__(self, fn, dim: int):
        self.fn = fn
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def evaluate(self, t, x, label=None, leaves=None) -> Var:
        return Var(np.asarray(self.fn(t, np.asarray(as_var(x).value)), dtype=float))

    def __call__(self, t, x, label=None) -> np.ndarray:
        return self.evaluate(t, np.atleast_2d(x)).value
