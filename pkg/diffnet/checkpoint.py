"""
Checkpoint files.

Layout: one JSON header line, then the parameters as little-endian float64 in
declaration order (W0, b0, W1, b1, ...), then, when saved mid-run, the Adam
first and second moments in the same order.
"""

import json
import os
from typing import Optional, Tuple, Union

import numpy as np

from config.constants import CHECKPOINT_FORMAT_VERSION
from utils.exceptions import ConfigurationError
from utils.logger import get_logger
from utils.validators import validate_file_exists

from .mlp import MlpParams
from .models import FlowMapModel, NetworkSpec, VelocityModel
from .optimizer import AdamState

logger = get_logger(__name__)

Model = Union[VelocityModel, FlowMapModel]
MODEL_CLASSES = {VelocityModel.kind: VelocityModel, FlowMapModel.kind: FlowMapModel}


def _header(model: Model, state: Optional[AdamState]) -> dict:
    spec = model.spec
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "model_kind": model.kind,
        "d": spec.dim,
        "widths": list(model.params.widths),
        "activation": spec.activation,
        "embedding": {"kind": "sinusoidal", "frequencies": spec.frequencies,
                      "time_inputs": model.time_inputs},
        "num_labels": spec.num_labels,
        "n_params": model.params.size,
        "has_optimizer": state is not None,
        "step": 0 if state is None else int(state.step),
    }


def save_checkpoint(path: str, model: Model, state: Optional[AdamState] = None) -> str:
    """Write model parameters (and optionally optimizer state) to path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    header = _header(model, state)
    with open(path, "wb") as f:
        f.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        f.write(model.params.flatten().astype("<f8").tobytes())
        if state is not None:
            for moments in (state.m, state.v):
                f.write(np.concatenate([a.ravel() for a in moments]).astype("<f8").tobytes())
    logger.debug(f"Checkpoint written: {path} ({header['n_params']} params, step {header['step']})")
    return path


def read_header(path: str) -> dict:
    validate_file_exists(path, "Checkpoint")
    with open(path, "rb") as f:
        line = f.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Unreadable checkpoint header in {path}: {e}")
    if header.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise ConfigurationError(
            f"Unsupported checkpoint format {header.get('format_version')} in {path}"
        )
    return header


def load_checkpoint(path: str) -> Tuple[Model, Optional[AdamState]]:
    """
    Read a checkpoint.

    Raises:
        ConfigurationError: If the file is missing, malformed or truncated
    """
    header = read_header(path)
    kind = header["model_kind"]
    if kind not in MODEL_CLASSES:
        raise ConfigurationError(f"Unknown model kind '{kind}' in {path}")
    cls = MODEL_CLASSES[kind]
    spec = NetworkSpec(
        dim=int(header["d"]),
        hidden=tuple(int(w) for w in header["widths"][1:-1]),
        activation=header["activation"],
        frequencies=int(header["embedding"]["frequencies"]),
        num_labels=int(header["num_labels"]),
    )
    template = MlpParams.initialize(header["widths"], spec.activation, np.random.default_rng(0))
    n = int(header["n_params"])
    with open(path, "rb") as f:
        f.readline()
        raw = f.read()
    if len(raw) % 8:
        raise ConfigurationError(f"Checkpoint {path} is truncated: {len(raw)} payload bytes")
    payload = np.frombuffer(raw, dtype="<f8").astype(float)
    expected = n * (3 if header["has_optimizer"] else 1)
    if payload.size != expected:
        raise ConfigurationError(f"Checkpoint {path} holds {payload.size} values, expected {expected}")
    params = template.unflatten(payload[:n])
    model = cls(spec, params)
    state = None
    if header["has_optimizer"]:
        m = template.unflatten(payload[n:2 * n]).arrays()
        v = template.unflatten(payload[2 * n:3 * n]).arrays()
        state = AdamState(m=m, v=v, step=int(header["step"]))
    logger.debug(f"Checkpoint loaded: {path} ({kind}, widths {header['widths']})")
    return model, state
