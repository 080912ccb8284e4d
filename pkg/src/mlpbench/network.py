"""Single-hidden-layer sigmoid perceptron: weights, forward pass, decoding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Activation",
    "MlpNetwork",
    "forward",
    "forward_batch",
    "init_weights",
    "predict",
    "predict_batch",
    "sigmoid",
]

INIT_RANGE = 0.5


def sigmoid(y, c: float = 1.0):
    """Logistic function ``1 / (1 + exp(-c*y))``; works on scalars and arrays."""
    with np.errstate(over="ignore", under="ignore"):
        out = 1.0 / (1.0 + np.exp(-c * np.asarray(y, dtype=np.float64)))
    return out if out.ndim else float(out)


@dataclass(eq=False)
class MlpNetwork:
    """Weights of an ``n_in``-``n_hidden``-``n_out`` network.

    ``hidden_weights`` has shape ``(n_in + 1, n_hidden)`` and
    ``output_weights`` has shape ``(n_hidden + 1, n_out)``; the last row of
    each holds the biases (their input is the constant 1).
    """

    hidden_weights: np.ndarray
    output_weights: np.ndarray

    def __post_init__(self):
        self.hidden_weights = np.ascontiguousarray(self.hidden_weights, dtype=np.float64)
        self.output_weights = np.ascontiguousarray(self.output_weights, dtype=np.float64)
        if self.hidden_weights.ndim != 2 or self.output_weights.ndim != 2:
            raise ValueError("weight matrices must be 2-d")
        if self.output_weights.shape[0] != self.hidden_weights.shape[1] + 1:
            raise ValueError(
                f"output weights have {self.output_weights.shape[0]} rows, "
                f"expected n_hidden + 1 = {self.hidden_weights.shape[1] + 1}"
            )
        if not (np.isfinite(self.hidden_weights).all() and np.isfinite(self.output_weights).all()):
            raise ValueError("weights must be finite")

    @property
    def n_in(self) -> int:
        return self.hidden_weights.shape[0] - 1

    @property
    def n_hidden(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.output_weights.shape[1]

    @property
    def weight_count(self) -> int:
        return self.hidden_weights.size + self.output_weights.size

    def copy(self) -> MlpNetwork:
        return MlpNetwork(self.hidden_weights.copy(), self.output_weights.copy())

    def __eq__(self, other):
        if not isinstance(other, MlpNetwork):
            return NotImplemented
        return np.array_equal(self.hidden_weights, other.hidden_weights) and np.array_equal(
            self.output_weights, other.output_weights
        )

    def to_dict(self) -> dict:
        return {
            "n_in": self.n_in,
            "n_hidden": self.n_hidden,
            "n_out": self.n_out,
            "hidden_weights": self.hidden_weights.ravel().tolist(),
            "output_weights": self.output_weights.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MlpNetwork:
        n_in, n_hidden, n_out = d["n_in"], d["n_hidden"], d["n_out"]
        hidden = np.array(d["hidden_weights"], dtype=np.float64).reshape(n_in + 1, n_hidden)
        output = np.array(d["output_weights"], dtype=np.float64).reshape(n_hidden + 1, n_out)
        return cls(hidden, output)

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> MlpNetwork:
        return cls.from_dict(json.loads(text))


class Activation(NamedTuple):
    hidden: np.ndarray
    output: np.ndarray


def init_weights(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> MlpNetwork:
    """Draw every weight and bias independently from U[-0.5, 0.5]."""
    for label, value in (("n_in", n_in), ("n_hidden", n_hidden), ("n_out", n_out)):
        if value < 1:
            raise ValueError(f"{label} must be at least 1, got {value}")
    hidden = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n_in + 1, n_hidden))
    output = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n_hidden + 1, n_out))
    return MlpNetwork(hidden, output)


def _check_inputs(net: MlpNetwork, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.n_in:
        raise ValueError(f"expected {net.n_in} inputs, got {x.shape[-1]}")
    return x


def forward_batch(net: MlpNetwork, x: np.ndarray, c: float = 1.0) -> Activation:
    """Forward pass for a batch ``x`` of shape ``(n, n_in)``."""
    x = np.atleast_2d(_check_inputs(net, x))
    w, v = net.hidden_weights, net.output_weights
    hidden = sigmoid(x @ w[:-1] + w[-1], c)
    output = sigmoid(hidden @ v[:-1] + v[-1], c)
    return Activation(hidden, output)


def forward(net: MlpNetwork, x, c: float = 1.0) -> Activation:
    x = _check_inputs(net, x)
    if x.ndim != 1:
        raise ValueError("forward takes a single input vector; use forward_batch")
    hidden, output = forward_batch(net, x[None, :], c)
    return Activation(hidden[0], output[0])


def predict(net: MlpNetwork, x, c: float = 1.0) -> int:
    # np.argmax returns the first maximum, i.e. ties go to the lowest index.
    return int(np.argmax(forward(net, x, c).output))


def predict_batch(net: MlpNetwork, x: np.ndarray, c: float = 1.0) -> np.ndarray:
    return np.argmax(forward_batch(net, x, c).output, axis=1)
