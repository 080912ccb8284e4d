"""Per-sample backpropagation with momentum for :class:`MlpNetwork`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .data import Dataset
from .network import MlpNetwork, forward, forward_batch, init_weights

__all__ = [
    "BackpropScratch",
    "TrainConfig",
    "TrainOutcome",
    "apply_update",
    "encode_one_hot",
    "hidden_delta",
    "mse",
    "output_delta",
    "sgd_step",
    "train",
]


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 0.3
    mu: float = 0.1
    c: float = 1.0
    beta: float = 1.0
    n_hidden: int = 60
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0 <= self.mu < 1:
            raise ValueError(f"mu must lie in [0, 1), got {self.mu}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.n_hidden < 1:
            raise ValueError(f"n_hidden must be at least 1, got {self.n_hidden}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")


@dataclass
class TrainOutcome:
    net: MlpNetwork
    mse_trace: list[float]
    train_time_s: float

    @property
    def mse_train(self) -> float:
        return self.mse_trace[-1]


def encode_one_hot(label, m: int) -> np.ndarray:
    """One-hot rows for ``label`` (an int or an int array) over ``m`` classes."""
    labels = np.asarray(label)
    if labels.size and (labels.min() < 0 or labels.max() >= m):
        raise ValueError(f"labels must lie in [0, {m})")
    return np.eye(m)[labels]


def output_delta(o_k, t_k):
    return o_k * (1.0 - o_k) * (t_k - o_k)


def hidden_delta(o_h, downstream_weights, delta_out):
    """Error term for hidden unit(s).

    ``downstream_weights`` is the unit's outgoing weight vector, or the
    ``(n_hidden, n_out)`` matrix when ``o_h`` is a vector of hidden outputs.
    """
    downstream_weights = np.asarray(downstream_weights, dtype=np.float64)
    delta_out = np.asarray(delta_out, dtype=np.float64)
    if downstream_weights.shape[-1] != delta_out.shape[-1]:
        raise ValueError(
            f"{downstream_weights.shape[-1]} downstream weights for {delta_out.shape[-1]} deltas"
        )
    return o_h * (1.0 - o_h) * np.dot(downstream_weights, delta_out)


def apply_update(weight, delta_j, input_i, prev_update, eta: float, mu: float):
    """Momentum step; returns ``(new_weight, update)``."""
    update = eta * delta_j * input_i + mu * prev_update
    return weight + update, update


@dataclass
class BackpropScratch:
    delta_out: np.ndarray
    delta_hidden: np.ndarray
    # Previous update of every weight, same layout as the network's matrices.
    prev_hidden: np.ndarray
    prev_output: np.ndarray

    @classmethod
    def zeros(cls, net: MlpNetwork) -> BackpropScratch:
        return cls(
            delta_out=np.zeros(net.n_out),
            delta_hidden=np.zeros(net.n_hidden),
            prev_hidden=np.zeros_like(net.hidden_weights),
            prev_output=np.zeros_like(net.output_weights),
        )


def sgd_step(net: MlpNetwork, x, t, scratch: BackpropScratch, eta: float, mu: float,
             c: float = 1.0) -> None:
    """One per-sample update of ``net`` in place (plain numpy reference path)."""
    hidden, out = forward(net, x, c)
    scratch.delta_out = output_delta(out, np.asarray(t, dtype=np.float64))
    scratch.delta_hidden = hidden_delta(hidden, net.output_weights[:-1], scratch.delta_out)

    hidden_in = np.append(hidden, 1.0)
    net.output_weights, scratch.prev_output = apply_update(
        net.output_weights, scratch.delta_out[None, :], hidden_in[:, None],
        scratch.prev_output, eta, mu,
    )
    x_in = np.append(np.asarray(x, dtype=np.float64), 1.0)
    net.hidden_weights, scratch.prev_hidden = apply_update(
        net.hidden_weights, scratch.delta_hidden[None, :], x_in[:, None],
        scratch.prev_hidden, eta, mu,
    )


@njit(cache=True)
def _sgd_epoch(w, v, dw, dv, x, t, order, eta, mu, c):
    n_in = x.shape[1]
    n_hidden = w.shape[1]
    n_out = v.shape[1]
    h = np.empty(n_hidden)
    o = np.empty(n_out)
    dk = np.empty(n_out)
    dh = np.empty(n_hidden)
    for s in order:
        for j in range(n_hidden):
            acc = w[n_in, j]
            for i in range(n_in):
                acc += w[i, j] * x[s, i]
            h[j] = 1.0 / (1.0 + math.exp(-c * acc))
        for k in range(n_out):
            acc = v[n_hidden, k]
            for j in range(n_hidden):
                acc += v[j, k] * h[j]
            o[k] = 1.0 / (1.0 + math.exp(-c * acc))

        for k in range(n_out):
            dk[k] = o[k] * (1.0 - o[k]) * (t[s, k] - o[k])
        # uses the output weights from before this sample's update
        for j in range(n_hidden):
            acc = 0.0
            for k in range(n_out):
                acc += v[j, k] * dk[k]
            dh[j] = h[j] * (1.0 - h[j]) * acc

        for j in range(n_hidden + 1):
            inp = h[j] if j < n_hidden else 1.0
            for k in range(n_out):
                upd = eta * dk[k] * inp + mu * dv[j, k]
                v[j, k] += upd
                dv[j, k] = upd
        for i in range(n_in + 1):
            inp = x[s, i] if i < n_in else 1.0
            for j in range(n_hidden):
                upd = eta * dh[j] * inp + mu * dw[i, j]
                w[i, j] += upd
                dw[i, j] = upd


def mse(net: MlpNetwork, inputs: np.ndarray, targets: np.ndarray, c: float = 1.0) -> float:
    """Summed squared output error, averaged over examples."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if inputs.shape[0] == 0:
        raise ValueError("mse of an empty example set")
    if targets.shape != (inputs.shape[0], net.n_out):
        raise ValueError(f"targets have shape {targets.shape}, expected "
                         f"{(inputs.shape[0], net.n_out)}")
    out = forward_batch(net, inputs, c).output
    return float(np.mean(np.sum((targets - out) ** 2, axis=1)))


def train(dataset: Dataset, indices, config: TrainConfig,
          rng: np.random.Generator | None = None, *, compiled: bool = True) -> TrainOutcome:
    """Train a fresh network on ``dataset[indices]`` for ``config.epochs`` epochs.

    Weights come from ``init_weights`` and every epoch visits the training
    examples in a new random order drawn from ``rng`` (seeded from
    ``config.seed`` when omitted). The MSE over the training examples is
    recorded after each epoch. ``compiled=False`` runs the numpy reference
    step instead of the numba kernel; both follow the same arithmetic.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("empty training set")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    x = np.ascontiguousarray(dataset.features[indices], dtype=np.float64)
    t = encode_one_hot(dataset.labels[indices], dataset.m)

    start = time.perf_counter()
    net = init_weights(dataset.d, config.n_hidden, dataset.m, rng)
    scratch = BackpropScratch.zeros(net)
    trace = []
    for _ in range(config.epochs):
        order = rng.permutation(len(indices))
        if compiled:
            _sgd_epoch(net.hidden_weights, net.output_weights,
                       scratch.prev_hidden, scratch.prev_output,
                       x, t, order, config.eta, config.mu, config.c)
        else:
            for s in order:
                sgd_step(net, x[s], t[s], scratch, config.eta, config.mu, config.c)
        trace.append(mse(net, x, t, config.c))
    elapsed = time.perf_counter() - start
    return TrainOutcome(net=net, mse_trace=trace, train_time_s=elapsed)
