"""Feedforward ReLU network with a softmax output, trained by mini-batch SGD.

Parameters are stored per layer pair as ``W`` with shape ``(fan_out, fan_in)``
and ``b`` with shape ``(fan_out,)``, so a layer maps ``h -> h @ W.T + b``.
The training loss is the mean cross-entropy ``-log p[label]``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .rng import make_rng

DEFAULT_HIDDEN = (68, 32)


class NumericError(ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        super().__init__(f"non-finite training loss {loss} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class NetArch:
    layer_sizes: tuple = (136,) + DEFAULT_HIDDEN + (8,)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"invalid layer sizes {self.layer_sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @classmethod
    def for_data(cls, n_features, n_classes, hidden=DEFAULT_HIDDEN):
        return cls((n_features, *hidden, n_classes))

    @property
    def n_inputs(self):
        return self.layer_sizes[0]

    @property
    def n_outputs(self):
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True, eq=False)
class NetModel:
    weights: tuple
    biases: tuple
    arch: NetArch
    loss_trace: tuple = field(default=())

    def __eq__(self, other):
        if not isinstance(other, NetModel):
            return NotImplemented
        return (self.arch == other.arch
                and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))

    def forward(self, X):
        return net_forward(self, X)

    def predict(self, X):
        return np.argmax(net_forward(self, X), axis=-1)

    def to_dict(self):
        return {
            "layer_sizes": list(self.arch.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, doc):
        arch = NetArch(tuple(doc["layer_sizes"]))
        sizes = arch.layer_sizes
        weights = tuple(np.asarray(w, dtype=np.float64).reshape(o, i)
                        for w, i, o in zip(doc["weights"], sizes[:-1], sizes[1:]))
        biases = tuple(np.asarray(b, dtype=np.float64).reshape(o)
                       for b, o in zip(doc["biases"], sizes[1:]))
        return cls(weights, biases, arch)


def net_init(arch: NetArch, seed=0) -> NetModel:
    """He initialisation: ``W ~ N(0, 2 / fan_in)``, zero biases."""
    rng = make_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(arch.layer_sizes[:-1], arch.layer_sizes[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * math.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return NetModel(tuple(weights), tuple(biases), arch)


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def relu(x):
    return np.maximum(x, 0.0)


def _as_batch(m: NetModel, X):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != m.arch.n_inputs:
        raise ValueError(f"expected {m.arch.n_inputs} inputs, got shape {X.shape}")
    return X, single


def _logits(m, X):
    """Output-layer logits plus the post-activation of every layer."""
    acts = [X]
    h = X
    last = len(m.weights) - 1
    for i, (W, b) in enumerate(zip(m.weights, m.biases)):
        z = h @ W.T + b
        if i == last:
            return z, acts
        h = relu(z)
        acts.append(h)


def net_forward(m: NetModel, X):
    X, single = _as_batch(m, X)
    z, _ = _logits(m, X)
    p = softmax(z)
    return p[0] if single else p


def cross_entropy(m: NetModel, X, y) -> float:
    X, _ = _as_batch(m, X)
    z, _ = _logits(m, X)
    return _mean_ce(z, np.asarray(y, dtype=np.int64))


def _mean_ce(z, y):
    zmax = z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z - zmax).sum(axis=1)) + zmax[:, 0]
    return float(np.mean(logsum - z[np.arange(z.shape[0]), y]))


def _backprop(m, X, y):
    z, acts = _logits(m, X)
    loss = _mean_ce(z, y)
    n = X.shape[0]
    delta = softmax(z)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gw = [None] * len(m.weights)
    gb = [None] * len(m.weights)
    for i in range(len(m.weights) - 1, -1, -1):
        gw[i] = delta.T @ acts[i]
        gb[i] = delta.sum(axis=0)
        if i:
            # ReLU derivative is 0 at exactly 0
            delta = (delta @ m.weights[i]) * (acts[i] > 0)
    return loss, tuple(gw), tuple(gb)


def net_gradients(m: NetModel, X, y):
    """Analytic gradients of the mean cross-entropy over a batch.

    Returns ``(weight_grads, bias_grads)`` shaped like ``m.weights`` and
    ``m.biases``.
    """
    X, _ = _as_batch(m, X)
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X.shape[0],) or X.shape[0] == 0:
        raise ValueError("need a nonempty batch with one label per row")
    if y.min() < 0 or y.max() >= m.arch.n_outputs:
        raise ValueError("label outside the output layer")
    _, gw, gb = _backprop(m, X, y)
    return gw, gb


def net_train(m: NetModel, train: Dataset, cfg: TrainConfig = TrainConfig()) -> NetModel:
    """Plain mini-batch SGD; returns a new model carrying the loss trace.

    The trace entry for an epoch is the sample-weighted mean of the batch
    losses seen during that epoch (each measured before its update).
    """
    if len(train) == 0:
        raise ValueError("cannot train on an empty dataset")
    X, _ = _as_batch(m, train.features)
    y = train.labels
    if train.n_classes > m.arch.n_outputs:
        raise ValueError(f"{train.n_classes} classes but {m.arch.n_outputs} outputs")
    weights = [w.copy() for w in m.weights]
    biases = [b.copy() for b in m.biases]
    work = NetModel(weights, biases, m.arch)
    rng = make_rng(cfg.seed)
    n = X.shape[0]
    lr = cfg.learning_rate
    trace = []
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = perm[start:start + cfg.batch_size]
            with np.errstate(over="ignore", invalid="ignore"):
                loss, gw, gb = _backprop(work, X[batch], y[batch])
            if not math.isfinite(loss):
                raise NumericError(epoch, loss)
            total += loss * batch.size
            for W, b, dW, db in zip(weights, biases, gw, gb):
                W -= lr * dW
                b -= lr * db
        trace.append(total / n)
    return NetModel(tuple(weights), tuple(biases), m.arch, tuple(trace))


def net_predict(m: NetModel, x) -> int:
    return int(np.argmax(net_forward(m, x)))
