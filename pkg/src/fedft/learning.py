"""Local learners: multinomial logistic regression and a ReLU MLP.

Both are stacks of dense layers named ``layer{i}.weight`` / ``layer{i}.bias``
(weights are ``[fan_in, fan_out]``); MLR is the zero-hidden-layer case.
Training is plain mini-batch SGD on mean softmax cross-entropy, with an
optional proximal term ``mu/2 * ||w - anchor||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .tensor import ModelParams, SeedSpec

__all__ = [
    "LearnerSpec",
    "init_params",
    "forward_loss",
    "loss_and_grad",
    "local_update_sgd",
    "local_update_prox",
    "evaluate",
]


@dataclass(frozen=True)
class LearnerSpec:
    input_dim: int
    num_classes: int
    architecture: str = "mlr"
    hidden: tuple[int, ...] = field(default_factory=tuple)
    learning_rate: float = 0.03
    local_epochs: int = 20
    batch_size: int | None = None  # None: full batch up to 64 samples, else 10
    proximal_mu: float = 0.0
    init_stddev: float = 0.05

    def __post_init__(self):
        arch = self.architecture.lower()
        object.__setattr__(self, "architecture", arch)
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if arch not in ("mlr", "mlp"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if arch == "mlr" and self.hidden:
            raise ValueError("MLR takes no hidden layers")
        if arch == "mlp" and not self.hidden:
            raise ValueError("MLP needs at least one hidden layer")
        if self.input_dim <= 0 or self.num_classes <= 0 or any(h <= 0 for h in self.hidden):
            raise ValueError("layer sizes must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.local_epochs <= 0:
            raise ValueError("local_epochs must be positive")
        if self.batch_size is not None and self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.proximal_mu < 0:
            raise ValueError("proximal_mu must be non-negative")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden, self.num_classes]

    def effective_batch(self, n: int) -> int:
        if self.batch_size is not None:
            return min(self.batch_size, n)
        return n if n <= 64 else 10


def init_params(spec: LearnerSpec, seed=0) -> ModelParams:
    """Zeros for MLR; Normal(0, init_stddev) weights and zero biases for MLP."""
    sizes = spec.layer_sizes
    rng = seed if isinstance(seed, np.random.Generator) else SeedSpec(seed).rng("init")
    entries = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        if spec.architecture == "mlr":
            w = np.zeros((fan_in, fan_out))
        else:
            w = spec.init_stddev * rng.standard_normal((fan_in, fan_out))
        entries.append((f"layer{i}.weight", w))
        entries.append((f"layer{i}.bias", np.zeros(fan_out)))
    return ModelParams(entries)


def _layers(arrays):
    if len(arrays) % 2:
        raise ShapeError("parameters must come in weight/bias pairs")
    return [(arrays[i], arrays[i + 1]) for i in range(0, len(arrays), 2)]


def _forward(layers, x):
    acts = [x]
    h = x
    for i, (w, b) in enumerate(layers):
        z = h @ w + b
        if i < len(layers) - 1:
            h = np.maximum(z, 0.0)
            acts.append(h)
        else:
            h = z
    return h, acts


def _check_batch(layers, x, y):
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("batch must be a non-empty [n, d] matrix")
    if x.shape[1] != layers[0][0].shape[0]:
        raise ShapeError(f"feature dim {x.shape[1]} != model input dim {layers[0][0].shape[0]}")
    if y.shape != (x.shape[0],):
        raise ShapeError("labels must be a vector with one entry per sample")
    if y.min() < 0 or y.max() >= layers[-1][0].shape[1]:
        raise ShapeError("label out of range for model output")


def _softmax_xent(logits, y):
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_p = shifted - log_z[:, None]
    loss = -log_p[np.arange(len(y)), y].mean()
    return loss, log_p


def forward_loss(params: ModelParams, x, y) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and argmax predictions on one batch."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    layers = _layers(params.arrays)
    _check_batch(layers, x, y)
    logits, _ = _forward(layers, x)
    loss, _ = _softmax_xent(logits, y)
    return float(loss), logits.argmax(axis=1)


def _grad(arrays, x, y, mu=0.0, anchor=None):
    layers = _layers(arrays)
    logits, acts = _forward(layers, x)
    loss, log_p = _softmax_xent(logits, y)
    delta = np.exp(log_p)
    delta[np.arange(len(y)), y] -= 1.0
    delta /= len(y)
    grads = [None] * len(arrays)
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads[2 * i] = acts[i].T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ w.T) * (acts[i] > 0)
    if mu:
        for j, (g, a, c) in enumerate(zip(grads, arrays, anchor)):
            diff = a - c
            grads[j] = g + mu * diff
            loss += 0.5 * mu * float(np.sum(diff * diff))
    return float(loss), grads


def loss_and_grad(params: ModelParams, x, y, mu: float = 0.0,
                  anchor: ModelParams | None = None) -> tuple[float, ModelParams]:
    """Objective value and analytic gradient (proximal term included if ``mu``)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _check_batch(_layers(params.arrays), x, y)
    if mu:
        if anchor is None:
            raise ValueError("proximal term needs an anchor model")
        params.check_compatible(anchor)
    loss, grads = _grad(params.arrays, x, y, mu, anchor.arrays if mu else None)
    return loss, ModelParams(zip(params.names, grads))


def _train(params, shard, spec, seed, mu, anchor):
    x = np.asarray(shard.train_x, dtype=np.float64)
    y = np.asarray(shard.train_y, dtype=np.int64)
    n = len(y)
    if n == 0:
        raise ValueError(f"client {shard.client_id!r} has no training samples")
    _check_batch(_layers(params.arrays), x, y)
    rng = seed if isinstance(seed, np.random.Generator) else SeedSpec(seed).rng("local")
    batch = spec.effective_batch(n)
    lr = spec.learning_rate
    arrays = [a.copy() for a in params.arrays]
    anchor_arrays = anchor.arrays if mu else None
    for _ in range(spec.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            _, grads = _grad(arrays, x[idx], y[idx], mu, anchor_arrays)
            for a, g in zip(arrays, grads):
                a -= lr * g
    return ModelParams(zip(params.names, arrays))


def local_update_sgd(params: ModelParams, shard, spec: LearnerSpec, seed=0) -> ModelParams:
    """``local_epochs`` passes of shuffled mini-batch SGD on the shard's train split."""
    return _train(params, shard, spec, seed, 0.0, None)


def local_update_prox(params: ModelParams, global_params: ModelParams, shard,
                      spec: LearnerSpec, seed=0) -> ModelParams:
    """SGD on ``F_k(w) + mu/2 ||w - global_params||^2`` with ``mu = spec.proximal_mu``.

    With ``mu == 0`` the trajectory is identical to :func:`local_update_sgd`.
    """
    params.check_compatible(global_params)
    return _train(params, shard, spec, seed, spec.proximal_mu, global_params)


def evaluate(params: ModelParams, shards) -> tuple[float, list[tuple[str, float, int]]]:
    """Test accuracy per client and their mean weighted by test-set size."""
    layers = _layers(params.arrays)
    per_client = []
    correct = total = 0
    for shard in shards:
        n = len(shard.test_y)
        if n == 0:
            raise ValueError(f"client {shard.client_id!r} has an empty test set")
        logits, _ = _forward(layers, np.asarray(shard.test_x, dtype=np.float64))
        hits = int(np.sum(logits.argmax(axis=1) == shard.test_y))
        per_client.append((shard.client_id, hits / n, n))
        correct += hits
        total += n
    if total == 0:
        raise ValueError("no shards to evaluate")
    return correct / total, per_client
