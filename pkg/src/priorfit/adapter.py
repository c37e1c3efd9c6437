"""The trainable head over frozen embeddings.

A small fully connected network with ReLU hidden layers and either a
single linear output (regression) or a softmax row (classification).
Everything runs in float64; forward caches activations so backward can
produce exact gradients for whatever scalar loss supplied the output
gradient.
"""

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DataError, NumericalError

HEAD_REGRESSION = "regression"
HEAD_CLASSIFICATION = "classification"

MODEL_MAGIC = b"PFAD"
MODEL_VERSION = 1
_HEAD_CODES = {HEAD_REGRESSION: 0, HEAD_CLASSIFICATION: 1}
_HEAD_NAMES = {code: name for name, code in _HEAD_CODES.items()}


@dataclass
class Adapter:
    dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    head: str

    @property
    def out_dim(self):
        return self.dims[-1]

    def parameters(self):
        """Flat parameter list, weights and biases interleaved per layer."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params


@dataclass
class ForwardCache:
    inputs: list  # input to each layer
    preacts: list  # pre-activation of each layer
    probs: np.ndarray | None  # softmax output, classification only


def init_adapter(dims, head, seed, output_bias=0.0):
    """Deterministically initialize an adapter.

    Weights are uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
    For a regression head the output bias is set to ``output_bias``
    (callers pass the prior mean so early predictions start near it).
    """
    dims = [int(x) for x in dims]
    if len(dims) < 2 or any(x < 1 for x in dims):
        raise ConfigError(f"layer dims must be >= 2 positive integers, got {dims}")
    if head not in _HEAD_CODES:
        raise ConfigError(f"unknown head {head!r}")
    if head == HEAD_REGRESSION and dims[-1] != 1:
        raise ConfigError(f"regression head requires a single output, got {dims[-1]}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    if head == HEAD_REGRESSION:
        biases[-1][0] = output_bias
    return Adapter(dims=dims, weights=weights, biases=biases, head=head)


def forward(adapter, batch):
    """Run the network on a B x d batch. Returns (output, cache).

    Classification output rows are softmax probabilities; regression
    output has shape B x 1.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != adapter.dims[0]:
        raise ConfigError(
            f"batch shape {batch.shape} does not match input dimension {adapter.dims[0]}"
        )
    inputs, preacts = [], []
    h = batch
    last = len(adapter.weights) - 1
    for i, (w, b) in enumerate(zip(adapter.weights, adapter.biases)):
        inputs.append(h)
        z = h @ w + b
        preacts.append(z)
        h = kernels.relu(z) if i < last else z
    probs = None
    if adapter.head == HEAD_CLASSIFICATION:
        probs = kernels.softmax_rows(h)
        out = probs
    else:
        out = h
    return out, ForwardCache(inputs=inputs, preacts=preacts, probs=probs)


def backward(adapter, cache, grad_out):
    """Exact parameter gradients for the loss whose output grad is given.

    ``grad_out`` is the gradient with respect to forward's output: the
    softmax probabilities for classification, the raw B x 1 output for
    regression. Returns gradients aligned with ``adapter.parameters()``.
    """
    n_layers = len(adapter.weights)
    if cache is None or len(cache.inputs) != n_layers or len(cache.preacts) != n_layers:
        raise ConfigError("stale or missing forward cache")
    grad_out = np.asarray(grad_out, dtype=np.float64)
    batch = cache.inputs[0].shape[0]
    if grad_out.shape != (batch, adapter.dims[-1]):
        raise ConfigError(
            f"grad_out shape {grad_out.shape} does not match output ({batch}, {adapter.dims[-1]})"
        )
    if adapter.head == HEAD_CLASSIFICATION:
        if cache.probs is None or cache.probs.shape != grad_out.shape:
            raise ConfigError("stale or missing forward cache")
        grad = kernels.softmax_grad_rows(cache.probs, grad_out)
    else:
        grad = grad_out
    grad_weights = [None] * n_layers
    grad_biases = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        if cache.inputs[i].shape != (batch, adapter.dims[i]):
            raise ConfigError("stale or missing forward cache")
        grad_weights[i] = cache.inputs[i].T @ grad
        grad_biases[i] = grad.sum(axis=0)
        if i > 0:
            grad = kernels.relu_grad(cache.preacts[i - 1], grad @ adapter.weights[i].T)
    grads = []
    for gw, gb in zip(grad_weights, grad_biases):
        grads.append(gw)
        grads.append(gb)
    return grads


@dataclass
class AdamState:
    m: list
    v: list
    t: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0


def init_adam_state(adapter, lr, weight_decay=0.0):
    if lr <= 0.0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    params = adapter.parameters()
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        t=0,
        lr=lr,
        weight_decay=weight_decay,
    )


def adam_step(adapter, state, grads):
    """Apply one Adam update with bias correction and decoupled decay."""
    params = adapter.parameters()
    if len(grads) != len(params):
        raise ConfigError(f"got {len(grads)} gradients for {len(params)} parameters")
    for i, g in enumerate(grads):
        if g.shape != params[i].shape:
            raise ConfigError(f"gradient {i} shape {g.shape} != parameter shape {params[i].shape}")
        if not np.isfinite(g).all():
            raise NumericalError(f"non-finite gradient for parameter {i} (step {state.t + 1})")
    state.t += 1
    for p, g, m, v in zip(params, grads, state.m, state.v):
        kernels.adam_update(
            p, g, m, v, state.t, state.lr, state.beta1, state.beta2, state.eps, state.weight_decay
        )


@dataclass
class LrSchedule:
    """Step decay: base_lr * decay ** floor(epoch / period)."""

    base_lr: float = 1e-3
    decay: float = 0.3
    period: int = 10


def lr_at(schedule, epoch):
    if epoch < 0:
        raise ConfigError(f"epoch must be >= 0, got {epoch}")
    return schedule.base_lr * schedule.decay ** (epoch // schedule.period)


def save_adapter(adapter, path):
    """Write a `.pfad` model file (little-endian, float64, bit-exact)."""
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<IB", MODEL_VERSION, _HEAD_CODES[adapter.head]))
        fh.write(struct.pack("<I", len(adapter.dims)))
        fh.write(struct.pack(f"<{len(adapter.dims)}I", *adapter.dims))
        for w, b in zip(adapter.weights, adapter.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_adapter(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MODEL_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, expected {MODEL_MAGIC!r}")
        version, head_code = struct.unpack("<IB", fh.read(5))
        if version != MODEL_VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        if head_code not in _HEAD_NAMES:
            raise DataError(f"{path}: unknown head code {head_code}")
        (n_dims,) = struct.unpack("<I", fh.read(4))
        dims = list(struct.unpack(f"<{n_dims}I", fh.read(4 * n_dims)))
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            w = np.frombuffer(fh.read(8 * fan_in * fan_out), dtype="<f8")
            if w.size != fan_in * fan_out:
                raise DataError(f"{path}: truncated weight block")
            weights.append(w.reshape(fan_in, fan_out).astype(np.float64))
            b = np.frombuffer(fh.read(8 * fan_out), dtype="<f8")
            if b.size != fan_out:
                raise DataError(f"{path}: truncated bias block")
            biases.append(b.astype(np.float64))
        if fh.read(1):
            raise DataError(f"{path}: trailing data after parameters")
    return Adapter(dims=dims, weights=weights, biases=biases, head=_HEAD_NAMES[head_code])
