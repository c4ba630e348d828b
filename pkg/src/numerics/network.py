"""
Feed-forward ReLU classifier with explicit backpropagation.

Weights are stored as (in, out) matrices so a batch flows as ``h = x @ W + b``.
All arithmetic is float64. The ReLU subgradient at 0 is 0.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import numpy.typing as npt

from shared.errors import ShapeError

Matrix = npt.NDArray[np.float64]


@dataclass
class ParameterSet:
    weights: List[Matrix]
    biases: List[Matrix]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeError(f"need one bias per weight matrix, got {len(self.weights)} weights and {len(self.biases)} biases")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"layer {k}: weight {w.shape} incompatible with bias {b.shape}")
            if k > 0 and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ShapeError(f"layer {k}: input dim {w.shape[0]} != previous output dim {self.weights[k - 1].shape[1]}")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "ParameterSet":
        return ParameterSet([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def ravel(self) -> Matrix:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])

    def with_flat(self, flat: Matrix) -> "ParameterSet":
        if flat.size != self.ravel().size:
            raise ShapeError(f"flat vector of size {flat.size} does not match {self.ravel().size} parameters")
        weights, biases, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(flat[pos:pos + w.size].reshape(w.shape).copy())
            pos += w.size
            biases.append(flat[pos:pos + b.size].reshape(b.shape).copy())
            pos += b.size
        return ParameterSet(weights, biases)

    def same_shape(self, other: "ParameterSet | Gradient") -> bool:
        return [w.shape for w in self.weights] == [w.shape for w in other.weights] and [
            b.shape for b in self.biases
        ] == [b.shape for b in other.biases]


# Same layout as ParameterSet; also used for the optimizer's momentum buffers.
@dataclass
class Gradient:
    weights: List[Matrix]
    biases: List[Matrix]

    @classmethod
    def zeros_like(cls, params: ParameterSet) -> "Gradient":
        return cls([np.zeros_like(w) for w in params.weights], [np.zeros_like(b) for b in params.biases])

    def ravel(self) -> Matrix:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])

    def is_zero(self) -> bool:
        return all(not np.any(a) for a in (*self.weights, *self.biases))


@dataclass
class ForwardCache:
    inputs: Matrix
    pre_activations: List[Matrix]
    activations: List[Matrix]
    logits: Matrix


def init_params(layer_sizes: Sequence[int], rng: np.random.Generator) -> ParameterSet:
    """He-normal weights, zero biases."""
    if len(layer_sizes) < 2:
        raise ShapeError(f"need at least input and output sizes, got {list(layer_sizes)}")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ParameterSet(weights, biases)


def _check_batch(params: ParameterSet, batch: Matrix) -> Matrix:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != params.input_dim:
        raise ShapeError(f"batch shape {batch.shape} does not match network input (B, {params.input_dim})")
    return batch


def relu(x: Matrix) -> Matrix:
    return np.maximum(x, 0.0)


def forward_cached(params: ParameterSet, batch: Matrix) -> ForwardCache:
    x = _check_batch(params, batch)
    pre, act = [], [x]
    h = x
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if k == last:
            return ForwardCache(inputs=x, pre_activations=pre, activations=act, logits=z)
        pre.append(z)
        h = relu(z)
        act.append(h)
    raise AssertionError("unreachable")


def forward(params: ParameterSet, batch: Matrix) -> Matrix:
    return forward_cached(params, batch).logits


def softmax(logits: Matrix) -> Matrix:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _check_labels(labels, batch_size: int, num_classes: int) -> npt.NDArray[np.int64]:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (batch_size,):
        raise ShapeError(f"labels shape {labels.shape} does not match batch size {batch_size}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes}), got range [{labels.min()}, {labels.max()}]")
    return labels


def cross_entropy(logits: Matrix, labels) -> Matrix:
    """Per-sample -log softmax(logits)[label], computed with max subtraction."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2:
        raise ShapeError(f"logits must be 2-D, got shape {logits.shape}")
    labels = _check_labels(labels, logits.shape[0], logits.shape[1])
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return log_norm - shifted[np.arange(len(labels)), labels]


def backward_from_cache(params: ParameterSet, cache: ForwardCache, labels, sample_weights) -> Gradient:
    """Gradient of (1/B) * sum_i w_i * loss_i for a cached forward pass."""
    batch_size = cache.inputs.shape[0]
    labels = _check_labels(labels, batch_size, params.num_classes)
    w = np.asarray(sample_weights, dtype=np.float64)
    if w.shape != (batch_size,):
        raise ShapeError(f"sample_weights shape {w.shape} does not match batch size {batch_size}")
    if w.size and (w.min() < 0.0 or w.max() > 1.0):
        raise ValueError("sample weights must lie in [0, 1]")

    delta = softmax(cache.logits)
    delta[np.arange(batch_size), labels] -= 1.0
    delta *= (w / batch_size)[:, None]

    n_layers = len(params.weights)
    grad_w: List[Matrix] = [np.empty(0)] * n_layers
    grad_b: List[Matrix] = [np.empty(0)] * n_layers
    for k in range(n_layers - 1, -1, -1):
        grad_w[k] = cache.activations[k].T @ delta
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params.weights[k].T) * (cache.pre_activations[k - 1] > 0.0)
    return Gradient(grad_w, grad_b)


def backward(params: ParameterSet, batch: Matrix, labels, sample_weights) -> Gradient:
    return backward_from_cache(params, forward_cached(params, batch), labels, sample_weights)


def predict(params: ParameterSet, batch: Matrix) -> npt.NDArray[np.int64]:
    return np.argmax(forward(params, batch), axis=1)
