"""Fully-connected ReLU classifier with hand-written backpropagation.

All parameters live in one contiguous float64 vector. Canonical order: layer 0
weights (shape (in, out), row-major), layer 0 biases, layer 1 weights, ...
Weight and bias arrays are views into that vector, so flattening is free and
an SGD step is a single vector update.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

DEFAULT_LAYER_SIZES = (784, 256, 128, 10)


def param_count(layer_sizes):
    return sum(i * o + o for i, o in zip(layer_sizes[:-1], layer_sizes[1:]))


def _views(flat, layer_sizes):
    weights, biases, off = [], [], 0
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(flat[off:off + fan_in * fan_out].reshape(fan_in, fan_out))
        off += fan_in * fan_out
        biases.append(flat[off:off + fan_out])
        off += fan_out
    return weights, biases


class MLP:
    """ReLU on hidden layers, identity on the output layer."""

    def __init__(self, layer_sizes, params=None):
        layer_sizes = tuple(int(s) for s in layer_sizes)
        if len(layer_sizes) < 2 or min(layer_sizes) < 1:
            raise ValueError(f"invalid layer sizes {layer_sizes}")
        self.layer_sizes = layer_sizes
        n = param_count(layer_sizes)
        self.params = np.zeros(n) if params is None else np.array(params, dtype=np.float64)
        if self.params.shape != (n,):
            raise ShapeError(f"expected {n} parameters, got {self.params.shape}")
        self.weights, self.biases = _views(self.params, layer_sizes)

    @classmethod
    def init(cls, layer_sizes, rng):
        """He-normal weights (variance 2 / fan_in), zero biases."""
        model = cls(layer_sizes)
        for w in model.weights:
            w[...] = rng.standard_normal(w.shape) * np.sqrt(2.0 / w.shape[0])
        return model

    @property
    def n_params(self):
        return len(self.params)

    @property
    def n_layers(self):
        return len(self.weights)

    def copy(self):
        return MLP(self.layer_sizes, self.params)

    def flat_params(self):
        return self.params.copy()

    def set_flat_params(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.params.shape:
            raise ShapeError(f"expected {self.params.shape} parameters, got {values.shape}")
        self.params[...] = values

    def _input(self, batch):
        x = np.asarray(batch, dtype=np.float64)
        x = x.reshape(len(x), -1)
        if x.shape[1] != self.layer_sizes[0]:
            raise ShapeError(f"batch width {x.shape[1]} != input size {self.layer_sizes[0]}")
        return x

    def forward(self, batch):
        """Return (logits, trace); trace[l] is the post-activation output of layer l."""
        h = self._input(batch)
        trace = []
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if l < self.n_layers - 1:
                h = np.maximum(h, 0.0)
            trace.append(h)
        return h, trace

    def logits(self, batch):
        return self.forward(batch)[0]

    def loss_and_grad(self, batch, labels):
        """Mean softmax cross-entropy and its exact gradient (canonical flat order)."""
        x = self._input(batch)
        labels = np.asarray(labels, dtype=np.intp)
        acts = [x]
        h = x
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if l < self.n_layers - 1:
                h = np.maximum(h, 0.0)
            acts.append(h)
        logits = acts[-1]
        m = len(x)
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        rows = np.arange(m)
        loss = float(np.mean(log_z - shifted[rows, labels]))

        grad = np.empty_like(self.params)
        g_w, g_b = _views(grad, self.layer_sizes)
        delta = np.exp(shifted - log_z[:, None])
        delta[rows, labels] -= 1.0
        delta /= m
        for l in range(self.n_layers - 1, -1, -1):
            g_w[l][...] = acts[l].T @ delta
            g_b[l][...] = delta.sum(axis=0)
            if l:
                delta = (delta @ self.weights[l].T) * (acts[l] > 0)
        return loss, grad

    def loss(self, batch, labels):
        logits = self.logits(batch)
        labels = np.asarray(labels, dtype=np.intp)
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        return float(np.mean(log_z - shifted[np.arange(len(labels)), labels]))

    def sgd_step(self, grad, lr):
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.params.shape:
            raise ShapeError(f"gradient has {grad.shape}, model has {self.params.shape}")
        if lr < 0:
            raise ValueError(f"learning rate must be >= 0, got {lr}")
        self.params -= lr * grad

    def predict(self, images, chunk=4096):
        """Argmax class per sample; ties go to the lowest class index."""
        images = np.asarray(images)
        out = [np.argmax(self.logits(images[i:i + chunk]), axis=1)
               for i in range(0, len(images), chunk)]
        return np.concatenate(out) if out else np.empty(0, dtype=np.intp)


@dataclass
class GradientVector:
    """Flat gradient plus free-form provenance (augmentation, batch id, ...)."""

    values: np.ndarray
    tag: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self):
        return len(self.values)


def accuracy(model, dataset):
    """Fraction of argmax predictions matching labels."""
    if len(dataset) == 0:
        raise ValueError("accuracy of an empty dataset is undefined")
    return float(np.mean(model.predict(dataset.images) == dataset.labels))
