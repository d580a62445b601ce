#!/usr/bin/python
# coding: utf8

"""Dense feed-forward classifier with tanh hidden layers and reverse accumulation."""

import collections
import logging

import numpy as np
from scipy.special import log_softmax, softmax

from .helper import make_rng, split_range
from .models import Model, make_dataset


logger = logging.getLogger(__name__)

SOFTMAX = "softmax"
LINEAR = "linear"
OUTPUTS = (SOFTMAX, LINEAR)

Gradients = collections.namedtuple("Gradients", ["weights", "biases"])
TrainConfig = collections.namedtuple("TrainConfig", ["learning_rate", "epochs", "batch_size", "seed"])
TrainResult = collections.namedtuple("TrainResult", ["net", "loss_trace"])


def make_train_config(learning_rate=0.5, epochs=2000, batch_size=4, seed=7):
    if not learning_rate > 0:
        raise ValueError("learning rate must be positive, got {}".format(learning_rate))
    if int(epochs) != epochs or epochs < 1:
        raise ValueError("epochs must be a positive integer, got {}".format(epochs))
    if int(batch_size) != batch_size or batch_size < 1:
        raise ValueError("batch size must be a positive integer, got {}".format(batch_size))
    return TrainConfig(float(learning_rate), int(epochs), int(batch_size), int(seed))


class DenseNet(Model):
    def __init__(self, weights, biases, output=SOFTMAX):
        self._setup(weights, biases, output)

    def _setup(self, weights, biases, output):
        if output not in OUTPUTS:
            raise ValueError("unknown output kind {!r}".format(output))
        weights = [np.array(w, dtype=float, ndmin=2) for w in weights]
        biases = [np.array(b, dtype=float).reshape(-1) for b in biases]
        if not weights or len(weights) != len(biases):
            raise ValueError("{} weight matrices and {} bias vectors".format(len(weights), len(biases)))
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape[0] != b.shape[0]:
                raise ValueError("layer {}: {} outputs but {} biases".format(i, w.shape[0], b.shape[0]))
            if i > 0 and w.shape[1] != weights[i - 1].shape[0]:
                raise ValueError("layer {} expects {} inputs, previous layer gives {}".format(
                    i, w.shape[1], weights[i - 1].shape[0]))
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("layer {} has non-finite parameters".format(i))
        self.weights = weights
        self.biases = biases
        self.output = output

    @classmethod
    def initialize(cls, layer_sizes, seed, output=SOFTMAX):
        """Uniform weights in +-1/sqrt(fan_in), zero biases."""
        layer_sizes = [int(s) for s in layer_sizes]
        if len(layer_sizes) < 2 or min(layer_sizes) < 1:
            raise ValueError("need at least two positive layer sizes, got {}".format(layer_sizes))
        rng = make_rng(seed)
        weights = []
        biases = []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            limit = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, output)

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_dim(self):
        return self.weights[0].shape[1]

    @property
    def output_dim(self):
        return self.weights[-1].shape[0]

    def copy(self):
        return DenseNet([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.output)

    def _inputs(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        batch = np.atleast_2d(x)
        if batch.ndim != 2 or batch.shape[1] != self.input_dim:
            raise ValueError("input dimension {} does not match net input {}".format(x.shape, self.input_dim))
        if not np.all(np.isfinite(batch)):
            raise ValueError("inputs must be finite")
        return batch, single

    def _propagate(self, batch):
        """Activations of every layer (input first) and the output pre-activation."""
        activations = [batch]
        a = batch
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.tanh(a.dot(w.T) + b)
            activations.append(a)
        logits = a.dot(self.weights[-1].T) + self.biases[-1]
        return activations, logits

    def _backward(self, activations, delta):
        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.weights)
        for layer in reversed(range(len(self.weights))):
            grad_w[layer] = delta.T.dot(activations[layer])
            grad_b[layer] = delta.sum(axis=0)
            upstream = delta.dot(self.weights[layer])
            if layer > 0:
                delta = upstream * (1.0 - activations[layer] ** 2)
        return upstream, Gradients(grad_w, grad_b)

    def forward(self, x):
        """Class probabilities (softmax output) or raw outputs (linear output)."""
        batch, single = self._inputs(x)
        _, logits = self._propagate(batch)
        out = softmax(logits, axis=1) if self.output == SOFTMAX else logits
        return out[0] if single else out

    def log_probability(self, x, c):
        batch, single = self._inputs(x)
        self._check_class(c)
        _, logits = self._propagate(batch)
        out = log_softmax(logits, axis=1)[:, c]
        return float(out[0]) if single else out

    def predict(self, x):
        out = np.argmax(self.forward(x), axis=-1)
        return int(out) if np.ndim(out) == 0 else out

    def _check_class(self, c):
        if self.output != SOFTMAX:
            raise ValueError("class probabilities need a softmax output")
        if not 0 <= c < self.output_dim:
            raise ValueError("class {} not in [0, {})".format(c, self.output_dim))

    def loss(self, inputs, labels):
        """Mean cross-entropy."""
        batch, _ = self._inputs(inputs)
        labels = self._labels(labels, batch.shape[0])
        _, logits = self._propagate(batch)
        return float(-np.mean(log_softmax(logits, axis=1)[np.arange(batch.shape[0]), labels]))

    def _labels(self, labels, count):
        labels = np.asarray(labels, dtype=int).reshape(-1)
        if labels.shape[0] != count:
            raise ValueError("{} labels for {} inputs".format(labels.shape[0], count))
        if np.any(labels < 0) or np.any(labels >= self.output_dim):
            raise ValueError("labels must lie in [0, {}), got {}".format(self.output_dim, labels.tolist()))
        return labels

    def param_gradients(self, inputs, labels):
        """Gradients of the mean cross-entropy with respect to weights and biases."""
        if self.output != SOFTMAX:
            raise ValueError("cross-entropy gradients need a softmax output")
        batch, _ = self._inputs(inputs)
        labels = self._labels(labels, batch.shape[0])
        activations, logits = self._propagate(batch)
        delta = softmax(logits, axis=1)
        delta[np.arange(batch.shape[0]), labels] -= 1.0
        _, grads = self._backward(activations, delta / batch.shape[0])
        return grads

    def input_gradient(self, x, c):
        """Gradient of log p(c|x) with respect to x."""
        self._check_class(c)
        batch, single = self._inputs(x)
        activations, logits = self._propagate(batch)
        delta = -softmax(logits, axis=1)
        delta[:, c] += 1.0
        dx, _ = self._backward(activations, delta)
        return dx[0] if single else dx

    def vjp(self, x, grad_out):
        """Transpose Jacobian of the net output at x applied to grad_out."""
        batch, single = self._inputs(x)
        grad_out = np.atleast_2d(np.asarray(grad_out, dtype=float))
        activations, logits = self._propagate(batch)
        if self.output == SOFTMAX:
            p = softmax(logits, axis=1)
            delta = p * (grad_out - np.sum(p * grad_out, axis=1, keepdims=True))
        else:
            delta = grad_out
        dx, _ = self._backward(activations, delta)
        return dx[0] if single else dx

    def apply_gradients(self, grads, learning_rate):
        for w, b, gw, gb in zip(self.weights, self.biases, grads.weights, grads.biases):
            w -= learning_rate * gw
            b -= learning_rate * gb

    def load(self, data):
        self._setup(data["weights"], data["biases"], data.get("output", SOFTMAX))

    def to_data(self):
        return {
            "layer_sizes": self.layer_sizes,
            "output": self.output,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    def _label(self):
        return "-".join(str(s) for s in self.layer_sizes)


def train(net, dataset, config):
    """Minibatch gradient descent on a copy of net; returns the copy and the per-epoch loss."""
    dataset = make_dataset(*dataset)
    n = dataset.inputs.shape[0]
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    net = net.copy()
    rng = make_rng(config.seed)
    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start, end in split_range(n, config.batch_size):
            idx = order[start:end]
            grads = net.param_gradients(dataset.inputs[idx], dataset.labels[idx])
            net.apply_gradients(grads, config.learning_rate)
        trace.append(net.loss(dataset.inputs, dataset.labels))
        logger.debug("epoch %d loss %.6f", epoch, trace[-1])
    logger.info("trained %s for %d epochs, final loss %.6f", net, config.epochs, trace[-1])
    return TrainResult(net, trace)


def accuracy(net, dataset):
    dataset = make_dataset(*dataset)
    return float(np.mean(net.predict(dataset.inputs) == dataset.labels))


def save_net(net, path):
    net.save(path)


def load_net(path):
    return DenseNet.from_file(path)
