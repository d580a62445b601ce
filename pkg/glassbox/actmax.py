#!/usr/bin/python
# coding: utf8

"""Prototype search by gradient ascent on class log-probability.

Three regularizers: a squared norm on the input, a Gaussian RBM density
expert, and a squared norm on the code of a decoder.
"""

import collections
import logging

import numpy as np
from scipy.special import expit

from .helper import make_rng, split_range
from .models import Model, OptimizationError
from .tinynet import LINEAR


logger = logging.getLogger(__name__)

DEFAULT_STEP = 0.1
DEFAULT_MAX_ITERS = 10000
DEFAULT_TOL = 1e-6
MAX_HALVINGS = 30
VARIANCE_FLOOR = 1e-6

PrototypeResult = collections.namedtuple(
    "PrototypeResult", ["x_star", "z_star", "objective_trace", "iterations", "converged", "path"])
SweepPoint = collections.namedtuple("SweepPoint", ["alpha", "result", "mode_distance", "class_probability"])
RBMTrainResult = collections.namedtuple("RBMTrainResult", ["expert", "reconstruction_trace"])


class RBMExpert(Model):
    """Gaussian RBM with hidden factors; sigma_diag holds the visible variances."""

    def __init__(self, W, b, sigma_diag):
        self._setup(W, b, sigma_diag)

    def _setup(self, W, b, sigma_diag):
        sigma_diag = np.array(sigma_diag, dtype=float).reshape(-1)
        W = np.array(W, dtype=float).reshape(-1, sigma_diag.shape[0])
        b = np.array(b, dtype=float).reshape(-1)
        if W.shape[0] != b.shape[0]:
            raise ValueError("{} factors but {} biases".format(W.shape[0], b.shape[0]))
        if not np.all(sigma_diag > 0):
            raise ValueError("sigma_diag must be positive, got {}".format(sigma_diag.tolist()))
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b)) and np.all(np.isfinite(sigma_diag))):
            raise ValueError("expert parameters must be finite")
        self.W = W
        self.b = b
        self.sigma_diag = sigma_diag

    @property
    def dim(self):
        return self.sigma_diag.shape[0]

    @property
    def hidden(self):
        return self.W.shape[0]

    def hidden_probabilities(self, v):
        return expit(np.atleast_2d(v).dot(self.W.T) + self.b)

    def visible_mean(self, h):
        return self.sigma_diag * np.atleast_2d(h).dot(self.W)

    def reconstruct(self, v):
        """Mean-field reconstruction through the hidden layer."""
        return self.visible_mean(self.hidden_probabilities(v))

    def load(self, data):
        self._setup(data["W"], data["b"], data["sigma_diag"])

    def to_data(self):
        return {"W": self.W.tolist(), "b": self.b.tolist(), "sigma_diag": self.sigma_diag.tolist()}

    def _label(self):
        return "{}x{}".format(self.hidden, self.dim)


class Decoder(object):
    """Code-space generator: a linear-output DenseNet from code dim m to input dim d."""

    def __init__(self, net):
        if net.output != LINEAR:
            raise ValueError("a decoder needs a linear output layer")
        self.net = net

    @property
    def code_dim(self):
        return self.net.input_dim

    @property
    def output_dim(self):
        return self.net.output_dim

    def decode(self, z):
        return self.net.forward(z)

    def vjp(self, z, grad_out):
        return self.net.vjp(z, grad_out)

    def __repr__(self):
        return "<{}({})>".format(self.__class__.__name__, self.net._label())


def rbm_log_density(expert, x):
    """Unnormalized log density (additive constant dropped) and its gradient.

    A 2D x evaluates row by row; the gradient then has one row per sample.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = np.atleast_2d(x)
    if batch.shape[1] != expert.dim:
        raise ValueError("input dimension {} does not match expert dimension {}".format(batch.shape[1], expert.dim))
    t = batch.dot(expert.W.T) + expert.b
    value = np.sum(np.logaddexp(0.0, t), axis=1) - 0.5 * np.sum(batch ** 2 / expert.sigma_diag, axis=1)
    grad = expit(t).dot(expert.W) - batch / expert.sigma_diag
    if single:
        return float(value[0]), grad[0]
    return value, grad


def _check_init(init, dim, name="init"):
    init = np.array(init, dtype=float).reshape(-1)
    if init.shape[0] != dim:
        raise ValueError("{} has dimension {}, expected {}".format(name, init.shape[0], dim))
    if not np.all(np.isfinite(init)):
        raise ValueError("{} must be finite".format(name))
    return init


def _check_ascent(lam, step, max_iters, tol):
    if lam < 0:
        raise ValueError("regularization weight must be >= 0, got {}".format(lam))
    if not step > 0:
        raise ValueError("step must be positive, got {}".format(step))
    if int(max_iters) != max_iters or max_iters < 0:
        raise ValueError("max_iters must be a non-negative integer, got {}".format(max_iters))
    if tol < 0:
        raise ValueError("tol must be >= 0, got {}".format(tol))


def ascend(objective, x0, step=DEFAULT_STEP, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL, keep_path=False):
    """Gradient ascent with step halving; the recorded objective never decreases.

    objective(x) returns (value, gradient). Returns (x, trace, converged, path).
    """
    x = np.array(x0, dtype=float)
    value, grad = objective(x)
    if not np.isfinite(value):
        raise OptimizationError("non-finite objective {}".format(value), 0)
    trace = []
    path = [x.copy()] if keep_path else None
    converged = False
    for iteration in range(1, int(max_iters) + 1):
        if np.linalg.norm(grad) < tol:
            converged = True
            break
        eta = step
        for halving in range(MAX_HALVINGS + 1):
            candidate = x + eta * grad
            c_value, c_grad = objective(candidate)
            finite = np.isfinite(c_value) and np.all(np.isfinite(c_grad))
            if finite and c_value >= value:
                break
            eta *= 0.5
        else:
            if not finite:
                raise OptimizationError("non-finite objective after {} halvings".format(MAX_HALVINGS), iteration)
            logger.warning("no ascent step found after %d halvings at iteration %d", MAX_HALVINGS, iteration)
            break
        if halving:
            logger.debug("iteration %d: step halved %d times", iteration, halving)
        x, value, grad = candidate, c_value, c_grad
        trace.append(float(value))
        if keep_path:
            path.append(x.copy())
    else:
        converged = bool(np.linalg.norm(grad) < tol)
    if not converged:
        logger.warning("ascent stopped after %d iterations without convergence (|grad| %.3g)",
                       len(trace), float(np.linalg.norm(grad)))
    return x, trace, converged, path


def _class_objective(net, c, lam):
    def objective(x):
        return (net.log_probability(x, c) - lam * float(x.dot(x)),
                net.input_gradient(x, c) - 2.0 * lam * x)
    return objective


def _result(x, trace, converged, path, z=None):
    return PrototypeResult(x, z, trace, len(trace), converged, path)


def maximize_class(net, c, lam=0.0, init=None, step=DEFAULT_STEP, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL,
                   keep_path=False):
    """Maximize log p(c|x) - lam * |x|^2."""
    _check_ascent(lam, step, max_iters, tol)
    init = np.zeros(net.input_dim) if init is None else _check_init(init, net.input_dim)
    x, trace, converged, path = ascend(_class_objective(net, c, lam), init, step, max_iters, tol, keep_path)
    logger.info("class %d prototype after %d iterations, converged %s", c, len(trace), converged)
    return _result(x, trace, converged, path)


def maximize_with_expert(net, c, expert, alpha=1.0, init=None, step=DEFAULT_STEP, max_iters=DEFAULT_MAX_ITERS,
                         tol=DEFAULT_TOL, lam=0.0, keep_path=False):
    """Maximize log p(c|x) + alpha * log p_expert(x) - lam * |x|^2."""
    _check_ascent(lam, step, max_iters, tol)
    if alpha < 0:
        raise ValueError("expert weight must be >= 0, got {}".format(alpha))
    if expert.dim != net.input_dim:
        raise ValueError("expert dimension {} does not match net input {}".format(expert.dim, net.input_dim))
    init = np.zeros(net.input_dim) if init is None else _check_init(init, net.input_dim)
    class_objective = _class_objective(net, c, lam)
    if alpha == 0:
        objective = class_objective
    else:
        def objective(x):
            value, grad = class_objective(x)
            e_value, e_grad = rbm_log_density(expert, x)
            return value + alpha * e_value, grad + alpha * e_grad
    x, trace, converged, path = ascend(objective, init, step, max_iters, tol, keep_path)
    logger.info("class %d expert prototype (alpha %g) after %d iterations", c, alpha, len(trace))
    return _result(x, trace, converged, path)


def maximize_in_code_space(net, c, decoder, lam=0.0, init_z=None, step=DEFAULT_STEP, max_iters=DEFAULT_MAX_ITERS,
                           tol=DEFAULT_TOL, keep_path=False):
    """Maximize log p(c|g(z)) - lam * |z|^2; returns z_star and x_star = g(z_star)."""
    _check_ascent(lam, step, max_iters, tol)
    if decoder.output_dim != net.input_dim:
        raise ValueError("decoder output {} does not match net input {}".format(decoder.output_dim, net.input_dim))
    init_z = np.zeros(decoder.code_dim) if init_z is None else _check_init(init_z, decoder.code_dim, "init_z")

    def objective(z):
        x = decoder.decode(z)
        return (net.log_probability(x, c) - lam * float(z.dot(z)),
                decoder.vjp(z, net.input_gradient(x, c)) - 2.0 * lam * z)

    z, trace, converged, path = ascend(objective, init_z, step, max_iters, tol, keep_path)
    logger.info("class %d code-space prototype after %d iterations", c, len(trace))
    return _result(decoder.decode(z), trace, converged, path, z=z)


def sample_codes(decoder, n, seed):
    """Decode n codes drawn from the standard normal code distribution."""
    if n < 1:
        raise ValueError("need at least one code, got {}".format(n))
    codes = make_rng(seed).standard_normal((int(n), decoder.code_dim))
    return codes, np.atleast_2d(decoder.decode(codes))


def expert_mode(expert, init=None, step=DEFAULT_STEP, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
    """Local maximizer of the expert density alone."""
    init = np.zeros(expert.dim) if init is None else _check_init(init, expert.dim)
    return ascend(lambda v: rbm_log_density(expert, v), init, step, max_iters, tol)[0]


def sweep_expert_weight(net, c, expert, alphas, init=None, step=DEFAULT_STEP, max_iters=DEFAULT_MAX_ITERS,
                        tol=DEFAULT_TOL, lam=0.0):
    """Prototypes over a range of expert weights, from the absent to the dominant expert."""
    mode = expert_mode(expert, init, step, max_iters, tol)
    points = []
    for alpha in alphas:
        # keep alpha * step bounded so large weights stay stable
        a_step = step / max(1.0, alpha)
        result = maximize_with_expert(net, c, expert, alpha, init, a_step, max_iters, tol, lam)
        points.append(SweepPoint(float(alpha), result, float(np.linalg.norm(result.x_star - mode)),
                                 float(net.forward(result.x_star)[c])))
    return points


def train_rbm(data, hidden, epochs=50, lr=0.01, seed=0, batch_size=None):
    """One-step contrastive divergence with Gaussian visibles of fixed per-dimension variance."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.size == 0 or data.shape[0] == 0:
        raise ValueError("cannot train an expert on empty data")
    if not np.all(np.isfinite(data)):
        raise ValueError("expert training data must be finite")
    if hidden < 0:
        raise ValueError("hidden count must be >= 0, got {}".format(hidden))
    n, d = data.shape
    rng = make_rng(seed)
    sigma_diag = np.maximum(np.var(data, axis=0), VARIANCE_FLOOR)
    W = rng.normal(0.0, 0.01, size=(int(hidden), d))
    b = np.zeros(int(hidden))
    batch_size = n if batch_size is None else int(batch_size)
    trace = []
    for epoch in range(int(epochs)):
        order = rng.permutation(n)
        for start, end in split_range(n, batch_size):
            v0 = data[order[start:end]]
            h0 = expit(v0.dot(W.T) + b)
            sample = (rng.random(h0.shape) < h0).astype(float)
            v1 = sigma_diag * sample.dot(W)
            h1 = expit(v1.dot(W.T) + b)
            m = v0.shape[0]
            W += lr * (h0.T.dot(v0) - h1.T.dot(v1)) / m
            b += lr * np.mean(h0 - h1, axis=0)
        expert = RBMExpert(W, b, sigma_diag)
        trace.append(float(np.mean(np.sum((data - expert.reconstruct(data)) ** 2, axis=1))))
        logger.debug("expert epoch %d reconstruction error %.6f", epoch, trace[-1])
    expert = RBMExpert(W, b, sigma_diag)
    if trace:
        logger.info("trained expert %s, reconstruction error %.6f -> %.6f", expert, trace[0], trace[-1])
    return RBMTrainResult(expert, trace)


def save_expert(expert, path):
    expert.save(path)


def load_expert(path):
    return RBMExpert.from_file(path)
