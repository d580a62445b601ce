#!/usr/bin/python
# coding: utf8

"""Local surrogate explanations for black-box scoring functions.

Perturbations live in a binary interpretable space: 1 keeps a feature of
the instance, 0 removes it (zeroed for vectors, mean-filled for image blocks).
"""

import concurrent.futures
import logging
import math

import numpy as np
import scipy.linalg

from .helper import make_rng
from .image import as_samples
from .models import BlackBoxError, Model


logger = logging.getLogger(__name__)

RIDGE = 1e-8
DEFAULT_KERNEL_WIDTH = 0.25
DEFAULT_BLOCK = 8


class InterpretableMapping(object):
    """Maps binary interpretable vectors back to the original representation."""

    def __init__(self, d_prime, realize, instance, block_shape=None, block=None):
        if d_prime < 1:
            raise ValueError("interpretable dimension must be >= 1, got {}".format(d_prime))
        self.d_prime = int(d_prime)
        self._realize = realize
        self.instance = instance
        self.block_shape = block_shape
        self.block = block

    def realize(self, z_prime):
        z_prime = np.asarray(z_prime).reshape(-1)
        if z_prime.shape[0] != self.d_prime:
            raise ValueError("interpretable vector of length {}, expected {}".format(z_prime.shape[0], self.d_prime))
        return self._realize(z_prime)

    def __repr__(self):
        return "<{}(d'={})>".format(self.__class__.__name__, self.d_prime)


def tabular_mapping(x):
    """One interpretable feature per vector entry; removing a feature zeroes it."""
    x = np.array(x, dtype=float).reshape(-1)
    x.flags.writeable = False
    return InterpretableMapping(x.shape[0], lambda z: x * z, x)


def block_mapping(image, block=DEFAULT_BLOCK):
    """One interpretable feature per block x block tile; removed tiles take the image mean."""
    samples = np.array(as_samples(image), dtype=float)
    if samples.ndim != 2:
        raise ValueError("block mapping needs a 2D image, got shape {}".format(samples.shape))
    if block < 1:
        raise ValueError("block size must be >= 1, got {}".format(block))
    samples.flags.writeable = False
    height, width = samples.shape
    rows, cols = int(math.ceil(height / float(block))), int(math.ceil(width / float(block)))
    fill = float(samples.mean())

    def realize(z):
        keep = np.repeat(np.repeat(z.reshape(rows, cols), block, axis=0), block, axis=1)[:height, :width]
        return np.where(keep > 0, samples, fill)

    return InterpretableMapping(rows * cols, realize, samples, (rows, cols), block)


def heat_map(mapping, weights):
    """Paint per-block weights back onto the instance grid."""
    if mapping.block_shape is None:
        raise ValueError("heat maps need a block mapping")
    height, width = mapping.instance.shape
    grid = np.asarray(weights, dtype=float).reshape(mapping.block_shape)
    return np.repeat(np.repeat(grid, mapping.block, axis=0), mapping.block, axis=1)[:height, :width]


def sample_perturbations(d_prime, n, seed):
    """n binary vectors; row 0 is all ones, others keep a uniform count in [1, d'] of random features."""
    if d_prime < 1:
        raise ValueError("interpretable dimension must be >= 1, got {}".format(d_prime))
    if n < d_prime + 1:
        raise ValueError("need at least {} samples for {} features, got {}".format(d_prime + 1, d_prime, n))
    rng = make_rng(seed)
    samples = np.zeros((int(n), int(d_prime)), dtype=int)
    samples[0] = 1
    for i in range(1, int(n)):
        active = rng.integers(1, d_prime + 1)
        samples[i, rng.choice(d_prime, size=active, replace=False)] = 1
    return samples


def proximity_weight(z_prime, kernel_width):
    """exp(-D^2 / width^2), D the fraction of removed features. Accepts one vector or rows."""
    if not kernel_width > 0:
        raise ValueError("kernel width must be positive, got {}".format(kernel_width))
    z = np.asarray(z_prime, dtype=float)
    d_prime = z.shape[-1]
    distance = (d_prime - z.sum(axis=-1)) / float(d_prime)
    weight = np.exp(-distance ** 2 / kernel_width ** 2)
    return float(weight) if np.ndim(weight) == 0 else weight


class LocalExplanation(Model):
    def __init__(self, feature_weights, intercept, selected, local_fidelity):
        self.feature_weights = np.asarray(feature_weights, dtype=float)
        self.intercept = float(intercept)
        self.selected = [int(i) for i in selected]
        self.local_fidelity = float(local_fidelity)

    def load(self, data):
        self.__init__(data["feature_weights"], data["intercept"], data["selected"], data["local_fidelity"])

    def to_data(self):
        return {
            "feature_weights": self.feature_weights.tolist(),
            "intercept": self.intercept,
            "selected": list(self.selected),
            "local_fidelity": self.local_fidelity,
        }

    def _label(self):
        return "K={}, R2={:.4f}".format(len(self.selected), self.local_fidelity)


def weighted_fit(Z, y, w, features):
    """Weighted least squares on the given columns plus intercept; returns (coef, intercept, rss)."""
    total = w.sum()
    y_mean = w.dot(y) / total
    if not features:
        return np.zeros(0), float(y_mean), float(w.dot((y - y_mean) ** 2))
    X = Z[:, features].astype(float)
    x_mean = w.dot(X) / total
    Xc = X - x_mean
    yc = y - y_mean
    A = (Xc * w[:, np.newaxis]).T.dot(Xc) + RIDGE * np.eye(len(features))
    coef = scipy.linalg.solve(A, (Xc * w[:, np.newaxis]).T.dot(yc), assume_a="pos")
    residual = yc - Xc.dot(coef)
    return coef, float(y_mean - x_mean.dot(coef)), float(w.dot(residual ** 2))


def forward_selection(Z, y, w, K):
    """Greedily add the feature with the lowest weighted RSS, ties to the lowest index."""
    selected = []
    for _ in range(K):
        best = None
        for j in range(Z.shape[1]):
            if j in selected:
                continue
            rss = weighted_fit(Z, y, w, selected + [j])[2]
            if best is None or rss < best[1]:
                best = (j, rss)
        selected.append(best[0])
    return selected


def score_samples(blackbox, mapping, samples, workers=1):
    def score(z):
        return float(blackbox(mapping.realize(z)))

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            scores = np.array(list(pool.map(score, samples)))
    else:
        scores = np.array([score(z) for z in samples])
    bad = np.flatnonzero(~np.isfinite(scores))
    if bad.size:
        raise BlackBoxError("black box returned {}".format(scores[bad[0]]), int(bad[0]), samples[bad[0]])
    return scores


def fit_local_surrogate(blackbox, mapping, K, n=1000, kernel_width=DEFAULT_KERNEL_WIDTH, seed=0, workers=1):
    """Sparse weighted linear surrogate of blackbox around mapping.instance."""
    if not 1 <= K <= mapping.d_prime:
        raise ValueError("feature budget K={} outside [1, {}]".format(K, mapping.d_prime))
    samples = sample_perturbations(mapping.d_prime, n, seed)
    scores = score_samples(blackbox, mapping, samples, workers)
    weights = proximity_weight(samples, kernel_width)
    return surrogate_from_samples(samples, scores, weights, K)


def surrogate_from_samples(samples, scores, weights, K):
    d_prime = samples.shape[1]
    feature_weights = np.zeros(d_prime)
    if np.all(scores == scores[0]):
        # zero-variance target: the zero model fits perfectly
        return LocalExplanation(feature_weights, scores[0], [], 1.0)
    selected = forward_selection(samples, scores, weights, K)
    coef, intercept, rss = weighted_fit(samples, scores, weights, selected)
    feature_weights[selected] = coef
    tss = weighted_fit(samples, scores, weights, [])[2]
    fidelity = 1.0 - rss / tss
    logger.info("surrogate on %d features (selected %s): weighted R2 %.6f", d_prime, selected, fidelity)
    return LocalExplanation(feature_weights, intercept, selected, fidelity)
