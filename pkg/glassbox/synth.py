#!/usr/bin/python
# coding: utf8

"""Seeded synthetic images and labelled vector datasets with known ground truth.

Pixel coordinates: x1 is the column index, x2 the row index. The radial
chirp is centered on (width // 2, height // 2).
"""

import collections
import logging
import math

import numpy as np

from .helper import make_rng
from .image import ImageGrid
from .models import Model, make_dataset


logger = logging.getLogger(__name__)

IMAGE_KINDS = ("pure_cosine", "multi_harmonic", "radial_chirp", "half_split")
DATASET_KINDS = ("two_blob", "xor")
SEAM_WIDTH = 8
MAX_REGENERATIONS = 100

SyntheticImage = collections.namedtuple("SyntheticImage", ["image", "truth"])


def _frequency(vector, name):
    if len(vector) != 2:
        raise ValueError("{} must be a (u, v) pair, got {}".format(name, vector))
    u, v = float(vector[0]), float(vector[1])
    if not (abs(u) < math.pi and abs(v) < math.pi) or (u == 0 and v == 0):
        raise ValueError("{} {} must be nonzero with |u|, |v| < pi".format(name, (u, v)))
    return u, v


class SyntheticSpec(Model):
    def __init__(self, kind, parameters=None, width=None, height=None, count=None, seed=0, noise=0.0):
        self._setup(kind, parameters, width, height, count, seed, noise)

    def _setup(self, kind, parameters, width, height, count, seed, noise):
        if kind not in IMAGE_KINDS + DATASET_KINDS:
            raise ValueError("unknown synthetic kind {!r}".format(kind))
        if noise < 0:
            raise ValueError("noise must be >= 0, got {}".format(noise))
        self.kind = kind
        self.parameters = dict(parameters or {})
        self.width = None if width is None else int(width)
        self.height = None if height is None else int(height)
        self.count = None if count is None else int(count)
        self.seed = int(seed)
        self.noise = float(noise)
        if self.is_image:
            if not (self.width and self.height and self.width >= 1 and self.height >= 1):
                raise ValueError("{} needs positive width and height".format(kind))

    @property
    def is_image(self):
        return self.kind in IMAGE_KINDS

    def get(self, key, default=None):
        return self.parameters.get(key, default)

    def load(self, data):
        self._setup(data["kind"], data.get("parameters"), data.get("width"), data.get("height"),
                    data.get("count"), data.get("seed", 0), data.get("noise", 0.0))

    def to_data(self):
        return {
            "kind": self.kind,
            "parameters": self.parameters,
            "width": self.width,
            "height": self.height,
            "count": self.count,
            "seed": self.seed,
            "noise": self.noise,
        }

    def _label(self):
        return self.kind


def _coordinates(width, height):
    return np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))


def _harmonic(x1, x2, amplitude, frequency, phase0=0.0):
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0, got {}".format(amplitude))
    u, v = frequency
    phase = u * x1 + v * x2 + phase0
    return amplitude * np.cos(phase), {
        "amplitude": np.full(x1.shape, float(amplitude)),
        "phase": np.angle(np.exp(1j * phase)),
        "omega1": np.full(x1.shape, u),
        "omega2": np.full(x1.shape, v),
    }


def _pure_cosine(spec, x1, x2):
    frequency = _frequency((spec.get("u", 0.9), spec.get("v", 0.3)), "frequency")
    return _harmonic(x1, x2, float(spec.get("amplitude", 0.7)), frequency, float(spec.get("phase", 0.0)))


def _multi_harmonic(spec, x1, x2):
    components = spec.get("components")
    if not components:
        raise ValueError("multi_harmonic needs a non-empty component list")
    total = np.zeros(x1.shape)
    truth = []
    for i, c in enumerate(components):
        frequency = _frequency((c["u"], c["v"]), "component {} frequency".format(i))
        values, fields = _harmonic(x1, x2, float(c.get("amplitude", 1.0)), frequency, float(c.get("phase", 0.0)))
        total += values
        truth.append(fields)
    return total, {"components": truth}


def _radial_chirp(spec, x1, x2):
    alpha = float(spec.get("alpha", 0.002))
    amplitude = float(spec.get("amplitude", 1.0))
    height, width = x1.shape
    x1 = x1 - width // 2
    x2 = x2 - height // 2
    reach = 2.0 * alpha * max(np.abs(x1).max(), np.abs(x2).max())
    if not alpha > 0 or reach >= math.pi:
        raise ValueError("chirp rate {} must be positive and keep 2*alpha*|x| below pi (reaches {})".format(
            alpha, reach))
    phase = alpha * (x1 ** 2 + x2 ** 2)
    return amplitude * np.cos(phase), {
        "amplitude": np.full(x1.shape, amplitude),
        "phase": np.angle(np.exp(1j * phase)),
        "omega1": 2.0 * alpha * x1,
        "omega2": 2.0 * alpha * x2,
    }


def _half_split(spec, x1, x2):
    left = _frequency(spec.get("left", (2.0, 0.0)), "left frequency")
    right = _frequency(spec.get("right", (0.0, 2.0)), "right frequency")
    amplitude = float(spec.get("amplitude", 1.0))
    seam = float(spec.get("seam", SEAM_WIDTH))
    width = x1.shape[1]
    start = width / 2.0 - seam / 2.0
    t = np.clip((x1 - start) / seam, 0.0, 1.0) if seam > 0 else (x1 >= width / 2.0).astype(float)
    w_right = 0.5 - 0.5 * np.cos(math.pi * t)
    w_left = 1.0 - w_right
    left_values, left_truth = _harmonic(x1, x2, amplitude, left)
    right_values, right_truth = _harmonic(x1, x2, amplitude, right)
    return w_left * left_values + w_right * right_values, {
        "labels": (w_right > w_left).astype(int),
        "left": left_truth,
        "right": right_truth,
        "seam_column": width / 2.0,
    }


_IMAGE_GENERATORS = {
    "pure_cosine": _pure_cosine,
    "multi_harmonic": _multi_harmonic,
    "radial_chirp": _radial_chirp,
    "half_split": _half_split,
}


def generate_image(spec):
    """Image plus ground-truth fields for an image kind."""
    if not spec.is_image:
        raise ValueError("{} is not an image kind".format(spec.kind))
    x1, x2 = _coordinates(spec.width, spec.height)
    values, truth = _IMAGE_GENERATORS[spec.kind](spec, x1, x2)
    values = values + float(spec.get("offset", 0.0))
    if spec.noise > 0:
        values = values + make_rng(spec.seed).normal(0.0, spec.noise, size=values.shape)
    return SyntheticImage(ImageGrid(values), truth)


def _xor(spec):
    base = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = np.array([0, 1, 1, 0])
    repeats = int(spec.get("repeats", 1))
    inputs = np.tile(base, (repeats, 1))
    if spec.noise > 0:
        inputs = inputs + make_rng(spec.seed).normal(0.0, spec.noise, size=inputs.shape)
    return make_dataset(inputs, np.tile(labels, repeats))


def blob_margin(inputs, labels, means):
    """Gap between the classes along the line joining the means."""
    axis = np.asarray(means[1], dtype=float) - np.asarray(means[0], dtype=float)
    projection = inputs.dot(axis / np.linalg.norm(axis))
    return float(projection[labels == 1].min() - projection[labels == 0].max())


def _two_blob(spec):
    means = np.array(spec.get("means", [[-3.0, 0.0], [3.0, 0.0]]), dtype=float)
    if means.shape[0] != 2 or np.allclose(means[0], means[1]):
        raise ValueError("two_blob needs two distinct means, got {}".format(means.tolist()))
    dim = means.shape[1]
    covariance = np.array(spec.get("covariance", np.eye(dim).tolist()), dtype=float)
    factor = np.linalg.cholesky(covariance)
    count = spec.count or 200
    if count < 2:
        raise ValueError("two_blob needs at least 2 points, got {}".format(count))
    margin = float(spec.get("margin", 1.0))
    sizes = (count // 2, count - count // 2)
    labels = np.repeat([0, 1], sizes)
    for attempt in range(MAX_REGENERATIONS):
        rng = make_rng(spec.seed + attempt)
        inputs = np.concatenate([
            means[k] + rng.standard_normal((sizes[k], dim)).dot(factor.T) for k in (0, 1)])
        gap = blob_margin(inputs, labels, means)
        if gap >= margin:
            return make_dataset(inputs, labels)
        logger.warning("two_blob seed %d gives margin %.3f < %.3f, regenerating", spec.seed + attempt, gap, margin)
    raise ValueError("no seed in {} attempts reached margin {}".format(MAX_REGENERATIONS, margin))


def generate_dataset(spec):
    """Labelled vector dataset for a dataset kind."""
    if spec.kind == "xor":
        return _xor(spec)
    if spec.kind == "two_blob":
        return _two_blob(spec)
    raise ValueError("{} is not a dataset kind".format(spec.kind))
