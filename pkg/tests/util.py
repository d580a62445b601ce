import math
import os
import shutil
import tempfile

import mock
import numpy as np

from glassbox.actmax import RBMExpert
from glassbox.bank import GaborChannel
from glassbox.tinynet import DenseNet, LINEAR, SOFTMAX


def harmonic_image(size, bins, amplitude, offset=0.5):
    """Sum of cosines at integer DFT bins (u_bin, v_bin) on a size x size grid."""
    x1, x2 = np.meshgrid(np.arange(size, dtype=float), np.arange(size, dtype=float))
    total = np.full((size, size), float(offset))
    for ub, vb in bins:
        total += amplitude * np.cos(2 * math.pi * (ub * x1 + vb * x2) / size)
    return total


def tone_channel(u=0.9, v=0.3, radial_sigma=0.3, angular_sigma=0.2):
    return GaborChannel((u, v), radial_sigma, angular_sigma, 0, 0)


def single_layer_net(weights, biases=None):
    weights = np.asarray(weights, dtype=float)
    if biases is None:
        biases = np.zeros(weights.shape[0])
    return DenseNet([weights], [biases])


def random_net(seed, input_dim=None, output_dim=None, output=SOFTMAX):
    """Seeded net of random depth and widths, plus the generator to draw its inputs from."""
    rng = np.random.default_rng(seed)
    sizes = [int(rng.integers(1, 5)) if input_dim is None else input_dim]
    sizes.extend(int(rng.integers(2, 7)) for _ in range(int(rng.integers(0, 3))))
    sizes.append(int(rng.integers(2, 5)) if output_dim is None else output_dim)
    return DenseNet.initialize(sizes, seed=seed, output=output), rng


def identity_decoder_net(dim):
    return DenseNet([np.eye(dim)], [np.zeros(dim)], LINEAR)


def peaked_expert():
    """Single factor expert with an unambiguous mode near (2, 1)."""
    return RBMExpert([[2.0, 1.0]], [10.0], [1.0, 1.0])


def interior(grid, margin):
    return grid[margin:-margin, margin:-margin]


def relative_error(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)


def central_difference(f, x, h=1e-5):
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2 * h)
    return grad


class TempDir():
    def __init__(self):
        self.path = None

    def __enter__(self):
        self.path = tempfile.mkdtemp(prefix="glassbox-")
        return self.path

    def __exit__(self, exc_type, exc_value, exc_traceback):
        shutil.rmtree(self.path, ignore_errors=True)

    def join(self, *parts):
        return os.path.join(self.path, *parts)


class MockLoadRaster():
    def __init__(self, image):
        self.load = mock.patch('glassbox.cli.load_raster')
        self.image = image

    def __enter__(self):
        patched = self.load.__enter__()
        patched.return_value = self.image
        return patched

    def __exit__(self, exc_type, exc_value, exc_traceback):
        self.load.__exit__(exc_type, exc_value, exc_traceback)


class MockDecompose():
    def __init__(self):
        self.decompose = mock.patch('glassbox.amfm.decompose', autospec=True)

    def __enter__(self):
        return self.decompose.__enter__()

    def __exit__(self, exc_type, exc_value, exc_traceback):
        self.decompose.__exit__(exc_type, exc_value, exc_traceback)
