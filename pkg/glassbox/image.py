#!/usr/bin/python
# coding: utf8

"""Raster values, graymap I/O, the 2D DFT and SSIM.

Axis convention: samples are stored row-major with shape (height, width);
x1 runs along columns (u frequencies), x2 along rows (v frequencies).
"""

import logging
import os

import numpy as np
import scipy.fft
from skimage.metrics import structural_similarity

from .helper import memoize, round_half_away
from .models import RasterError, dump_json, load_json


logger = logging.getLogger(__name__)

MIN_DECOMPOSITION_SIZE = 8
LATTICE_CACHE_SIZE = 8
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_WHITESPACE = b" \t\r\n\x0b\x0c"


class ImageGrid(object):
    def __init__(self, samples):
        samples = np.array(samples, dtype=float)
        if samples.ndim != 2:
            raise ValueError("image samples must be 2D, got shape {}".format(samples.shape))
        if samples.size == 0:
            raise ValueError("image must not be empty")
        if not np.all(np.isfinite(samples)):
            raise ValueError("image samples must be finite")
        samples.flags.writeable = False
        self._samples = samples

    @classmethod
    def from_flat(cls, width, height, values):
        values = np.asarray(values, dtype=float)
        if values.size != width * height:
            raise ValueError("{} samples for a {}x{} image".format(values.size, width, height))
        return cls(values.reshape(height, width))

    @property
    def samples(self):
        return self._samples

    @property
    def width(self):
        return self._samples.shape[1]

    @property
    def height(self):
        return self._samples.shape[0]

    @property
    def shape(self):
        return self._samples.shape

    def require_min_dims(self, minimum=MIN_DECOMPOSITION_SIZE):
        if self.width < minimum or self.height < minimum:
            raise ValueError("image is {}x{}, at least {}x{} required".format(
                self.width, self.height, minimum, minimum))
        return self

    def scaled(self, factor):
        return ImageGrid(self._samples * factor)

    def __repr__(self):
        return "<{}({}x{})>".format(self.__class__.__name__, self.width, self.height)


class SpectrumGrid(object):
    """DFT bins, DC at (0, 0), row index = v, column index = u."""

    def __init__(self, bins):
        bins = np.array(bins)
        if bins.ndim != 2:
            raise ValueError("spectrum bins must be 2D, got shape {}".format(bins.shape))
        bins.flags.writeable = False
        self._bins = bins

    @property
    def bins(self):
        return self._bins

    @property
    def width(self):
        return self._bins.shape[1]

    @property
    def height(self):
        return self._bins.shape[0]

    @property
    def shape(self):
        return self._bins.shape

    def __repr__(self):
        return "<{}({}x{})>".format(self.__class__.__name__, self.width, self.height)


def as_samples(image):
    if isinstance(image, ImageGrid):
        return image.samples
    return np.asarray(image, dtype=float)


def _next_token(data, pos):
    """Return (token, start, end) skipping whitespace and '#' comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        return None, pos, pos
    start = pos
    while pos < n and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], start, pos


def _header_int(data, pos, field):
    token, start, end = _next_token(data, pos)
    if token is None:
        raise RasterError("truncated header, missing {}".format(field), start)
    try:
        value = int(token)
    except ValueError:
        raise RasterError("malformed header field {} {!r}".format(field, token), start)
    if value < 1:
        raise RasterError("header field {} must be positive, got {}".format(field, value), start)
    return value, end


def load_raster(path):
    """Read a P5 or P2 graymap, scaling samples to [0, 1] by maxval."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 2:
        raise RasterError("truncated header, missing magic number", len(data))
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise RasterError("unsupported magic number {!r}".format(magic.decode("latin-1")), 0)
    width, pos = _header_int(data, 2, "width")
    height, pos = _header_int(data, pos, "height")
    maxval_pos = _next_token(data, pos)[1]
    maxval, pos = _header_int(data, pos, "maxval")
    count = width * height

    if magic == b"P5":
        if maxval > 255:
            raise RasterError("unsupported maxval {} (8-bit only)".format(maxval), maxval_pos)
        if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
            raise RasterError("malformed header, expected whitespace after maxval", pos)
        start = pos + 1
        payload = data[start:start + count]
        if len(payload) < count:
            raise RasterError("truncated payload, expected {} bytes, got {}".format(
                count, len(payload)), start + len(payload))
        values = np.frombuffer(payload, dtype=np.uint8).astype(float)
    else:
        if maxval > 65535:
            raise RasterError("unsupported maxval {}".format(maxval), maxval_pos)
        values = np.empty(count, dtype=float)
        for i in range(count):
            token, start, pos = _next_token(data, pos)
            if token is None:
                raise RasterError("truncated payload, expected {} samples, got {}".format(count, i), start)
            try:
                value = int(token)
            except ValueError:
                raise RasterError("malformed sample {!r}".format(token), start)
            if value < 0 or value > maxval:
                raise RasterError("sample {} outside [0, {}]".format(value, maxval), start)
            values[i] = value

    logger.debug("loaded %s: %dx%d maxval %d", path, width, height, maxval)
    return ImageGrid.from_flat(width, height, values / float(maxval))


def quantize(samples):
    clamped = np.clip(as_samples(samples), 0.0, 1.0)
    return round_half_away(clamped * 255.0).astype(np.uint8)


def save_raster(image, path):
    """Write an 8-bit P5 graymap; samples are clamped to [0, 1] first."""
    samples = as_samples(image)
    if not np.all(np.isfinite(samples)):
        raise ValueError("cannot save non-finite samples")
    height, width = samples.shape
    with open(path, "wb") as f:
        f.write("P5\n{} {}\n255\n".format(width, height).encode("ascii"))
        f.write(quantize(samples).tobytes())


def forward_transform(image, workers=None):
    """Unnormalized forward DFT."""
    if not isinstance(image, ImageGrid):
        image = ImageGrid(image)
    image.require_min_dims()
    return SpectrumGrid(scipy.fft.fft2(image.samples, workers=workers))


def inverse_transform(spectrum, workers=None):
    """Inverse DFT with 1/(W*H); returns complex samples."""
    bins = spectrum.bins if isinstance(spectrum, SpectrumGrid) else np.asarray(spectrum)
    return scipy.fft.ifft2(bins, workers=workers)


@memoize(LATTICE_CACHE_SIZE)
def frequency_lattice(width, height):
    """Angular frequencies (u, v) of every DFT bin, radians/sample in [-pi, pi)."""
    u = 2.0 * np.pi * np.fft.fftfreq(width)
    v = 2.0 * np.pi * np.fft.fftfreq(height)
    uu, vv = np.meshgrid(u, v)
    uu.flags.writeable = False
    vv.flags.writeable = False
    return uu, vv


def fit_ssim_window(window, shape):
    """Largest odd window <= ``window`` that fits inside ``shape``."""
    if window % 2 != 1 or window < 3:
        raise ValueError("ssim window must be odd and >= 3, got {}".format(window))
    limit = min(shape)
    if limit < 3:
        raise ValueError("image {} is too small for an ssim window".format(tuple(shape)))
    fitted = min(window, limit if limit % 2 else limit - 1)
    if fitted != window:
        logger.info("ssim window %d shrunk to %d for image %s", window, fitted, tuple(shape))
    return fitted


def ssim(a, b, window=SSIM_WINDOW, dynamic_range=1.0):
    """Mean local SSIM over all valid positions of a Gaussian window.

    ``window`` must be odd, at least 3 and no larger than the smaller image side.
    """
    a = as_samples(a)
    b = as_samples(b)
    if a.shape != b.shape:
        raise ValueError("ssim dimension mismatch: {} vs {}".format(a.shape, b.shape))
    if window % 2 != 1 or window < 3:
        raise ValueError("ssim window must be odd and >= 3, got {}".format(window))
    if window > min(a.shape):
        raise ValueError("ssim window {} exceeds image size {}".format(window, a.shape))
    sigma = SSIM_SIGMA * window / float(SSIM_WINDOW)
    return float(structural_similarity(
        a, b,
        data_range=dynamic_range,
        gaussian_weights=True,
        sigma=sigma,
        use_sample_covariance=False,
    ))


def normalize_layer(grid, lo=None, hi=None):
    samples = as_samples(grid)
    lo = float(np.min(samples)) if lo is None else float(lo)
    hi = float(np.max(samples)) if hi is None else float(hi)
    if hi <= lo:
        return np.zeros_like(samples), lo, hi
    return np.clip((samples - lo) / (hi - lo), 0.0, 1.0), lo, hi


def write_stack(layers, directory, manifest_name="manifest.json", extra=None):
    """Write one P5 per (name, grid, lo, hi) layer, then the JSON manifest."""
    if not os.path.isdir(directory):
        os.makedirs(directory)
    entries = []
    for name, grid, lo, hi in layers:
        unit, lo, hi = normalize_layer(grid, lo, hi)
        filename = "{}.pgm".format(name)
        save_raster(unit, os.path.join(directory, filename))
        entries.append({
            "name": name,
            "file": filename,
            "lo": lo,
            "hi": hi,
            "width": unit.shape[1],
            "height": unit.shape[0],
        })
    manifest = dict(extra or {})
    manifest["layers"] = entries
    dump_json(os.path.join(directory, manifest_name), manifest)
    logger.info("wrote %d layers to %s", len(entries), directory)
    return manifest


def read_stack(directory, manifest_name="manifest.json"):
    """Restore layer values from a stack written by write_stack."""
    manifest = load_json(os.path.join(directory, manifest_name))
    out = []
    for entry in manifest["layers"]:
        unit = load_raster(os.path.join(directory, entry["file"])).samples
        out.append((entry["name"], entry["lo"] + unit * (entry["hi"] - entry["lo"])))
    return manifest, out
