#!/usr/bin/python
# coding: utf8

"""Fixed multiscale, multi-orientation bank of frequency-domain channels.

Non-lowpass channels live on the upper half-plane (v > 0, or v == 0 and
u > 0). Filtering a real image with a one-sided channel yields the analytic
component of that channel directly.
"""

import collections
import logging
import math

import numpy as np

from .helper import half_amplitude_sigma, memoize
from .image import ImageGrid, SpectrumGrid, frequency_lattice, MIN_DECOMPOSITION_SIZE
from .models import Model


logger = logging.getLogger(__name__)

DEFAULT_SCALES = 3
DEFAULT_ORIENTATIONS = 8
DEFAULT_LOWPASS_CUTOFF = math.pi / 16
LOWPASS_ID = 0
RESPONSE_CACHE_SIZE = 64


def upper_half_plane(u, v):
    return (v > 0) | ((v == 0) & (u > 0))


def axial_distance(theta, theta0):
    """Angle difference wrapped to [-pi/2, pi/2)."""
    return np.mod(theta - theta0 + math.pi / 2, math.pi) - math.pi / 2


_ChannelFields = collections.namedtuple("GaborChannel", [
    "center_frequency", "radial_sigma", "angular_sigma", "scale_id", "orientation_id", "is_lowpass"])


class GaborChannel(_ChannelFields):
    __slots__ = ()

    def __new__(cls, center_frequency, radial_sigma, angular_sigma, scale_id, orientation_id, is_lowpass=False):
        u, v = (float(c) for c in center_frequency)
        if not (radial_sigma > 0 and angular_sigma > 0):
            raise ValueError("channel sigmas must be positive: {}, {}".format(radial_sigma, angular_sigma))
        if abs(u) > math.pi or abs(v) > math.pi:
            raise ValueError("channel center {} outside [-pi, pi]".format((u, v)))
        if not is_lowpass and not upper_half_plane(u, v):
            raise ValueError("channel center {} not in the upper half-plane".format((u, v)))
        return super(GaborChannel, cls).__new__(
            cls, (u, v), float(radial_sigma), float(angular_sigma), int(scale_id), int(orientation_id),
            bool(is_lowpass))

    @property
    def radius(self):
        return math.hypot(*self.center_frequency)

    @property
    def angle(self):
        return math.atan2(self.center_frequency[1], self.center_frequency[0])

    def gain(self, u, v):
        """Polar Gaussian response at frequencies (u, v)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        rho = np.hypot(u, v)
        if self.is_lowpass:
            return np.exp(-rho ** 2 / (2.0 * self.radial_sigma ** 2))
        d = axial_distance(np.arctan2(v, u), self.angle)
        g = np.exp(-(rho - self.radius) ** 2 / (2.0 * self.radial_sigma ** 2)) * \
            np.exp(-d ** 2 / (2.0 * self.angular_sigma ** 2))
        return np.where(upper_half_plane(u, v), g, 0.0)

    def to_data(self):
        return {
            "center_frequency": list(self.center_frequency),
            "radial_sigma": self.radial_sigma,
            "angular_sigma": self.angular_sigma,
            "scale_id": self.scale_id,
            "orientation_id": self.orientation_id,
            "is_lowpass": self.is_lowpass,
        }

    @classmethod
    def create_from_data(cls, data):
        return cls(data["center_frequency"], data["radial_sigma"], data["angular_sigma"],
                   data["scale_id"], data["orientation_id"], data["is_lowpass"])


class FilterBank(Model):
    def __init__(self, channels, scales, orientations, lowpass_cutoff, scale_band_edges):
        self._setup(channels, scales, orientations, lowpass_cutoff, scale_band_edges)

    def _setup(self, channels, scales, orientations, lowpass_cutoff, scale_band_edges):
        self.channels = tuple(channels)
        self.scales = int(scales)
        self.orientations = int(orientations)
        self.lowpass_cutoff = float(lowpass_cutoff)
        self.scale_band_edges = tuple(float(e) for e in scale_band_edges)
        self._validate()

    def _validate(self):
        lowpass = [i for i, c in enumerate(self.channels) if c.is_lowpass]
        if len(lowpass) != 1:
            raise ValueError("a bank needs exactly one lowpass channel, got {}".format(len(lowpass)))
        if len(self.scale_band_edges) != self.scales + 1:
            raise ValueError("{} band edges for {} scales".format(len(self.scale_band_edges), self.scales))
        for c in self.channels:
            if c.is_lowpass:
                continue
            lo, hi = self.scale_band_edges[c.scale_id], self.scale_band_edges[c.scale_id + 1]
            if not lo <= c.radius <= hi:
                raise ValueError("channel {} center radius {} outside band [{}, {}]".format(
                    c, c.radius, lo, hi))

    @property
    def lowpass_id(self):
        return next(i for i, c in enumerate(self.channels) if c.is_lowpass)

    def scale_channels(self, scale_id):
        if not 0 <= scale_id < self.scales:
            raise ValueError("scale {} not in bank with {} scales".format(scale_id, self.scales))
        return [i for i, c in enumerate(self.channels) if not c.is_lowpass and c.scale_id == scale_id]

    def __len__(self):
        return len(self.channels)

    def __getitem__(self, channel_id):
        return self.channels[channel_id]

    def load(self, data):
        self._setup([GaborChannel.create_from_data(c) for c in data["channels"]],
                    data["scales"], data["orientations"], data["lowpass_cutoff"], data["scale_band_edges"])

    def to_data(self):
        return {
            "scales": self.scales,
            "orientations": self.orientations,
            "lowpass_cutoff": self.lowpass_cutoff,
            "scale_band_edges": list(self.scale_band_edges),
            "channels": [c.to_data() for c in self.channels],
        }

    def _label(self):
        return "{}x{}+lowpass".format(self.scales, self.orientations)


def design_bank(scales=DEFAULT_SCALES, orientations=DEFAULT_ORIENTATIONS, lowpass_cutoff=DEFAULT_LOWPASS_CUTOFF):
    """Lowpass plus scales x orientations channels, geometric radial bands from cutoff to pi."""
    if int(scales) != scales or scales < 1:
        raise ValueError("scales must be an integer >= 1, got {}".format(scales))
    if int(orientations) != orientations or orientations < 2:
        raise ValueError("orientations must be an integer >= 2, got {}".format(orientations))
    if not 0 < lowpass_cutoff < math.pi / 4:
        raise ValueError("lowpass cutoff must lie in (0, pi/4), got {}".format(lowpass_cutoff))
    scales = int(scales)
    orientations = int(orientations)

    edges = [lowpass_cutoff * (math.pi / lowpass_cutoff) ** (s / float(scales)) for s in range(scales + 1)]
    edges[0] = float(lowpass_cutoff)
    edges[-1] = math.pi
    angular_sigma = half_amplitude_sigma(math.pi / (2.0 * orientations))

    channels = [GaborChannel((0.0, 0.0), half_amplitude_sigma(lowpass_cutoff), angular_sigma, -1, -1, True)]
    for s in range(scales):
        radius = 0.5 * (edges[s] + edges[s + 1])
        radial_sigma = half_amplitude_sigma(0.5 * (edges[s + 1] - edges[s]))
        for k in range(orientations):
            theta = math.pi * k / orientations
            center = (radius * math.cos(theta), radius * math.sin(theta))
            channels.append(GaborChannel(center, radial_sigma, angular_sigma, s, k))
    bank = FilterBank(channels, scales, orientations, lowpass_cutoff, edges)
    logger.debug("designed bank %s with %d channels", bank, len(bank))
    return bank


def save_bank(bank, path):
    bank.save(path)


def load_bank(path):
    return FilterBank.from_file(path)


@memoize(RESPONSE_CACHE_SIZE)
def _response(channel, width, height):
    u, v = frequency_lattice(width, height)
    gain = channel.gain(u, v)
    gain.flags.writeable = False
    return gain


def channel_response(channel, width, height):
    """Channel gain sampled on the DFT lattice of a width x height image."""
    if width < MIN_DECOMPOSITION_SIZE or height < MIN_DECOMPOSITION_SIZE:
        raise ValueError("response needs at least {0}x{0} bins, got {1}x{2}".format(
            MIN_DECOMPOSITION_SIZE, width, height))
    return SpectrumGrid(_response(channel, int(width), int(height)))


def mirror(bins):
    """bins evaluated at the negated frequency, bins[-k mod N]."""
    return np.roll(np.flip(bins), 1, axis=(0, 1))


def summed_gain(bank, width, height, channel_ids=None):
    """Per-bin effective gain of the channels on a real image (DC at (0, 0))."""
    if channel_ids is None:
        channel_ids = range(len(bank))
    total = np.zeros((height, width))
    for i in channel_ids:
        gain = channel_response(bank[i], width, height).bins
        if bank[i].is_lowpass:
            total += gain
        else:
            total += gain + mirror(gain)
    return total


def coverage_map(bank, width, height, channel_ids=None):
    """Mirrored channel gains, DC shifted to the center for display."""
    return ImageGrid(np.fft.fftshift(summed_gain(bank, width, height, channel_ids)))
