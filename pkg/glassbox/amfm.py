#!/usr/bin/python
# coding: utf8

"""AM-FM decomposition of an image through a fixed channel bank.

Every channel yields an analytic component z; the instantaneous amplitude is
|z|, the phase arg z and the instantaneous frequency comes from the
quasi-eigenfunction estimator on z.
"""

import collections
import concurrent.futures
import logging
import math

import numpy as np
from scipy.ndimage import distance_transform_edt

from .image import (ImageGrid, SpectrumGrid, forward_transform, inverse_transform, fit_ssim_window, ssim,
                    write_stack, SSIM_WINDOW)
from .bank import channel_response


logger = logging.getLogger(__name__)

AMFM = "amfm"
FM_ONLY = "fm_only"
RECONSTRUCTION_MODES = (AMFM, FM_ONLY)
DEFAULT_THRESHOLD = 0.85
AMPLITUDE_FLOOR = 1e-8


AMFMComponent = collections.namedtuple(
    "AMFMComponent", ["amplitude", "phase", "omega1", "omega2", "channel_id", "flagged"])
AMFMComponent.__new__.__defaults__ = (None, None)

FrequencyEstimate = collections.namedtuple("FrequencyEstimate", ["omega1", "omega2", "flagged"])
Decomposition = collections.namedtuple("Decomposition", ["components", "bank", "source_dims"])
DominantMap = collections.namedtuple("DominantMap", ["scale_id", "winner", "dominant_component"])
SelectionResult = collections.namedtuple(
    "SelectionResult", ["channel_ids", "reconstruction", "ssim_trace", "reached", "monotone"])
ScaleReconstruction = collections.namedtuple("ScaleReconstruction", ["scale_id", "amfm", "fm_only"])
FeatureStack = collections.namedtuple("FeatureStack", ["names", "layers"])


def _wrap_phase(phase):
    """Map -pi onto pi so phases lie in (-pi, pi]."""
    return np.where(phase <= -math.pi, math.pi, phase)


def _axis_frequency(z, axis):
    n = z.shape[axis]
    center = np.take(z, range(1, n - 1), axis=axis)
    forward = np.take(z, range(2, n), axis=axis)
    backward = np.take(z, range(0, n - 2), axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (forward + backward) / (2.0 * center)
        omega = np.arccos(np.clip(ratio.real, -1.0, 1.0))
    omega = np.where(np.angle(forward * np.conj(center)) < 0, -omega, omega)
    pad = [(0, 0), (0, 0)]
    pad[axis] = (1, 1)
    return np.pad(omega, pad, mode="edge")


def estimate_frequency(analytic, amplitude_floor=AMPLITUDE_FLOOR):
    """Instantaneous frequency (omega1 along columns, omega2 along rows) of a complex grid.

    Pixels with |z| <= amplitude_floor * max|z| are flagged and take the
    estimate of the nearest unflagged pixel.
    """
    z = np.asarray(analytic, dtype=complex)
    if z.ndim != 2 or min(z.shape) < 3:
        raise ValueError("frequency estimation needs a 2D grid of at least 3x3, got {}".format(z.shape))
    magnitude = np.abs(z)
    finite = np.isfinite(magnitude)
    peak = float(np.max(magnitude[finite])) if finite.any() else 0.0
    flagged = ~finite | (magnitude <= amplitude_floor * peak)

    omega1 = _axis_frequency(z, axis=1)
    omega2 = _axis_frequency(z, axis=0)
    bad = flagged | ~np.isfinite(omega1) | ~np.isfinite(omega2)

    if bad.all():
        omega1 = np.zeros(z.shape)
        omega2 = np.zeros(z.shape)
    elif bad.any():
        nearest = distance_transform_edt(bad, return_distances=False, return_indices=True)
        omega1 = omega1[tuple(nearest)]
        omega2 = omega2[tuple(nearest)]
    if bad.any():
        logger.warning("%d of %d pixels below the amplitude floor, frequency copied from neighbours",
                       int(bad.sum()), bad.size)
    return FrequencyEstimate(omega1, omega2, bad)


def demodulate_channel(image, channel, channel_id=None, spectrum=None, amplitude_floor=AMPLITUDE_FLOOR):
    """Analytic component of one channel: amplitude, phase and frequency grids."""
    if not isinstance(image, ImageGrid):
        image = ImageGrid(image)
    image.require_min_dims()
    if spectrum is None:
        spectrum = forward_transform(image)
    bins = spectrum.bins if isinstance(spectrum, SpectrumGrid) else np.asarray(spectrum)
    gain = channel_response(channel, image.width, image.height).bins
    if not channel.is_lowpass:
        # one-sided channel: restore the energy of the suppressed half-plane
        gain = 2.0 * gain
    z = inverse_transform(bins * gain)
    amplitude = np.abs(z)
    phase = _wrap_phase(np.angle(z))
    if channel.is_lowpass:
        zeros = np.zeros(image.shape)
        return AMFMComponent(amplitude, phase, zeros, zeros.copy(), channel_id, np.zeros(image.shape, dtype=bool))
    estimate = estimate_frequency(z, amplitude_floor)
    logger.debug("demodulated channel %s: mean amplitude %.4g", channel_id, float(amplitude.mean()))
    return AMFMComponent(amplitude, phase, estimate.omega1, estimate.omega2, channel_id, estimate.flagged)


def decompose(image, bank, workers=1):
    """One component per bank channel, in bank order."""
    if not isinstance(image, ImageGrid):
        image = ImageGrid(image)
    image.require_min_dims()
    if workers is None or workers < 1:
        raise ValueError("workers must be >= 1, got {}".format(workers))
    spectrum = forward_transform(image)

    def run(channel_id):
        return demodulate_channel(image, bank[channel_id], channel_id, spectrum)

    ids = range(len(bank))
    if workers == 1:
        components = [run(i) for i in ids]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            components = list(pool.map(run, ids))
    return Decomposition(tuple(components), bank, (image.width, image.height))


def dominant_analysis(decomp, scale_id):
    """Per-pixel winner among the channels of one scale, ties to the lowest channel id."""
    ids = decomp.bank.scale_channels(scale_id)
    parts = [decomp.components[i] for i in ids]
    amplitudes = np.stack([c.amplitude for c in parts])
    pick = np.argmax(amplitudes, axis=0)[np.newaxis]

    def gather(field):
        return np.take_along_axis(np.stack([getattr(c, field) for c in parts]), pick, axis=0)[0]

    dominant = AMFMComponent(gather("amplitude"), gather("phase"), gather("omega1"), gather("omega2"),
                             None, gather("flagged"))
    return DominantMap(scale_id, np.asarray(ids)[pick[0]], dominant)


def reconstruct(components, mode=AMFM, shape=None):
    """Sum of A*cos(phase) (AMFM) or cos(phase) (FM_ONLY)."""
    if mode not in RECONSTRUCTION_MODES:
        raise ValueError("unknown reconstruction mode {!r}".format(mode))
    components = list(components)
    if not components:
        if shape is None:
            raise ValueError("an empty reconstruction needs a shape")
        return ImageGrid(np.zeros(shape))
    target = components[0].phase.shape
    total = np.zeros(target)
    for c in components:
        if c.phase.shape != target or c.amplitude.shape != target:
            raise ValueError("component shapes differ: {} vs {}".format(c.phase.shape, target))
        if mode == AMFM:
            total += c.amplitude * np.cos(c.phase)
        else:
            total += np.cos(c.phase)
    return ImageGrid(total)


def scale_reconstructions(decomp):
    """Lowpass term plus the AM-FM and FM-only reconstruction of every scale's dominant component."""
    bank = decomp.bank
    lowpass = reconstruct([decomp.components[bank.lowpass_id]], AMFM)
    rows = []
    for s in range(bank.scales):
        dominant = dominant_analysis(decomp, s).dominant_component
        rows.append(ScaleReconstruction(s, reconstruct([dominant], AMFM), reconstruct([dominant], FM_ONLY)))
    return lowpass, rows


def component_energy(component):
    return float(np.sum(component.amplitude ** 2))


def select_dominant_filters(image, bank, threshold=DEFAULT_THRESHOLD, window=SSIM_WINDOW, dynamic_range=1.0,
                            workers=1, decomp=None):
    """Greedy energy-ordered channel accumulation until SSIM exceeds threshold."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1), got {}".format(threshold))
    if not isinstance(image, ImageGrid):
        image = ImageGrid(image)
    window = fit_ssim_window(window, image.shape)
    if decomp is None:
        decomp = decompose(image, bank, workers)
    energies = np.array([component_energy(c) for c in decomp.components])
    order = np.argsort(-energies, kind="stable")

    total = np.zeros(image.shape)
    channel_ids = []
    trace = []
    reached = False
    for i in order:
        c = decomp.components[i]
        total += c.amplitude * np.cos(c.phase)
        channel_ids.append(int(i))
        trace.append(ssim(total, image, window, dynamic_range))
        if trace[-1] > threshold:
            reached = True
            break

    monotone = bool(np.all(np.diff(trace) >= 0))
    if not monotone:
        logger.warning("ssim trace is not monotone: %s", ["{:.4f}".format(t) for t in trace])
    if reached:
        logger.info("%d of %d channels reach ssim %.4f > %.2f", len(channel_ids), len(bank), trace[-1], threshold)
    else:
        logger.warning("threshold %.2f not reached with all %d channels (ssim %.4f)",
                       threshold, len(bank), trace[-1])
    return SelectionResult(channel_ids, ImageGrid(total), trace, reached, monotone)


def export_features(decomp):
    """Dominant amplitude, frequency magnitude and orientation for every scale."""
    names = []
    layers = []
    for s in range(decomp.bank.scales):
        dominant = dominant_analysis(decomp, s).dominant_component
        orientation = _wrap_phase(np.arctan2(dominant.omega2, dominant.omega1))
        names.extend(["scale{}_amplitude".format(s),
                      "scale{}_frequency_magnitude".format(s),
                      "scale{}_orientation".format(s)])
        layers.extend([dominant.amplitude, np.hypot(dominant.omega1, dominant.omega2), orientation])
    return FeatureStack(names, layers)


_FEATURE_RANGES = {
    "amplitude": (None, None),
    "frequency_magnitude": (0.0, math.pi * math.sqrt(2.0)),
    "orientation": (-math.pi, math.pi),
}


def write_features(stack, directory):
    layers = []
    for name, grid in zip(stack.names, stack.layers):
        lo, hi = _FEATURE_RANGES[name.split("_", 1)[1]]
        layers.append((name, grid, lo, hi))
    return write_stack(layers, directory, extra={"kind": "features"})


def component_layers(prefix, component):
    """Raster layers of one component; phase and frequency use the fixed range [-pi, pi]."""
    return [
        ("{}_amplitude".format(prefix), component.amplitude, None, None),
        ("{}_phase".format(prefix), component.phase, -math.pi, math.pi),
        ("{}_omega1".format(prefix), component.omega1, -math.pi, math.pi),
        ("{}_omega2".format(prefix), component.omega2, -math.pi, math.pi),
    ]


def dump_decomposition(decomp, directory):
    """Every channel's A, phase, omega1 and omega2 as rasters plus a manifest with the bank."""
    layers = []
    for i, c in enumerate(decomp.components):
        layers.extend(component_layers("channel{:02d}".format(i), c))
    width, height = decomp.source_dims
    extra = {"kind": "decomposition", "width": width, "height": height, "bank": decomp.bank.to_data()}
    return write_stack(layers, directory, extra=extra)
