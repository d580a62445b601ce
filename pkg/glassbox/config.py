#!/usr/bin/python
# coding: utf8

"""Per-command settings: defaults, JSON config files and the output directory override."""

import logging
import math
import numbers
import os

from .models import load_json


logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "GLASSBOX_OUTPUT_DIR"
COMMANDS = ("decompose", "dominant-filters", "coverage", "actmax", "explain", "train", "synth")

INT, FLOAT, TEXT, INTS, FLOATS, SOURCE = "integer", "number", "string", "integer list", "number list", "source"

SETTING_TYPES = {
    "output_dir": TEXT, "workers": INT,
    "scales": INT, "orientations": INT, "lowpass_cutoff": FLOAT,
    "input": TEXT, "threshold": FLOAT, "ssim_window": INT,
    "width": INT, "height": INT, "channels": INTS,
    "net": TEXT, "target_class": INT, "mode": TEXT, "lam": FLOAT, "alpha": FLOAT, "expert": TEXT,
    "decoder": TEXT, "init": FLOATS, "step": FLOAT, "max_iters": INT, "tol": FLOAT, "image_shape": INTS,
    "instance": TEXT, "weights": FLOATS, "intercept": FLOAT, "block": INT, "features": INT, "samples": INT,
    "kernel_width": FLOAT, "seed": INT,
    "model": TEXT, "dataset": SOURCE, "layer_sizes": INTS, "output": TEXT, "learning_rate": FLOAT,
    "epochs": INT, "batch_size": INT, "hidden": INT,
    "spec": SOURCE,
}


def _bank_settings(settings):
    settings.setdefault("scales", 3)
    settings.setdefault("orientations", 8)
    settings.setdefault("lowpass_cutoff", math.pi / 16)


def init_settings(command, settings):
    """Fill in the defaults of one command; present keys win."""
    if command not in COMMANDS:
        raise ValueError("unknown command {!r}".format(command))
    settings.setdefault("output_dir", "glassbox-out")
    settings.setdefault("workers", 1)

    if command == "decompose":
        _bank_settings(settings)
        settings.setdefault("input", None)
    elif command == "dominant-filters":
        _bank_settings(settings)
        settings.setdefault("input", None)
        settings.setdefault("threshold", 0.85)
        settings.setdefault("ssim_window", 11)
    elif command == "coverage":
        _bank_settings(settings)
        settings.setdefault("width", 256)
        settings.setdefault("height", 256)
        settings.setdefault("channels", None)
    elif command == "actmax":
        settings.setdefault("net", None)
        settings.setdefault("target_class", 0)
        settings.setdefault("mode", "plain")
        settings.setdefault("lam", 0.0)
        settings.setdefault("alpha", 1.0)
        settings.setdefault("expert", None)
        settings.setdefault("decoder", None)
        settings.setdefault("init", None)
        settings.setdefault("step", 0.1)
        settings.setdefault("max_iters", 10000)
        settings.setdefault("tol", 1e-6)
        settings.setdefault("image_shape", None)
    elif command == "explain":
        settings.setdefault("instance", None)
        settings.setdefault("weights", None)
        settings.setdefault("intercept", 0.0)
        settings.setdefault("net", None)
        settings.setdefault("target_class", 0)
        settings.setdefault("block", 8)
        settings.setdefault("features", None)
        settings.setdefault("samples", 1000)
        settings.setdefault("kernel_width", 0.25)
        settings.setdefault("seed", 0)
    elif command == "train":
        settings.setdefault("model", "net")
        settings.setdefault("dataset", {"kind": "xor"})
        settings.setdefault("layer_sizes", [2, 8, 2])
        settings.setdefault("output", "softmax")
        settings.setdefault("learning_rate", 0.5)
        settings.setdefault("epochs", 2000)
        settings.setdefault("batch_size", 4)
        settings.setdefault("seed", 7)
        settings.setdefault("hidden", 4)
    elif command == "synth":
        settings.setdefault("spec", {"kind": "pure_cosine", "width": 256, "height": 256})
    return settings


def load_config(path, command):
    """Settings of one command from a JSON file; a "<command>" section wins over top-level keys."""
    data = load_json(path)
    if not isinstance(data, dict):
        raise ValueError("config file {} must hold a JSON object".format(path))
    settings = {k: v for k, v in data.items() if k not in COMMANDS}
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ValueError("config section {!r} must be a JSON object".format(command))
    settings.update(section)
    return settings


def _is_int(value):
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool) and math.isfinite(value)


def check_setting(key, value, kind):
    """Validated copy of one setting; integers are accepted where numbers are expected."""
    if kind == INT and _is_int(value):
        return int(value)
    if kind == FLOAT and _is_number(value):
        return float(value)
    if kind == TEXT and isinstance(value, str):
        return value
    if kind == SOURCE and isinstance(value, (str, dict)):
        return value
    if kind in (INTS, FLOATS) and isinstance(value, (list, tuple)):
        item = INT if kind == INTS else FLOAT
        try:
            return [check_setting(key, v, item) for v in value]
        except ValueError:
            pass
    raise ValueError("setting {} expects {}, got {!r}".format(key, kind, value))


def resolve_settings(command, flags, config_path=None, environ=None):
    """flags > config file > defaults; the environment may move the output directory."""
    environ = os.environ if environ is None else environ
    settings = {}
    if config_path is not None:
        settings.update(load_config(config_path, command))
    if OUTPUT_DIR_ENV in environ and "output_dir" not in flags:
        settings["output_dir"] = environ[OUTPUT_DIR_ENV]
    settings.update(flags)
    init_settings(command, settings)
    defaults = init_settings(command, {})
    unknown = sorted(set(settings) - set(defaults))
    if unknown:
        raise ValueError("unknown settings for {}: {}".format(command, ", ".join(unknown)))
    for key, value in settings.items():
        if value is None and defaults[key] is None:
            continue
        settings[key] = check_setting(key, value, SETTING_TYPES[key])
    logger.debug("settings for %s: %s", command, settings)
    return settings
