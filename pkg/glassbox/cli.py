#!/usr/bin/python
# coding: utf8

"""glassbox command line.

Every command validates its inputs before touching the output directory and
writes report.json last, so a present report marks a complete run.
Exit codes: 0 success, 1 invalid input or I/O failure, 2 internal error.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import Workbench, __version__
from .actmax import Decoder, load_expert, save_expert
from .amfm import AMFM, component_layers, dominant_analysis, reconstruct, scale_reconstructions
from .bank import coverage_map
from .config import resolve_settings
from .image import as_samples, load_raster, write_stack
from .models import InvariantError, OptimizationError, dataset_from_data, dataset_to_data, dump_json, load_json
from .posthoc import block_mapping, heat_map, tabular_mapping
from .synth import DATASET_KINDS, IMAGE_KINDS, SyntheticSpec
from .tinynet import OUTPUTS, DenseNet, accuracy, load_net, make_train_config, save_net


logger = logging.getLogger(__name__)

REPORT = "report.json"
MANIFEST = "manifest.json"


def check(condition, message):
    if not condition:
        raise InvariantError(message)


def _require(settings, key):
    if settings.get(key) is None:
        raise ValueError("missing required setting {!r}".format(key))
    return settings[key]


def _output_dir(settings):
    directory = settings["output_dir"]
    if not os.path.isdir(directory):
        os.makedirs(directory)
    return directory


def write_report(settings, command, body):
    directory = _output_dir(settings)
    report = dict(body)
    report["command"] = command
    report["config"] = settings
    report["version"] = __version__
    dump_json(os.path.join(directory, REPORT), report)
    logger.info("report written to %s", os.path.join(directory, REPORT))
    return report


def _bank(bench, settings):
    return bench.design_bank(settings["scales"], settings["orientations"], settings["lowpass_cutoff"])


def cmd_decompose(bench, settings):
    image = load_raster(_require(settings, "input"))
    bank = _bank(bench, settings)
    decomp = bench.decompose(image, bank)
    check(len(decomp.components) == len(bank), "component count differs from channel count")

    lowpass, rows = scale_reconstructions(decomp)
    layers = [("lowpass", lowpass.samples, None, None),
              ("reconstruction_amfm", reconstruct(decomp.components, AMFM).samples, None, None)]
    for row in rows:
        dominant = dominant_analysis(decomp, row.scale_id).dominant_component
        layers.extend(component_layers("scale{}".format(row.scale_id), dominant))
        layers.append(("scale{}_amfm".format(row.scale_id), row.amfm.samples, None, None))
        layers.append(("scale{}_fm_only".format(row.scale_id), row.fm_only.samples, -1.0, 1.0))

    directory = _output_dir(settings)
    bank.save(os.path.join(directory, "bank.json"))
    manifest = write_stack(layers, directory, MANIFEST, extra={
        "width": image.width, "height": image.height, "bank": bank.to_data()})
    check(len(manifest["layers"]) == len(layers), "manifest does not list every layer")
    return write_report(settings, "decompose", {
        "channels": len(bank),
        "layers": [entry["file"] for entry in manifest["layers"]],
    })


def cmd_dominant_filters(bench, settings):
    image = load_raster(_require(settings, "input"))
    bank = _bank(bench, settings)
    result = bench.select_filters(image, bank, settings["threshold"], settings["ssim_window"])
    check(len(result.ssim_trace) == len(result.channel_ids), "ssim trace and channel list differ in length")
    coverage = coverage_map(bank, image.width, image.height, result.channel_ids)

    directory = _output_dir(settings)
    write_stack([("coverage", coverage.samples, 0.0, None),
                 ("reconstruction", result.reconstruction.samples, None, None)], directory, MANIFEST)
    return write_report(settings, "dominant-filters", {
        "channel_ids": result.channel_ids,
        "count": len(result.channel_ids),
        "ssim_trace": result.ssim_trace,
        "reached": result.reached,
        "monotone": result.monotone,
        "threshold": settings["threshold"],
    })


def cmd_coverage(bench, settings):
    bank = _bank(bench, settings)
    channels = settings["channels"]
    if channels is not None:
        bad = [c for c in channels if not 0 <= c < len(bank)]
        if bad:
            raise ValueError("channel ids {} not in bank of {}".format(bad, len(bank)))
    coverage = bench.coverage(bank, settings["width"], settings["height"], channels)
    directory = _output_dir(settings)
    write_stack([("coverage", coverage.samples, 0.0, None)], directory, MANIFEST)
    return write_report(settings, "coverage", {
        "min": float(coverage.samples.min()),
        "max": float(coverage.samples.max()),
        "channels": len(bank) if channels is None else len(channels),
    })


def cmd_actmax(bench, settings):
    net = load_net(_require(settings, "net"))
    mode = settings["mode"]
    c = settings["target_class"]
    common = dict(step=settings["step"], max_iters=settings["max_iters"], tol=settings["tol"])
    if mode == "plain":
        result = bench.prototype(net, c, lam=settings["lam"], init=settings["init"], **common)
    elif mode == "expert":
        expert = load_expert(_require(settings, "expert"))
        result = bench.expert_prototype(net, c, expert, alpha=settings["alpha"], lam=settings["lam"],
                                        init=settings["init"], **common)
    elif mode == "code":
        decoder = Decoder(load_net(_require(settings, "decoder")))
        result = bench.code_prototype(net, c, decoder, lam=settings["lam"], init_z=settings["init"], **common)
    else:
        raise ValueError("unknown actmax mode {!r}".format(mode))
    check(bool(np.all(np.isfinite(result.x_star))), "prototype is not finite")
    check(all(b >= a for a, b in zip(result.objective_trace, result.objective_trace[1:])),
          "objective trace decreased")

    shape = settings["image_shape"]
    if shape is not None:
        width, height = shape
        if width * height != result.x_star.shape[0]:
            raise ValueError("image shape {}x{} does not hold {} values".format(
                width, height, result.x_star.shape[0]))
        write_stack([("prototype", result.x_star.reshape(height, width), None, None)], _output_dir(settings),
                    MANIFEST)
    return write_report(settings, "actmax", {
        "x_star": result.x_star,
        "z_star": result.z_star,
        "x_norm": float(np.linalg.norm(result.x_star)),
        "objective_trace": result.objective_trace,
        "iterations": result.iterations,
        "converged": result.converged,
        "class_probability": float(net.forward(result.x_star)[c]),
    })


def _blackbox(settings, size):
    if settings["weights"] is not None:
        beta = np.asarray(settings["weights"], dtype=float)
        if beta.shape[0] != size:
            raise ValueError("{} black-box weights for an instance of size {}".format(beta.shape[0], size))
        intercept = float(settings["intercept"])
        return lambda x: float(beta.dot(np.ravel(x))) + intercept
    if settings["net"] is not None:
        net = load_net(settings["net"])
        if net.input_dim != size:
            raise ValueError("net input {} does not match instance size {}".format(net.input_dim, size))
        c = settings["target_class"]
        return lambda x: float(net.forward(np.ravel(x))[c])
    raise ValueError("explain needs black-box weights or a net")


def cmd_explain(bench, settings):
    path = _require(settings, "instance")
    if path.endswith((".pgm", ".pnm")):
        mapping = block_mapping(load_raster(path), settings["block"])
    else:
        mapping = tabular_mapping(load_json(path))
    blackbox = _blackbox(settings, mapping.instance.size)
    K = settings["features"] or mapping.d_prime
    explanation = bench.explain(blackbox, mapping, K, n=settings["samples"], kernel_width=settings["kernel_width"],
                                seed=settings["seed"])
    check(int(np.count_nonzero(explanation.feature_weights)) <= len(explanation.selected),
          "weights outside the selected features")
    if mapping.block_shape is not None:
        write_stack([("heat_map", heat_map(mapping, explanation.feature_weights), None, None)],
                    _output_dir(settings), MANIFEST)
    body = explanation.to_data()
    body["d_prime"] = mapping.d_prime
    return write_report(settings, "explain", body)


def _dataset_spec(value):
    if isinstance(value, dict):
        return SyntheticSpec.create_from_data(value)
    if value in DATASET_KINDS:
        return SyntheticSpec(value)
    return SyntheticSpec.from_file(value)


def _training_data(bench, value):
    """A dataset kind, a synthetic spec (inline or file) or a dataset file written by synth."""
    if isinstance(value, dict) or value in DATASET_KINDS:
        return bench.synth_dataset(_dataset_spec(value))
    data = load_json(value)
    if isinstance(data, dict) and "inputs" in data:
        return dataset_from_data(data)
    return bench.synth_dataset(SyntheticSpec.create_from_data(data))


def cmd_train(bench, settings):
    dataset = _training_data(bench, settings["dataset"])
    if settings["model"] == "net":
        config = make_train_config(settings["learning_rate"], settings["epochs"], settings["batch_size"],
                                   settings["seed"])
        net = DenseNet.initialize(settings["layer_sizes"], settings["seed"], settings["output"])
        if net.input_dim != dataset.inputs.shape[1]:
            raise ValueError("net input {} does not match data dimension {}".format(
                net.input_dim, dataset.inputs.shape[1]))
        result = bench.train_net(net, dataset, config)
        directory = _output_dir(settings)
        save_net(result.net, os.path.join(directory, "net.json"))
        body = {"loss_trace": result.loss_trace, "final_loss": result.loss_trace[-1],
                "accuracy": accuracy(result.net, dataset)}
    elif settings["model"] == "rbm":
        result = bench.train_expert(dataset.inputs, settings["hidden"], epochs=settings["epochs"],
                                    lr=settings["learning_rate"], seed=settings["seed"])
        directory = _output_dir(settings)
        save_expert(result.expert, os.path.join(directory, "expert.json"))
        body = {"reconstruction_trace": result.reconstruction_trace,
                "sigma_diag": result.expert.sigma_diag}
    else:
        raise ValueError("unknown model kind {!r}".format(settings["model"]))
    return write_report(settings, "train", body)


def cmd_synth(bench, settings):
    value = settings["spec"]
    if isinstance(value, dict):
        spec = SyntheticSpec.create_from_data(value)
    elif value in IMAGE_KINDS:
        spec = SyntheticSpec(value, width=256, height=256)
    else:
        spec = _dataset_spec(value)
    if spec.is_image:
        generated = bench.synth_image(spec)
        layers = [("image", generated.image.samples, None, None)]
        truth = generated.truth
        if "omega1" in truth:
            layers.append(("omega1", truth["omega1"], -np.pi, np.pi))
            layers.append(("omega2", truth["omega2"], -np.pi, np.pi))
        if "labels" in truth:
            layers.append(("labels", truth["labels"], 0.0, 1.0))
        directory = _output_dir(settings)
        write_stack(layers, directory, MANIFEST)
        body = {"spec": spec.to_data(), "width": generated.image.width, "height": generated.image.height,
                "mean": float(as_samples(generated.image).mean())}
    else:
        dataset = bench.synth_dataset(spec)
        directory = _output_dir(settings)
        dump_json(os.path.join(directory, "dataset.json"), dataset_to_data(dataset))
        body = {"spec": spec.to_data(), "count": int(dataset.labels.shape[0])}
    return write_report(settings, "synth", body)


HANDLERS = {
    "decompose": cmd_decompose,
    "dominant-filters": cmd_dominant_filters,
    "coverage": cmd_coverage,
    "actmax": cmd_actmax,
    "explain": cmd_explain,
    "train": cmd_train,
    "synth": cmd_synth,
}


def _add(parser, *names, **kwargs):
    kwargs["default"] = argparse.SUPPRESS
    parser.add_argument(*names, **kwargs)


def _bank_flags(parser):
    _add(parser, "--scales", type=int)
    _add(parser, "--orientations", type=int)
    _add(parser, "--lowpass-cutoff", type=float)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON settings file")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")
    _add(common, "--output-dir")
    _add(common, "--workers", type=int)

    parser = argparse.ArgumentParser(prog="glassbox", description="AM-FM decomposition and model explanations")
    parser.add_argument("--version", action="version", version="%(prog)s {}".format(__version__))
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("decompose", parents=[common], help="per-scale dominant AM-FM components")
    _add(p, "--input")
    _bank_flags(p)

    p = sub.add_parser("dominant-filters", parents=[common], help="greedy SSIM-gated channel selection")
    _add(p, "--input")
    _add(p, "--threshold", type=float)
    _add(p, "--ssim-window", type=int)
    _bank_flags(p)

    p = sub.add_parser("coverage", parents=[common], help="frequency coverage of the bank")
    _add(p, "--width", type=int)
    _add(p, "--height", type=int)
    _add(p, "--channels", type=int, nargs="+")
    _bank_flags(p)

    p = sub.add_parser("actmax", parents=[common], help="class prototype search")
    _add(p, "--net")
    _add(p, "--target-class", type=int)
    _add(p, "--mode", choices=("plain", "expert", "code"))
    _add(p, "--lam", type=float)
    _add(p, "--alpha", type=float)
    _add(p, "--expert")
    _add(p, "--decoder")
    _add(p, "--init", type=float, nargs="+")
    _add(p, "--step", type=float)
    _add(p, "--max-iters", type=int)
    _add(p, "--tol", type=float)
    _add(p, "--image-shape", type=int, nargs=2)

    p = sub.add_parser("explain", parents=[common], help="local surrogate explanation")
    _add(p, "--instance")
    _add(p, "--weights", type=float, nargs="+")
    _add(p, "--intercept", type=float)
    _add(p, "--net")
    _add(p, "--target-class", type=int)
    _add(p, "--block", type=int)
    _add(p, "--features", type=int)
    _add(p, "--samples", type=int)
    _add(p, "--kernel-width", type=float)
    _add(p, "--seed", type=int)

    p = sub.add_parser("train", parents=[common], help="train a classifier or a density expert")
    _add(p, "--model", choices=("net", "rbm"))
    _add(p, "--dataset")
    _add(p, "--layer-sizes", type=int, nargs="+")
    _add(p, "--output", choices=OUTPUTS)
    _add(p, "--learning-rate", type=float)
    _add(p, "--epochs", type=int)
    _add(p, "--batch-size", type=int)
    _add(p, "--seed", type=int)
    _add(p, "--hidden", type=int)

    p = sub.add_parser("synth", parents=[common], help="synthetic images and datasets")
    _add(p, "--spec")
    return parser


def setup_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv=None, environ=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help and --version exit 0; malformed flags are bad input
        return 0 if not e.code else 1
    if args.command is None:
        parser.print_help()
        return 1
    setup_logging(args.verbose, args.quiet)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose", "quiet")}
    try:
        settings = resolve_settings(args.command, flags, args.config, environ)
        bench = Workbench(workers=settings["workers"])
        HANDLERS[args.command](bench, settings)
        for line in bench.stats():
            logger.debug(line)
    except InvariantError as e:
        logger.error("internal invariant violated: %s", e)
        return 2
    except (ValueError, OSError, KeyError, OptimizationError) as e:
        logger.error("%s failed: %s", args.command, e)
        return 1
    except Exception:
        logger.exception("%s failed unexpectedly", args.command)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
