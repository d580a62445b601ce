#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import os
import unittest

import mock
import numpy as np

from glassbox.cli import main
from glassbox.image import ImageGrid, read_stack, save_raster
from glassbox.models import load_json
from glassbox.tinynet import save_net
from .util import MockLoadRaster, TempDir, harmonic_image, single_layer_net


def cosine_image(size=64):
    x1, x2 = np.meshgrid(np.arange(size, dtype=float), np.arange(size, dtype=float))
    return ImageGrid(0.5 + 0.3 * np.cos(0.9 * x1 + 0.3 * x2))


class CliTests(unittest.TestCase):
    def setUp(self):
        self.tmp = TempDir()
        self.tmp.__enter__()
        self.out = self.tmp.join("out")

    def tearDown(self):
        self.tmp.__exit__(None, None, None)

    def run_cli(self, *argv, **kwargs):
        return main(list(argv) + ["--output-dir", self.out], environ=kwargs.get("environ", {}))

    def report(self):
        return load_json(os.path.join(self.out, "report.json"))

    def write_json(self, name, data):
        path = self.tmp.join(name)
        with open(path, "w") as f:
            json.dump(data, f)
        return path

    def test_missing_input(self):
        self.assertEqual(self.run_cli("decompose", "--input", self.tmp.join("absent.pgm")), 1)
        self.assertFalse(os.path.exists(self.out))
        self.assertEqual(self.run_cli("decompose"), 1)

    def test_no_command(self):
        self.assertEqual(main([], environ={}), 1)

    def test_malformed_flag_is_bad_input(self):
        path = self.tmp.join("cosine.pgm")
        save_raster(cosine_image(16), path)
        self.assertEqual(self.run_cli("dominant-filters", "--input", path, "--threshold", "abc"), 1)
        self.assertEqual(self.run_cli("coverage", "--width", "wide"), 1)
        self.assertEqual(self.run_cli("actmax", "--mode", "dream"), 1)
        self.assertFalse(os.path.exists(self.out))

    def test_mistyped_config_is_bad_input(self):
        path = self.tmp.join("cosine.pgm")
        save_raster(cosine_image(16), path)
        config = self.write_json("typed.json", {"dominant-filters": {"threshold": "0.9"}, "coverage": {"width": "32"}})
        self.assertEqual(self.run_cli("dominant-filters", "--input", path, "--config", config), 1)
        self.assertEqual(self.run_cli("coverage", "--config", config), 1)
        self.assertFalse(os.path.exists(self.out))

    def test_dominant_filters_on_tiny_image(self):
        path = self.tmp.join("tiny.pgm")
        save_raster(ImageGrid(np.random.default_rng(8).uniform(size=(8, 8))), path)
        self.assertEqual(self.run_cli("dominant-filters", "--input", path), 0)
        self.assertGreaterEqual(self.report()["count"], 1)

    def test_decompose(self):
        path = self.tmp.join("cosine.pgm")
        save_raster(cosine_image(), path)
        self.assertEqual(self.run_cli("decompose", "--input", path), 0)
        report = self.report()
        self.assertEqual(report["command"], "decompose")
        self.assertEqual(report["channels"], 25)
        self.assertEqual(len(report["layers"]), 2 + 3 * 6)
        manifest, layers = read_stack(self.out)
        self.assertEqual(len(manifest["layers"]), 20)
        self.assertTrue(os.path.exists(os.path.join(self.out, "bank.json")))
        fm = dict(layers)["scale1_fm_only"]
        self.assertTrue(np.all(np.abs(fm) <= 1.0 + 1e-9))

    def test_dominant_filters(self):
        path = self.tmp.join("harmonics.pgm")
        save_raster(ImageGrid(harmonic_image(64, [(22, 0), (0, 9)], 0.1)), path)
        self.assertEqual(self.run_cli("dominant-filters", "--input", path), 0)
        report = self.report()
        self.assertEqual(report["threshold"], 0.85)
        self.assertEqual(report["config"]["threshold"], 0.85)
        self.assertEqual(len(report["ssim_trace"]), report["count"])
        self.assertEqual(len(report["channel_ids"]), report["count"])

    def test_coverage(self):
        self.assertEqual(self.run_cli("coverage", "--width", "32", "--height", "32", "--channels", "0", "5"), 0)
        self.assertEqual(self.report()["channels"], 2)
        self.assertEqual(self.run_cli("coverage", "--channels", "99"), 1)

    def test_actmax(self):
        net_path = self.tmp.join("net.json")
        save_net(single_layer_net([[1.0, 0.0], [-1.0, 0.0]]), net_path)
        code = self.run_cli("actmax", "--net", net_path, "--lam", "1e6", "--max-iters", "2000")
        self.assertEqual(code, 0)
        self.assertLessEqual(self.report()["x_norm"], 1e-5)
        self.assertEqual(self.run_cli("actmax", "--net", net_path, "--mode", "expert"), 1)

    def test_actmax_prototype_raster(self):
        net_path = self.tmp.join("net.json")
        save_net(single_layer_net([[1.0, 0.0, 0.5, 0.0], [-1.0, 0.0, 0.0, 0.5]]), net_path)
        code = self.run_cli("actmax", "--net", net_path, "--lam", "0.5", "--image-shape", "2", "2")
        self.assertEqual(code, 0)
        manifest, layers = read_stack(self.out)
        self.assertEqual(layers[0][1].shape, (2, 2))
        self.assertEqual(self.run_cli("actmax", "--net", net_path, "--image-shape", "3", "2"), 1)

    def test_explain_linear_box(self):
        instance = self.write_json("instance.json", [1.0, 1.0, 1.0])
        code = self.run_cli("explain", "--instance", instance, "--weights", "2", "-1", "0.5",
                            "--intercept", "0.25", "--samples", "100")
        self.assertEqual(code, 0)
        report = self.report()
        self.assertTrue(np.allclose(report["feature_weights"], [2.0, -1.0, 0.5], atol=1e-6))
        self.assertAlmostEqual(report["intercept"], 0.25, places=6)
        self.assertEqual(report["d_prime"], 3)
        self.assertEqual(self.run_cli("explain", "--instance", instance, "--weights", "1"), 1)

    def test_explain_image(self):
        path = self.tmp.join("image.pgm")
        save_raster(cosine_image(16), path)
        weights = [0.0] * 256
        weights[0] = 1.0
        code = self.run_cli("explain", "--instance", path, "--weights", *[str(w) for w in weights],
                            "--samples", "40", "--features", "2")
        self.assertEqual(code, 0)
        self.assertEqual(self.report()["d_prime"], 4)
        manifest, layers = read_stack(self.out)
        self.assertEqual(layers[0][0], "heat_map")

    def test_train_xor(self):
        self.assertEqual(self.run_cli("train"), 0)
        report = self.report()
        self.assertEqual(report["accuracy"], 1.0)
        self.assertEqual(len(report["loss_trace"]), 2000)
        self.assertTrue(os.path.exists(os.path.join(self.out, "net.json")))

    def test_train_expert(self):
        code = self.run_cli("train", "--model", "rbm", "--dataset", "two_blob", "--epochs", "5",
                            "--learning-rate", "0.01", "--hidden", "3")
        self.assertEqual(code, 0)
        self.assertEqual(len(self.report()["reconstruction_trace"]), 5)
        self.assertTrue(os.path.exists(os.path.join(self.out, "expert.json")))

    def test_synth(self):
        spec = self.write_json("spec.json", {"kind": "half_split", "width": 32, "height": 16})
        self.assertEqual(self.run_cli("synth", "--spec", spec), 0)
        manifest, layers = read_stack(self.out)
        self.assertEqual([name for name, _ in layers], ["image", "labels"])
        self.assertEqual(self.run_cli("synth", "--spec", "xor"), 0)
        self.assertEqual(self.report()["count"], 4)
        self.assertEqual(len(load_json(os.path.join(self.out, "dataset.json"))["labels"]), 4)

    def test_train_on_saved_dataset(self):
        self.assertEqual(self.run_cli("synth", "--spec", "xor"), 0)
        saved = self.tmp.join("xor.json")
        os.rename(os.path.join(self.out, "dataset.json"), saved)
        self.assertEqual(self.run_cli("train", "--dataset", saved, "--epochs", "3"), 0)
        self.assertEqual(len(self.report()["loss_trace"]), 3)

    def test_config_file_and_environment(self):
        config = self.write_json("config.json", {"coverage": {"width": 16, "height": 16}})
        env_out = self.tmp.join("env-out")
        code = main(["coverage", "--config", config], environ={"GLASSBOX_OUTPUT_DIR": env_out})
        self.assertEqual(code, 0)
        report = load_json(os.path.join(env_out, "report.json"))
        self.assertEqual(report["config"]["width"], 16)
        bad = self.write_json("bad.json", {"coverage": {"colour": "red"}})
        self.assertEqual(self.run_cli("coverage", "--config", bad), 1)

    def assert_replays(self, command):
        first = self.report()
        config = self.write_json("{}-replay.json".format(command), {command: first["config"]})
        again = self.tmp.join("{}-again".format(command))
        self.assertEqual(main([command, "--config", config, "--output-dir", again], environ={}), 0)
        self.assertEqual(sorted(os.listdir(self.out)), sorted(os.listdir(again)))
        for name in os.listdir(self.out):
            if name == "report.json":
                continue
            with open(os.path.join(self.out, name), "rb") as a, open(os.path.join(again, name), "rb") as b:
                self.assertEqual(a.read(), b.read(), name)
        second = load_json(os.path.join(again, "report.json"))
        self.assertEqual(second["config"].pop("output_dir"), again)
        first["config"].pop("output_dir")
        self.assertEqual(first, second)

    def test_replay_from_echoed_config(self):
        self.assertEqual(self.run_cli("train", "--epochs", "50"), 0)
        self.assert_replays("train")

        path = self.tmp.join("harmonics.pgm")
        save_raster(ImageGrid(harmonic_image(64, [(22, 0), (0, 9)], 0.1)), path)
        self.out = self.tmp.join("dominant")
        self.assertEqual(self.run_cli("dominant-filters", "--input", path), 0)
        self.assert_replays("dominant-filters")

        path = self.tmp.join("image.pgm")
        save_raster(cosine_image(16), path)
        weights = [str(w) for w in np.linspace(-1.0, 1.0, 256)]
        self.out = self.tmp.join("explain")
        self.assertEqual(self.run_cli("explain", "--instance", path, "--weights", *weights, "--samples", "60"), 0)
        self.assert_replays("explain")

    def test_invariant_violation(self):
        with MockLoadRaster(cosine_image(16)):
            with mock.patch("glassbox.cli.write_stack", return_value={"layers": []}):
                self.assertEqual(self.run_cli("decompose", "--input", "mocked.pgm"), 2)
        self.assertFalse(os.path.exists(os.path.join(self.out, "report.json")))

    def test_unexpected_error(self):
        with MockLoadRaster(cosine_image(16)) as load:
            with mock.patch("glassbox.cli.scale_reconstructions", side_effect=RuntimeError("boom")):
                self.assertEqual(self.run_cli("decompose", "--input", "mocked.pgm"), 2)
        load.assert_called_once_with("mocked.pgm")
