#!/usr/bin/env python
# -*- coding: utf-8 -*-

import math
import unittest

import numpy as np

from glassbox.synth import SyntheticSpec, blob_margin, generate_dataset, generate_image
from .util import TempDir


class ImageKindTests(unittest.TestCase):
    def test_pure_cosine_truth(self):
        generated = generate_image(SyntheticSpec("pure_cosine", {"amplitude": 0.7, "u": 0.9, "v": 0.3},
                                                 width=32, height=24))
        self.assertEqual(generated.image.shape, (24, 32))
        self.assertTrue(np.all(generated.truth["amplitude"] == 0.7))
        self.assertTrue(np.all(generated.truth["omega1"] == 0.9))
        self.assertTrue(np.all(generated.truth["omega2"] == 0.3))
        self.assertAlmostEqual(generated.image.samples[2, 5], 0.7 * math.cos(0.9 * 5 + 0.3 * 2), places=12)
        phase = generated.truth["phase"]
        self.assertTrue(np.all(phase > -math.pi) and np.all(phase <= math.pi))

    def test_radial_chirp_frequency(self):
        generated = generate_image(SyntheticSpec("radial_chirp", {"alpha": 0.002}, width=256, height=256))
        self.assertAlmostEqual(generated.truth["omega1"][128, 178], 0.2, places=12)
        self.assertEqual(generated.truth["omega2"][128, 178], 0.0)
        self.assertEqual(generated.image.samples[128, 128], 1.0)

    def test_radial_chirp_aliasing_rejected(self):
        with self.assertRaises(ValueError):
            generate_image(SyntheticSpec("radial_chirp", {"alpha": 0.05}, width=256, height=256))

    def test_multi_harmonic(self):
        components = [{"u": 0.5, "v": 0.0, "amplitude": 1.0}, {"u": 0.0, "v": 1.5, "amplitude": 0.25}]
        generated = generate_image(SyntheticSpec("multi_harmonic", {"components": components},
                                                 width=16, height=16))
        self.assertEqual(len(generated.truth["components"]), 2)
        self.assertAlmostEqual(generated.image.samples[3, 4], math.cos(2.0) + 0.25 * math.cos(4.5), places=12)
        with self.assertRaises(ValueError):
            generate_image(SyntheticSpec("multi_harmonic", {"components": []}, width=16, height=16))

    def test_half_split(self):
        generated = generate_image(SyntheticSpec("half_split", width=64, height=32))
        labels = generated.truth["labels"]
        self.assertTrue(np.all(labels[:, :28] == 0))
        self.assertTrue(np.all(labels[:, 37:] == 1))
        self.assertEqual(generated.truth["seam_column"], 32.0)
        x1 = np.arange(64.0)
        self.assertTrue(np.allclose(generated.image.samples[0, :28], np.cos(2.0 * x1[:28])))
        self.assertTrue(np.allclose(generated.image.samples[0, 37:], 1.0))

    def test_offset_and_noise(self):
        spec = SyntheticSpec("pure_cosine", {"offset": 0.5}, width=16, height=16, seed=3, noise=0.01)
        a = generate_image(spec).image.samples
        b = generate_image(spec).image.samples
        self.assertTrue(np.array_equal(a, b))
        clean = generate_image(SyntheticSpec("pure_cosine", {"offset": 0.5}, width=16, height=16)).image.samples
        self.assertLess(np.max(np.abs(a - clean)), 0.1)
        self.assertGreater(np.max(np.abs(a - clean)), 0)

    def test_invalid_specs(self):
        for kind, parameters in (("pure_cosine", {"u": 4.0}), ("pure_cosine", {"u": 0.0, "v": 0.0}),
                                 ("pure_cosine", {"amplitude": -1.0}), ("half_split", {"left": [1.0]})):
            with self.assertRaises(ValueError):
                generate_image(SyntheticSpec(kind, parameters, width=16, height=16))
        with self.assertRaises(ValueError):
            SyntheticSpec("pure_cosine", width=16)
        with self.assertRaises(ValueError):
            SyntheticSpec("stripes", width=16, height=16)
        with self.assertRaises(ValueError):
            SyntheticSpec("pure_cosine", width=16, height=16, noise=-0.1)
        with self.assertRaises(ValueError):
            generate_image(SyntheticSpec("xor"))
        with self.assertRaises(ValueError):
            generate_dataset(SyntheticSpec("pure_cosine", width=8, height=8))


class DatasetKindTests(unittest.TestCase):
    def test_xor(self):
        data = generate_dataset(SyntheticSpec("xor"))
        self.assertEqual(data.inputs.tolist(), [[0, 0], [0, 1], [1, 0], [1, 1]])
        self.assertEqual(data.labels.tolist(), [0, 1, 1, 0])
        repeated = generate_dataset(SyntheticSpec("xor", {"repeats": 3}, seed=1, noise=0.05))
        self.assertEqual(repeated.inputs.shape, (12, 2))
        self.assertEqual(repeated.labels.tolist(), [0, 1, 1, 0] * 3)

    def test_two_blob_margin(self):
        spec = SyntheticSpec("two_blob", count=200, seed=0)
        data = generate_dataset(spec)
        self.assertEqual(data.inputs.shape, (200, 2))
        self.assertEqual(np.bincount(data.labels).tolist(), [100, 100])
        self.assertGreaterEqual(blob_margin(data.inputs, data.labels, [[-3.0, 0.0], [3.0, 0.0]]), 1.0)
        self.assertTrue(np.array_equal(generate_dataset(spec).inputs, data.inputs))

    def test_two_blob_unreachable_margin(self):
        spec = SyntheticSpec("two_blob", {"means": [[-0.1, 0.0], [0.1, 0.0]], "margin": 5.0}, count=50)
        with self.assertRaises(ValueError):
            generate_dataset(spec)

    def test_two_blob_validation(self):
        with self.assertRaises(ValueError):
            generate_dataset(SyntheticSpec("two_blob", {"means": [[1.0, 1.0], [1.0, 1.0]]}))


class SpecPersistenceTests(unittest.TestCase):
    def test_json_round_trip(self):
        spec = SyntheticSpec("half_split", {"left": [1.0, 0.0]}, width=32, height=16, seed=4, noise=0.2)
        tmp = TempDir()
        with tmp:
            spec.save(tmp.join("spec.json"))
            loaded = SyntheticSpec.from_file(tmp.join("spec.json"))
        self.assertEqual(loaded.to_data(), spec.to_data())
        self.assertEqual(str(loaded), "<SyntheticSpec(half_split)>")
