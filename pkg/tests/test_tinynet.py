#!/usr/bin/env python
# -*- coding: utf-8 -*-

import unittest

import numpy as np

from glassbox.synth import SyntheticSpec, generate_dataset
from glassbox.tinynet import (DenseNet, LINEAR, SOFTMAX, accuracy, load_net, make_train_config, save_net, train)
from .util import TempDir, central_difference, random_net, relative_error, single_layer_net


def small_batch(seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((8, 2)), rng.integers(0, 3, size=8)


class ForwardTests(unittest.TestCase):
    def test_zero_weights_uniform(self):
        net = DenseNet([np.zeros((4, 2)), np.zeros((3, 4))], [np.zeros(4), np.zeros(3)])
        p = net.forward([0.3, -2.0])
        self.assertTrue(np.allclose(p, 1.0 / 3))

    def test_probabilities_sum_to_one(self):
        net = DenseNet.initialize([2, 4, 3], seed=1)
        p = net.forward(np.random.default_rng(0).standard_normal((10, 2)))
        self.assertEqual(p.shape, (10, 3))
        self.assertTrue(np.allclose(p.sum(axis=1), 1.0))
        self.assertTrue(np.all(p >= 0))

    def test_saturation_stays_finite(self):
        net = single_layer_net([[1000.0, 0.0], [-1000.0, 0.0]])
        p = net.forward([1.0, 0.0])
        self.assertTrue(np.all(np.isfinite(p)))
        self.assertEqual(p[0], 1.0)
        self.assertAlmostEqual(net.log_probability([1.0, 0.0], 1), -2000.0)
        self.assertTrue(np.all(np.isfinite(net.input_gradient([1.0, 0.0], 1))))

    def test_bias_shift_invariance(self):
        net = DenseNet.initialize([2, 5, 3], seed=4)
        shifted = net.copy()
        shifted.biases[-1] += 12.5
        x = np.random.default_rng(1).standard_normal((6, 2))
        self.assertTrue(np.allclose(net.forward(x), shifted.forward(x)))

    def test_predict(self):
        net = single_layer_net([[1.0, 0.0], [-1.0, 0.0]])
        self.assertEqual(net.predict([2.0, 0.0]), 0)
        self.assertEqual(net.predict([[2.0, 0.0], [-2.0, 0.0]]).tolist(), [0, 1])

    def test_input_dimension_mismatch(self):
        net = DenseNet.initialize([2, 3], seed=0)
        with self.assertRaises(ValueError):
            net.forward([1.0, 2.0, 3.0])
        with self.assertRaises(ValueError):
            net.forward([np.nan, 0.0])

    def test_layer_shape_validation(self):
        with self.assertRaises(ValueError):
            DenseNet([np.zeros((3, 2)), np.zeros((2, 4))], [np.zeros(3), np.zeros(2)])
        with self.assertRaises(ValueError):
            DenseNet([np.zeros((3, 2))], [np.zeros(2)])
        with self.assertRaises(ValueError):
            DenseNet([np.zeros((3, 2))], [np.zeros(3)], output="relu")

    def test_linear_output(self):
        net = DenseNet([np.eye(2)], [np.zeros(2)], LINEAR)
        self.assertEqual(net.forward([0.5, -3.0]).tolist(), [0.5, -3.0])
        with self.assertRaises(ValueError):
            net.log_probability([0.5, -3.0], 0)


class GradientTests(unittest.TestCase):
    def test_param_gradients_match_finite_differences(self):
        for seed in range(20):
            net, rng = random_net(seed)
            batch = int(rng.integers(1, 9))
            inputs = rng.standard_normal((batch, net.input_dim))
            labels = rng.integers(0, net.output_dim, size=batch)
            grads = net.param_gradients(inputs, labels)
            for layer in range(len(net.weights)):
                def loss_w(w, layer=layer):
                    perturbed = net.copy()
                    perturbed.weights[layer] = w
                    return perturbed.loss(inputs, labels)

                def loss_b(b, layer=layer):
                    perturbed = net.copy()
                    perturbed.biases[layer] = b
                    return perturbed.loss(inputs, labels)

                numeric_w = central_difference(loss_w, net.weights[layer])
                numeric_b = central_difference(loss_b, net.biases[layer])
                self.assertLess(relative_error(grads.weights[layer], numeric_w), 1e-4, seed)
                self.assertLess(relative_error(grads.biases[layer], numeric_b), 1e-4, seed)

    def test_input_gradient_matches_finite_differences(self):
        for seed in range(20):
            net, rng = random_net(seed)
            x = rng.standard_normal(net.input_dim)
            for c in range(net.output_dim):
                numeric = central_difference(lambda v: net.log_probability(v, c), x)
                self.assertLess(relative_error(net.input_gradient(x, c), numeric), 1e-4, seed)

    def test_input_gradient_closed_form(self):
        w = np.array([[1.0, 2.0], [-0.5, 0.3], [0.0, -1.0]])
        net = single_layer_net(w, [0.1, 0.0, -0.2])
        x = np.array([0.2, 0.5])
        p = net.forward(x)
        expected = w[1] - p.dot(w)
        self.assertTrue(np.allclose(net.input_gradient(x, 1), expected))

    def test_vjp_matches_finite_differences(self):
        for seed in range(20):
            net, rng = random_net(seed, output=LINEAR if seed % 2 else SOFTMAX)
            x = rng.standard_normal(net.input_dim)
            g = rng.standard_normal(net.output_dim)
            numeric = central_difference(lambda v: float(g.dot(net.forward(v))), x)
            self.assertLess(relative_error(net.vjp(x, g), numeric), 1e-4, seed)

    def test_duplicated_batch_same_mean_gradient(self):
        net = DenseNet.initialize([2, 4, 3], seed=3)
        inputs, labels = small_batch(3)
        once = net.param_gradients(inputs, labels)
        twice = net.param_gradients(np.vstack([inputs, inputs]), np.concatenate([labels, labels]))
        for a, b in zip(once.weights + once.biases, twice.weights + twice.biases):
            self.assertTrue(np.allclose(a, b))
        self.assertAlmostEqual(net.loss(inputs, labels), net.loss(np.vstack([inputs, inputs]),
                                                                  np.concatenate([labels, labels])))

    def test_label_errors(self):
        net = DenseNet.initialize([2, 3], seed=0)
        with self.assertRaises(ValueError):
            net.loss([[0.0, 0.0]], [3])
        with self.assertRaises(ValueError):
            net.loss([[0.0, 0.0], [1.0, 1.0]], [0])
        with self.assertRaises(ValueError):
            net.input_gradient([0.0, 0.0], -1)


class TrainTests(unittest.TestCase):
    def test_xor(self):
        data = generate_dataset(SyntheticSpec("xor"))
        net = DenseNet.initialize([2, 8, 2], seed=7)
        result = train(net, data, make_train_config(0.5, 2000, 4, 7))
        self.assertEqual(accuracy(result.net, data), 1.0)
        self.assertEqual(len(result.loss_trace), 2000)
        self.assertLess(result.loss_trace[-1], result.loss_trace[0])

    def test_training_leaves_input_net_untouched(self):
        data = generate_dataset(SyntheticSpec("xor"))
        net = DenseNet.initialize([2, 3, 2], seed=0)
        before = net.to_data()
        train(net, data, make_train_config(0.5, 5, 2, 0))
        self.assertEqual(net.to_data(), before)

    def test_deterministic(self):
        data = generate_dataset(SyntheticSpec("xor", {"repeats": 3}))
        net = DenseNet.initialize([2, 4, 2], seed=1)
        a = train(net, data, make_train_config(0.3, 20, 3, 5))
        b = train(net, data, make_train_config(0.3, 20, 3, 5))
        self.assertEqual(a.loss_trace, b.loss_trace)

    def test_blobs(self):
        data = generate_dataset(SyntheticSpec("two_blob", count=100, seed=2))
        net = DenseNet.initialize([2, 8, 2], seed=7)
        result = train(net, data, make_train_config(0.1, 100, 10, 7))
        self.assertGreaterEqual(accuracy(result.net, data), 0.99)

    def test_convex_full_batch_loss_non_increasing(self):
        data = generate_dataset(SyntheticSpec("two_blob", count=60, seed=0))
        net = DenseNet.initialize([2, 2], seed=0)
        result = train(net, data, make_train_config(0.01, 50, 60, 0))
        self.assertTrue(np.all(np.diff(result.loss_trace) <= 1e-12))

    def test_config_validation(self):
        for kwargs in ({"learning_rate": 0}, {"epochs": 0}, {"batch_size": 1.5}):
            with self.assertRaises(ValueError):
                make_train_config(**kwargs)
        with self.assertRaises(ValueError):
            train(DenseNet.initialize([2, 2], seed=0), (np.zeros((0, 2)), np.zeros(0, dtype=int)),
                  make_train_config())


class PersistenceTests(unittest.TestCase):
    def test_save_load(self):
        net = DenseNet.initialize([2, 8, 2], seed=7)
        tmp = TempDir()
        with tmp:
            save_net(net, tmp.join("net.json"))
            loaded = load_net(tmp.join("net.json"))
        x = np.array([[0.0, 1.0], [0.5, -0.5]])
        self.assertTrue(np.array_equal(loaded.forward(x), net.forward(x)))
        self.assertEqual(str(loaded), "<DenseNet(2-8-2)>")
        self.assertEqual(loaded.output, net.output)
