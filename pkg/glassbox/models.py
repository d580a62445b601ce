#!/usr/bin/python
# coding: utf8

import collections
import json
import os

import numpy as np


class RasterError(ValueError):
    def __init__(self, message, offset):
        super(RasterError, self).__init__("{} (byte offset {})".format(message, offset))
        self.offset = offset


class OptimizationError(RuntimeError):
    def __init__(self, message, iteration):
        super(OptimizationError, self).__init__("{} at iteration {}".format(message, iteration))
        self.iteration = iteration


class BlackBoxError(ValueError):
    def __init__(self, message, sample_index, sample):
        super(BlackBoxError, self).__init__("{} for sample {}: {}".format(
            message, sample_index, np.asarray(sample).astype(int).tolist()))
        self.sample_index = sample_index
        self.sample = sample


class InvariantError(RuntimeError):
    pass


Dataset = collections.namedtuple("Dataset", ["inputs", "labels"])


def make_dataset(inputs, labels):
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    labels = np.asarray(labels, dtype=int).reshape(-1)
    if inputs.shape[0] != labels.shape[0]:
        raise ValueError("{} inputs but {} labels".format(inputs.shape[0], labels.shape[0]))
    if not np.all(np.isfinite(inputs)):
        raise ValueError("dataset inputs must be finite")
    return Dataset(inputs=inputs, labels=labels)


def dataset_to_data(dataset):
    return {"inputs": dataset.inputs.tolist(), "labels": dataset.labels.tolist()}


def dataset_from_data(data):
    return make_dataset(data["inputs"], data["labels"])


def to_plain(value):
    """Convert numpy values nested in dicts/lists to JSON-ready python values."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Model):
        return value.to_data()
    return value


def dump_json(path, data):
    """Write data as sorted JSON; the rename makes a present file a complete one."""
    text = json.dumps(to_plain(data), sort_keys=True, indent=2, allow_nan=False)
    tmp = "{}.tmp".format(path)
    with open(tmp, "w") as f:
        f.write(text)
        f.write("\n")
    os.replace(tmp, path)


def load_json(path):
    with open(path) as f:
        return json.load(f)


class Model(object):
    """Base for value objects that travel through JSON reports."""

    def load(self, data):
        raise NotImplementedError("load not implemented")

    def to_data(self):
        raise NotImplementedError("to_data not implemented")

    @classmethod
    def create_from_data(cls, data):
        c = cls.__new__(cls)
        c.load(data)
        return c

    @classmethod
    def from_file(cls, path):
        return cls.create_from_data(load_json(path))

    def save(self, path):
        dump_json(path, self.to_data())

    def _label(self):
        return ""

    def __str__(self):
        return "<{}({})>".format(self.__class__.__name__, self._label())

    def __repr__(self):
        return "<{}({})>".format(self.__class__.__name__, self._label())
