#!/usr/bin/python
# coding: utf8

import collections
import collections.abc
import functools
import math

import numpy as np
import pendulum


def round_half_away(values):
    """Round to the nearest integer, ties away from zero."""
    values = np.asarray(values, dtype=float)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def make_rng(seed):
    """Seeded generator on the pinned PCG64 bit generator."""
    if seed is None:
        raise ValueError("a seed is required for reproducible runs")
    return np.random.Generator(np.random.PCG64(int(seed)))


def split_range(count, size):
    """Yield (start, end) pairs covering range(count) in chunks of size."""
    if size <= 0:
        raise ValueError("chunk size must be positive: {}".format(size))
    for start in range(0, count, size):
        yield (start, min(start + size, count))


def half_amplitude_sigma(half_width):
    """Gaussian sigma whose response falls to 0.5 at half_width."""
    return half_width / math.sqrt(2.0 * math.log(2.0))


class Run(object):
    def __init__(self, name, status, start, end=None):
        self.name = name
        self.start = start
        self.status = status
        if end is None:
            self.end = pendulum.now("UTC")
        else:
            self.end = end

    @property
    def timer(self):
        return (self.end - self.start).total_seconds()

    def __repr__(self):
        return "<{}({}, {})>".format(self.__class__.__name__, self.name, self.status)


class Memoize(object):
    '''Decorator. Caches a function's return value each time it is called.
    If called later with the same arguments, the cached value is returned
    (not reevaluated). With a maxsize the least recently used entry is
    dropped once the cache is full.
    '''

    def __init__(self, func, maxsize=None):
        self.func = func
        self.maxsize = maxsize
        self.cache = collections.OrderedDict()
        functools.update_wrapper(self, func)

    def __call__(self, *args):
        if not isinstance(args, collections.abc.Hashable):
            return self.func(*args)
        try:
            value = self.cache[args]
        except KeyError:
            pass
        except TypeError:
            # a tuple holding a list, for instance
            return self.func(*args)
        else:
            self.cache.move_to_end(args)
            return value
        value = self.func(*args)
        self.cache[args] = value
        if self.maxsize is not None and len(self.cache) > self.maxsize:
            self.cache.popitem(last=False)
        return value

    def clear(self):
        self.cache.clear()

    def __repr__(self):
        '''Return the function's docstring.'''
        return self.func.__doc__

    def __get__(self, obj, objtype):
        '''Support instance methods.'''
        return functools.partial(self.__call__, obj)


def memoize(maxsize):
    """Bounded variant of Memoize for use as @memoize(n)."""
    def decorate(func):
        return Memoize(func, maxsize)
    return decorate
