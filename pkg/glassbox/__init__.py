#!/usr/bin/python
# coding: utf8

import logging

import pendulum

from .helper import Run
from . import actmax, amfm, bank, posthoc, synth, tinynet

__version__ = "0.1"


logger = logging.getLogger(__name__)


class Workbench(object):
    """High level entry point; every operation is timed and kept in the run log."""

    MAX_RUNS = 100

    def __init__(self, workers=1):
        self.workers = workers
        self.counter = 0
        self.runs = []

    def track_run(self, name, func, *args, **kwargs):
        start = pendulum.now("UTC")
        status = "error"
        try:
            result = func(*args, **kwargs)
            status = "ok"
            return result
        finally:
            self.counter += 1
            run = Run(name, status, start)
            self.runs.append(run)
            if len(self.runs) > self.MAX_RUNS:
                self.runs.pop(0)
            logger.info("%s finished (%s) in %.3f seconds", name, status, run.timer)

    def stats(self):
        out = []
        out.append("{} Runs".format(self.counter))
        for r in self.runs:
            out.append("{} {} in {} seconds".format(r.name, r.status, r.timer))
        return out

    # Decomposition

    def design_bank(self, scales=bank.DEFAULT_SCALES, orientations=bank.DEFAULT_ORIENTATIONS,
                    lowpass_cutoff=bank.DEFAULT_LOWPASS_CUTOFF):
        return self.track_run("design_bank", bank.design_bank, scales, orientations, lowpass_cutoff)

    def coverage(self, filter_bank, width, height, channel_ids=None):
        return self.track_run("coverage_map", bank.coverage_map, filter_bank, width, height, channel_ids)

    def decompose(self, image, filter_bank):
        return self.track_run("decompose", amfm.decompose, image, filter_bank, self.workers)

    def select_filters(self, image, filter_bank, threshold=amfm.DEFAULT_THRESHOLD, window=amfm.SSIM_WINDOW,
                       decomp=None):
        return self.track_run("select_dominant_filters", amfm.select_dominant_filters, image, filter_bank,
                              threshold, window, 1.0, self.workers, decomp)

    # Prototypes

    def prototype(self, net, c, **kwargs):
        return self.track_run("maximize_class", actmax.maximize_class, net, c, **kwargs)

    def expert_prototype(self, net, c, expert, **kwargs):
        return self.track_run("maximize_with_expert", actmax.maximize_with_expert, net, c, expert, **kwargs)

    def code_prototype(self, net, c, decoder, **kwargs):
        return self.track_run("maximize_in_code_space", actmax.maximize_in_code_space, net, c, decoder, **kwargs)

    # Training

    def train_net(self, net, dataset, config):
        return self.track_run("train", tinynet.train, net, dataset, config)

    def train_expert(self, data, hidden, **kwargs):
        return self.track_run("train_rbm", actmax.train_rbm, data, hidden, **kwargs)

    # Explanations

    def explain(self, blackbox, mapping, K, **kwargs):
        kwargs.setdefault("workers", self.workers)
        return self.track_run("fit_local_surrogate", posthoc.fit_local_surrogate, blackbox, mapping, K, **kwargs)

    # Synthetic data

    def synth_image(self, spec):
        return self.track_run("generate_image", synth.generate_image, spec)

    def synth_dataset(self, spec):
        return self.track_run("generate_dataset", synth.generate_dataset, spec)
