"""Accumulating wall-clock timers (monotonic clock)."""
from __future__ import annotations

import time
from collections import defaultdict
from contextlib import contextmanager

CATEGORIES = (
    "setup",
    "total_solve",
    "per_iteration",
    "vcycle",
    "smooth",
    "first_level_smooth",
    "residual",
    "transfer",
    "cg_matvec",
    "cg_dot",
    "coarsest_solve",
)


class Timings:
    """Named totals in seconds plus call counts."""

    def __init__(self):
        self.totals = defaultdict(float)
        self.counts = defaultdict(int)

    @contextmanager
    def time(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] += time.perf_counter() - t0
            self.counts[name] += 1

    def add(self, name, seconds):
        self.totals[name] += seconds
        self.counts[name] += 1

    def mean(self, name):
        c = self.counts.get(name, 0)
        return self.totals[name] / c if c else 0.0

    def as_dict(self):
        return {k: float(self.totals.get(k, 0.0)) for k in CATEGORIES}

    def report(self):
        return "\n".join(f"{k} = {self.totals.get(k, 0.0):.6f}" for k in CATEGORIES)


class _NullTimings(Timings):
    @contextmanager
    def time(self, name):
        yield

    def add(self, name, seconds):
        pass


NULL_TIMINGS = _NullTimings()
