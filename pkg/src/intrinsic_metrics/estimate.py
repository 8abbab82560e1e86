"""Return type for stochastic estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class McEstimate:
    """``value`` with its standard error over ``samples`` draws.

    ``std_error`` is exactly 0 only on exact evaluation paths.  ``flags``
    records conditions a caller should know about (for example an empty
    intersection).
    """

    value: float
    std_error: float
    samples: int
    flags: tuple = ()

    def __add__(self, other):
        if isinstance(other, McEstimate):
            return McEstimate(
                self.value + other.value,
                math.hypot(self.std_error, other.std_error),
                min(self.samples, other.samples),
                self.flags + other.flags,
            )
        return McEstimate(self.value + other, self.std_error, self.samples, self.flags)

    def __sub__(self, other):
        if isinstance(other, McEstimate):
            return self + McEstimate(-other.value, other.std_error, other.samples, other.flags)
        return McEstimate(self.value - other, self.std_error, self.samples, self.flags)

    def __mul__(self, c):
        return McEstimate(self.value * c, self.std_error * abs(c), self.samples, self.flags)

    __rmul__ = __mul__

    def within(self, target, k=3.0, atol=0.0):
        """True when ``|value - target| <= k * std_error + atol``.

        A floor of a few ulps of the compared magnitudes is always allowed, so
        estimators whose samples are all equal do not fail on rounding.
        """
        floor = 64 * np.finfo(float).eps * max(abs(self.value), abs(target))
        return abs(self.value - target) <= k * self.std_error + atol + floor


def mean_estimate(samples, flags=()):
    samples = np.asarray(samples, dtype=float)
    m = samples.size
    se = float(samples.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return McEstimate(float(samples.mean()), se, m, tuple(flags))


def combined_sigma(*estimates):
    return math.sqrt(sum(e.std_error ** 2 for e in estimates))
