"""Monte Carlo point estimates with standard errors."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class Estimate(NamedTuple):
    value: float
    se: float

    def within(self, target: float, k: float = 3.0) -> bool:
        """True when ``target`` is within ``k`` standard errors."""
        return abs(self.value - target) <= k * self.se

    def __format__(self, spec):
        spec = spec or ".4g"
        return f"{self.value:{spec}} ± {self.se:{spec}}"


def mean_estimate(x) -> Estimate:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two replicas for a standard error")
    return Estimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)))


def variance_estimate(x, scale: float = 1.0) -> Estimate:
    """Unbiased sample variance of ``x`` times ``scale``.

    The standard error uses the fourth central moment,
    ``Var(s^2) ~ (m4 - s^4) / R``.
    """
    x = np.asarray(x, dtype=float).ravel()
    R = x.size
    if R < 2:
        raise ValueError("need at least two replicas for a variance")
    d = x - x.mean()
    s2 = float(np.sum(d * d) / (R - 1))
    m4 = float(np.mean(d ** 4))
    se = math.sqrt(max(m4 - s2 * s2, 0.0) / R)
    return Estimate(scale * s2, scale * se)


def covariance_estimate(x, y) -> Estimate:
    """Sample covariance with the delta-method standard error."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    R = x.size
    dx, dy = x - x.mean(), y - y.mean()
    c = float(np.sum(dx * dy) / (R - 1))
    se = math.sqrt(max(float(np.mean((dx * dy) ** 2)) - c * c, 0.0) / R)
    return Estimate(c, se)


def ratio_estimate(num: Estimate, den: Estimate) -> Estimate:
    """``num / den`` for independent estimates (first-order error propagation)."""
    r = num.value / den.value
    rel = math.hypot(num.se / num.value if num.value else 0.0, den.se / den.value)
    return Estimate(r, abs(r) * rel)
