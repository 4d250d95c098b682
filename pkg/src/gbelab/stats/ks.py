"""Kolmogorov-Smirnov goodness of fit."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import kolmogorov

from .. import InvalidParameterError


class KSResult(NamedTuple):
    statistic: float
    pvalue: float


def _pvalue(d: float, m: float) -> float:
    # Stephens' finite-sample correction to the asymptotic argument
    sm = math.sqrt(m)
    return float(kolmogorov((sm + 0.12 + 0.11 / sm) * d))


def ks_statistic(sample, cdf) -> KSResult:
    """Sup distance between the empirical CDF of ``sample`` and ``cdf``.

    ``cdf`` is a vectorized callable.  The p-value comes from the asymptotic
    Kolmogorov series.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    m = x.size
    if m == 0:
        raise InvalidParameterError("KS statistic needs a nonempty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    d = max(float(np.max(i / m - F)), float(np.max(F - (i - 1) / m)))
    return KSResult(d, _pvalue(d, m))


def ks_two_sample(x, y) -> KSResult:
    """Two-sample KS statistic and asymptotic p-value."""
    x = np.sort(np.asarray(x, dtype=float).ravel())
    y = np.sort(np.asarray(y, dtype=float).ravel())
    if x.size == 0 or y.size == 0:
        raise InvalidParameterError("KS statistic needs nonempty samples")
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    d = float(np.max(np.abs(fx - fy)))
    return KSResult(d, _pvalue(d, x.size * y.size / (x.size + y.size)))
