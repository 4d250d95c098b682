"""Localization diagnostics: Wegner and Minami bounds, Green's-function decay."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .. import InvalidParameterError
from ..jacobi import Model
from ..parallel import finite_rows, map_replicas
from ..tridiag import first_row_log_abs_batch, resolvent_diagonal_batch, sturm_counts
from .estimate import Estimate, ratio_estimate

# sup of the standard normal density; the Wegner bound is pi times this
NORMAL_DENSITY_SUP = 1.0 / math.sqrt(2.0 * math.pi)
WEGNER_BOUND = math.pi * NORMAL_DENSITY_SUP


@dataclass(frozen=True)
class WegnerResult:
    """Largest site average of ``Im G(z; x, x)`` and the Wegner bound."""

    estimate: Estimate
    site: int
    bound: float

    @property
    def passed(self) -> bool:
        return self.estimate.value <= self.bound + 3.0 * self.estimate.se

    def __iter__(self):
        return iter((self.estimate, self.bound, self.passed))


def _im_diag_chunk(model, seed, z, idx):
    A, B2 = model.sample_batch(seed, idx)
    g = resolvent_diagonal_batch(A, B2, z)
    return np.column_stack([g.imag, g.imag ** 2])


def wegner_check(model: Model, z, replicas: int, seed: int, workers=None) -> WegnerResult:
    """Monte Carlo ``max_x E[Im G(z; x, x)]`` against ``pi / sqrt(2 pi)``.

    Returns the estimate at the maximizing site (1-based) with its
    standard error; passes when it lies below the bound plus 3 standard
    errors.
    """
    z = complex(z)
    if not z.imag > 0:
        raise InvalidParameterError("z must have positive imaginary part")
    vals = map_replicas(partial(_im_diag_chunk, model, seed, z), replicas, workers)
    vals, _ = finite_rows(vals)
    n = model.n
    R = vals.shape[0]
    m1 = vals[:, :n].mean(axis=0)
    m2 = vals[:, n:].mean(axis=0)
    se = np.sqrt(np.maximum(m2 - m1 ** 2, 0.0) * R / (R - 1) / R)
    x = int(np.argmax(m1))
    return WegnerResult(Estimate(float(m1[x]), float(se[x])), x + 1, WEGNER_BOUND)


def _block_counts_chunk(model, seed, E, edges, block_length, idx):
    """Counts of rescaled block eigenvalues in each ``[lo, hi)``; shape (R * blocks, K)."""
    A, B2 = model.sample_batch(seed, idx)
    n, L = model.n, block_length
    nb = n // L
    Ab = A[:, :nb * L].reshape(-1, L)
    # drop the couplings between blocks
    B2b = np.concatenate([B2, np.zeros((B2.shape[0], 1))], axis=1)[:, :nb * L]
    B2b = B2b.reshape(-1, L)[:, :L - 1]
    shifts = E + np.asarray(edges, dtype=float).ravel() / n
    c = sturm_counts(Ab, B2b, np.broadcast_to(shifts, (Ab.shape[0], shifts.size)))
    c = c.reshape(Ab.shape[0], -1, 2)
    return (c[:, :, 1] - c[:, :, 0]).astype(float)


@dataclass(frozen=True)
class MinamiResult:
    """``P(eta(I) >= 2)`` per interval over disjoint diagonal blocks."""

    intervals: tuple
    probabilities: tuple
    blocks: int
    block_length: int

    def ratio(self, i: int = 0, j: int = 1) -> Estimate:
        return ratio_estimate(self.probabilities[i], self.probabilities[j])


def minami_check(model: Model, E: float, intervals, block_length: int, replicas: int,
                 seed: int, workers=None) -> MinamiResult:
    """Empirical probability of two or more block eigenvalues in ``E + I/n``.

    Each replica matrix is cut into ``n // block_length`` disjoint principal
    blocks; a block's eigenvalues are rescaled by the full size ``n``.
    Intervals are half-open ``[lo, hi)`` in rescaled units.
    """
    if block_length < 10:
        raise InvalidParameterError("block length must be at least 10")
    if block_length > model.n:
        raise InvalidParameterError("block length exceeds the matrix size")
    iv = tuple((float(lo), float(hi)) for lo, hi in intervals)
    for lo, hi in iv:
        if hi < lo:
            raise InvalidParameterError(f"interval ({lo}, {hi}) is reversed")
    vals = map_replicas(partial(_block_counts_chunk, model, seed, E, iv, block_length),
                        replicas, workers)
    two = (vals >= 2).astype(float)
    B = two.shape[0]
    probs = []
    for k in range(len(iv)):
        p = float(two[:, k].mean())
        probs.append(Estimate(p, math.sqrt(max(p * (1 - p), 0.0) / B)))
    return MinamiResult(iv, tuple(probs), B, int(block_length))


def poisson_two_or_more(theta: float, length: float) -> float:
    """``P(N >= 2)`` for ``N ~ Poisson(theta * length)``."""
    m = theta * length
    return -math.expm1(-m) - m * math.exp(-m)


@dataclass(frozen=True)
class GreenDecay:
    """Fractional moments ``E|G(z; 1, x)|**s`` and their log-linear fit.

    ``intercept`` and ``slope`` fit ``log E|G(z;1,x)|**s`` against ``x`` on
    ``fit_range``; the decay rate is ``-slope``.
    """

    distances: np.ndarray
    moments: np.ndarray
    log_se: np.ndarray
    intercept: float
    slope: float
    r2: float
    fit_range: tuple

    @property
    def M_s(self) -> float:
        return math.exp(self.intercept)

    @property
    def gamma_s(self) -> float:
        return -self.slope


def _green_chunk(model, seed, z, s, max_distance, idx):
    A, B2 = model.sample_batch(seed, idx)
    logg = first_row_log_abs_batch(A, B2, z)[:, :max_distance]
    return np.exp(s * logg)


def green_decay(model: Model, z, s: float, replicas: int, max_distance: int, seed: int,
                fit_range=(10, 100), workers=None) -> GreenDecay:
    """Measure ``E|G(z; 1, x)|**s`` for ``x = 1..max_distance`` and fit its log.

    ``Im z = 0`` is replaced by ``1e-12``.
    """
    if not 0.0 < s < 0.5:
        raise InvalidParameterError("fractional exponent s must lie in (0, 1/2)")
    z = complex(z)
    if z.imag < 0:
        raise InvalidParameterError("z must have non-negative imaginary part")
    if z.imag == 0:
        z = complex(z.real, 1e-12)
    max_distance = min(int(max_distance), model.n)
    vals = map_replicas(partial(_green_chunk, model, seed, z, s, max_distance), replicas, workers)
    vals, _ = finite_rows(vals)
    mom = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / math.sqrt(vals.shape[0])
    x = np.arange(1, max_distance + 1)
    lo, hi = fit_range
    sel = (x >= lo) & (x <= hi)
    y = np.log(mom[sel])
    slope, intercept = np.polyfit(x[sel], y, 1)
    resid = y - (slope * x[sel] + intercept)
    r2 = 1.0 - float(np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2))
    return GreenDecay(x, mom, se / mom, float(intercept), float(slope), r2, (int(lo), int(hi)))
