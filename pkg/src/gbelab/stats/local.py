"""Local eigenvalue statistics around a reference energy.

The rescaled process is ``xi_n = sum_j delta_{n (lambda_j - E)}``.  Its
Cauchy-kernel functional is a resolvent trace,

    xi_n(f_zeta) = (1/n) Im Tr (J - E - zeta/n)^{-1},  f_zeta(x) = Im 1/(x - zeta),

so the local law needs only the resolvent diagonal.  Window points come
from bisection restricted to ``E +- W/n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .. import InvalidParameterError
from ..jacobi import Model
from ..parallel import finite_rows, map_replicas
from ..tridiag import resolvent_diagonal_batch, sturm_counts, window_eigenvalues_batch
from .estimate import Estimate, covariance_estimate, mean_estimate, variance_estimate
from .ks import KSResult, ks_statistic


@dataclass(frozen=True, eq=False)
class LocalProcessSample:
    """Rescaled eigenvalues ``n (lambda_j - E)`` inside ``[-W, W]``."""

    E: float
    W: float
    points: np.ndarray
    n: int

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).ravel()
        if not self.W > 0:
            raise InvalidParameterError("window half-width must be positive")
        if np.any(np.abs(p) > self.W):
            raise InvalidParameterError("points must lie in [-W, W]")
        if np.any(np.diff(p) < 0):
            raise InvalidParameterError("points must be sorted")
        object.__setattr__(self, "points", p)

    def count(self, lo: float, hi: float) -> int:
        """Number of points in ``[lo, hi)``."""
        return int(np.searchsorted(self.points, hi, "left") - np.searchsorted(self.points, lo, "left"))


def local_process(eigs, n: int, E: float, W: float = 10.0) -> LocalProcessSample:
    """Rescale ``eigs`` around ``E`` and keep the points with ``|p| <= W``."""
    if not W > 0:
        raise InvalidParameterError("W must be positive")
    p = n * (np.asarray(eigs, dtype=float) - E)
    p = np.sort(p[np.abs(p) <= W])
    return LocalProcessSample(float(E), float(W), p, int(n))


def _check_zeta(zeta) -> complex:
    zeta = complex(zeta)
    if not zeta.imag > 0:
        raise InvalidParameterError("zeta must have positive imaginary part")
    return zeta


def xi_f_zeta(eigs, n: int, E: float, zeta) -> float:
    """``sum_j f_zeta(n (lambda_j - E))`` with ``f_zeta(x) = tau / ((x - sigma)**2 + tau**2)``."""
    zeta = _check_zeta(zeta)
    x = n * (np.asarray(eigs, dtype=float) - E)
    return float(np.sum(zeta.imag / ((x - zeta.real) ** 2 + zeta.imag ** 2)))


def xi_f_zeta_batch(A, B2, E: float, zeta) -> np.ndarray:
    """``(1/n) Im Tr G(E + zeta/n)`` for each stacked matrix."""
    zeta = _check_zeta(zeta)
    n = np.shape(A)[-1]
    g = resolvent_diagonal_batch(A, B2, E + zeta / n)
    return g.imag.sum(axis=1) / n


def _local_law_chunk(model, seed, E, zeta, half_bin, idx):
    A, B2 = model.sample_batch(seed, idx)
    xi = xi_f_zeta_batch(A, B2, E, zeta)
    c = sturm_counts(A, B2, np.broadcast_to([E - half_bin, E + half_bin], (len(idx), 2)))
    return np.column_stack([xi, c[:, 1] - c[:, 0]])


@dataclass(frozen=True)
class LocalLawResult:
    xi_mean: Estimate
    density: Estimate
    replicas: int
    skipped: int = 0


def local_law(n: int, alpha: float, E: float, zeta, replicas: int, seed: int,
              bin_width: float | None = None, workers=None) -> LocalLawResult:
    """``E[xi_n(f_zeta)]`` and the binned mean density on the same replicas.

    ``bin_width`` defaults to ``0.5 / n``.
    """
    zeta = _check_zeta(zeta)
    bw = 0.5 / n if bin_width is None else float(bin_width)
    if not bw > 0:
        raise InvalidParameterError("bin width must be positive")
    vals = map_replicas(partial(_local_law_chunk, Model("gbe", n, alpha), seed, E, zeta, 0.5 * bw),
                        replicas, workers)
    vals, skipped = finite_rows(vals)
    xi = mean_estimate(vals[:, 0])
    cnt = mean_estimate(vals[:, 1])
    return LocalLawResult(xi, Estimate(cnt.value / (n * bw), cnt.se / (n * bw)),
                          vals.shape[0], skipped)


def _count_chunk(model, seed, lo, hi, idx):
    A, B2 = model.sample_batch(seed, idx)
    c = sturm_counts(A, B2, np.broadcast_to([lo, hi], (len(idx), 2)))
    return (c[:, 1] - c[:, 0]).astype(float)


def mean_density_estimate(model: Model, E: float, bin_width: float, replicas: int,
                          seed: int, workers=None) -> Estimate:
    """``E[#{lambda_j in E +- bin/2}] / (n * bin)`` by Sturm counts."""
    if not bin_width > 0:
        raise InvalidParameterError("bin width must be positive")
    h = 0.5 * bin_width
    c = map_replicas(partial(_count_chunk, model, seed, E - h, E + h), replicas, workers)
    est = mean_estimate(c)
    s = model.n * bin_width
    return Estimate(est.value / s, est.se / s)


def _window_chunk(model, seed, E, W, idx):
    A, B2 = model.sample_batch(seed, idx)
    n = model.n
    lam = window_eigenvalues_batch(A, B2, E - W / n, E + W / n, tol=1e-13)
    out = np.empty(len(lam), dtype=object)
    for i, l in enumerate(lam):
        out[i] = n * (l - E)
    return out


def sample_local_processes(n: int, alpha: float, E: float, W: float, replicas: int,
                           seed: int, workers=None):
    """One :class:`LocalProcessSample` per replica at ``beta = 2 alpha / n``."""
    if not W > 0:
        raise InvalidParameterError("W must be positive")
    pts = map_replicas(partial(_window_chunk, Model("gbe", n, alpha), seed, E, W),
                       replicas, workers)
    return [LocalProcessSample(E, W, np.clip(np.sort(p), -W, W), n) for p in pts]


def windowed_gap_cdf(theta: float, L: float):
    """CDF of pooled gaps between consecutive points of a Poisson(theta)
    process observed on a window of length ``L``.

    Pairs with gap ``g`` fit in the window at ``L - g`` positions, so the
    pooled density is proportional to ``(L - g) exp(-theta g)`` on ``[0, L]``.
    """
    def prim(g):
        # int_0^g (L - s) e^{-theta s} ds
        e = np.exp(-theta * g)
        return (L * (1 - e) / theta) - ((1 - e * (1 + theta * g)) / theta ** 2)

    total = prim(L)

    def cdf(g):
        g = np.clip(np.asarray(g, dtype=float), 0.0, L)
        return prim(g) / total

    return cdf


@dataclass(frozen=True)
class PoissonDiagnostics:
    """Counting and spacing statistics of a family of local samples.

    ``counts`` has one row per sample and one column per interval.
    ``covariance[i][j]`` estimates the covariance of counts in intervals
    i and j.  ``gaps`` pools the interior spacings of each window (the two
    censored boundary gaps are dropped); ``gap_ks`` compares them with the
    windowed exponential law.
    """

    intervals: tuple
    theta: float
    counts: np.ndarray = field(repr=False)
    count_mean: tuple
    count_variance: tuple
    covariance: tuple
    gaps: np.ndarray = field(repr=False)
    gap_ks: KSResult

    def dispersion(self, i: int) -> Estimate:
        """Variance-to-mean ratio of interval ``i``."""
        m, v = self.count_mean[i], self.count_variance[i]
        if m.value == 0:
            return Estimate(math.nan, math.nan)
        r = v.value / m.value
        return Estimate(r, math.hypot(v.se, r * m.se) / m.value)

    def expected(self, i: int) -> float:
        lo, hi = self.intervals[i]
        return self.theta * (hi - lo)


def _check_intervals(intervals):
    iv = sorted((float(lo), float(hi)) for lo, hi in intervals)
    for lo, hi in iv:
        if not hi >= lo:
            raise InvalidParameterError(f"interval ({lo}, {hi}) is reversed")
    for (a, b), (c, d) in zip(iv[:-1], iv[1:]):
        if c < b:
            raise InvalidParameterError("intervals overlap")
    return [(float(lo), float(hi)) for lo, hi in intervals]


def poisson_diagnostics(samples, theta: float, intervals) -> PoissonDiagnostics:
    """Count and gap statistics to compare against a Poisson(theta) process.

    Intervals are half-open ``[lo, hi)`` in rescaled units and must be
    disjoint.
    """
    if not theta > 0:
        raise InvalidParameterError("theta must be positive")
    iv = _check_intervals(intervals)
    if len(samples) < 2:
        raise InvalidParameterError("need at least two samples")
    counts = np.array([[s.count(lo, hi) for lo, hi in iv] for s in samples], dtype=float)
    means = tuple(mean_estimate(counts[:, k]) for k in range(len(iv)))
    variances = tuple(variance_estimate(counts[:, k]) for k in range(len(iv)))
    cov = tuple(tuple(covariance_estimate(counts[:, i], counts[:, j]) for j in range(len(iv)))
                for i in range(len(iv)))
    W = samples[0].W
    gaps = np.concatenate([np.diff(s.points) for s in samples]) if samples else np.empty(0)
    ks = ks_statistic(gaps, windowed_gap_cdf(theta, 2.0 * W)) if gaps.size else KSResult(1.0, 0.0)
    return PoissonDiagnostics(tuple(iv), float(theta), counts, means, variances, cov, gaps, ks)


def synthetic_poisson_samples(theta: float, W: float, replicas: int, seed: int):
    """Homogeneous Poisson(theta) samples on ``[-W, W]`` as local samples (test oracle)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(replicas):
        k = rng.poisson(theta * 2 * W)
        out.append(LocalProcessSample(0.0, W, np.sort(rng.uniform(-W, W, k)), 1))
    return out
