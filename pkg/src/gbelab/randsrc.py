"""Seeded, counter-based random streams.

Every replica of an experiment owns one :class:`RandomStream` keyed on
``(seed, stream_index)``.  The underlying bit generator is Philox, so the
output of a stream depends only on its key and on the sequence of draws made
from it, never on which worker runs it or in which order replicas execute.

Gamma variates are generated here rather than delegated to numpy because
the model needs shapes as small as ``alpha / n``; for those the boost
``Gam(a) = Gam(a + 1) * U**(1/a)`` is carried out in log space.
"""
from __future__ import annotations

import numpy as np

from . import InvalidParameterError

_TINY = np.finfo(float).tiny


class RandomStream:
    """Independent, reproducible random stream.

    Parameters
    ----------
    seed : int
        Experiment seed (64-bit).
    stream_index : int
        Replica id.  Distinct indices give statistically independent streams.
    substream : int, optional
        Extra key component for callers that need several independent
        streams per replica (e.g. Dirichlet weights next to matrix entries).
    """

    def __init__(self, seed: int, stream_index: int = 0, substream: int = 0):
        if stream_index < 0 or substream < 0:
            raise InvalidParameterError("stream indices must be non-negative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        self.substream = int(substream)
        entropy = [self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_index, self.substream]
        key = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        # number of gamma outputs that underflowed to 0 and were clamped
        self.underflow_count = 0

    def __repr__(self):
        return (f"RandomStream(seed={self.seed}, stream_index={self.stream_index}, "
                f"substream={self.substream})")

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def normal(stream: RandomStream, size=None):
    """Standard normal variate(s)."""
    return stream.generator.standard_normal(size)


def uniform(stream: RandomStream, size=None):
    """Uniform variate(s) on the open interval (0, 1)."""
    u = stream.generator.random(size)
    # random() is on [0, 1); a zero would break log(u)
    return np.where(u == 0.0, _TINY, u) if size is not None else (u or _TINY)


def _marsaglia_tsang_log(shape: np.ndarray, stream: RandomStream) -> np.ndarray:
    """log of Gam(shape, 1) variates for shape >= 1, squeeze/acceptance method."""
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(shape)
    pending = np.arange(shape.size)
    while pending.size:
        dp, cp = d[pending], c[pending]
        x = normal(stream, pending.size)
        u = uniform(stream, pending.size)
        v = 1.0 + cp * x
        ok = v > 0.0
        v = np.where(ok, v, 1.0) ** 3
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        with np.errstate(divide="ignore"):
            full = np.log(u) < 0.5 * x2 + dp * (1.0 - v + np.log(v))
        accept = ok & (squeeze | full)
        out[pending[accept]] = np.log(dp[accept]) + np.log(v[accept])
        pending = pending[~accept]
    return out


def log_gamma_variate(shape, stream: RandomStream, size=None):
    """Natural log of Gam(shape, 1) variates.

    Working in log space keeps variates with tiny shape representable: for
    ``shape = 1e-3`` a typical draw is ``exp(-700)``.
    """
    a = np.asarray(shape, dtype=float)
    if size is not None:
        a = np.broadcast_to(a, size)
    if np.any(~(a > 0.0)) or np.any(~np.isfinite(a)):
        raise InvalidParameterError(f"gamma shape must be positive and finite, got {shape!r}")
    flat = np.ascontiguousarray(a, dtype=float).ravel()
    small = flat < 1.0
    logg = _marsaglia_tsang_log(np.where(small, flat + 1.0, flat), stream)
    if np.any(small):
        idx = np.flatnonzero(small)
        logg[idx] += np.log(uniform(stream, idx.size)) / flat[idx]
    logg = logg.reshape(a.shape)
    return logg if logg.ndim else float(logg)


def gamma(shape, stream: RandomStream, size=None):
    """Gam(shape, 1) variate(s).

    Outputs that underflow to exactly zero are replaced by the smallest
    positive normal double and counted in ``stream.underflow_count``.
    """
    g = np.exp(log_gamma_variate(shape, stream, size))
    zero = g == 0.0
    if np.any(zero):
        stream.underflow_count += int(np.count_nonzero(zero))
        g = np.where(zero, _TINY, g)
    return g if np.ndim(g) else float(g)


def chi_tilde(dof, stream: RandomStream, size=None):
    """(1/sqrt 2)-chi variate(s) with ``dof`` degrees of freedom.

    Equal in law to ``sqrt(Gam(dof/2, 1))``, so the second moment is dof/2.
    """
    dof = np.asarray(dof, dtype=float)
    if np.any(~(dof > 0.0)):
        raise InvalidParameterError(f"chi_tilde needs positive degrees of freedom, got {dof!r}")
    x = np.exp(0.5 * log_gamma_variate(dof / 2.0, stream, size))
    zero = x == 0.0
    if np.any(zero):
        stream.underflow_count += int(np.count_nonzero(zero))
        x = np.where(zero, _TINY, x)
    return x if np.ndim(x) else float(x)


def dirichlet(count: int, concentration: float, stream: RandomStream) -> np.ndarray:
    """Symmetric Dirichlet weight vector of length ``count``."""
    if int(count) != count or count < 1:
        raise InvalidParameterError(f"count must be a positive integer, got {count!r}")
    if not concentration > 0.0:
        raise InvalidParameterError(f"concentration must be positive, got {concentration!r}")
    if count == 1:
        return np.ones(1)
    logg = log_gamma_variate(np.full(int(count), float(concentration)), stream)
    w = np.exp(logg - logg.max())
    return w / w.sum()
