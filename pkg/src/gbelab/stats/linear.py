"""Linear eigenvalue statistics and CLT experiments.

For polynomial test functions the statistic is computed through traces,
``<L_n, p> = (1/n) sum_k c_k Tr J**k``, using banded matrix powers; this is
exact up to rounding and avoids diagonalization.  Other test functions go
through the bisection eigenvalues.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import ndtr

from .. import InvalidParameterError
from ..jacobi import Model, associated_hermite
from ..parallel import finite_rows, map_replicas
from ..tridiag import eigenvalues_batch
from .estimate import Estimate, mean_estimate, variance_estimate
from .ks import KSResult, ks_statistic


@dataclass(frozen=True)
class TestFunction:
    """A test function with its derivative.

    ``coeffs`` (ascending powers) is set for polynomials.  The capped
    logarithm ``max(log|x - center|, -cap)`` has ``coeffs = None``.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    coeffs: tuple | None = None
    center: float = 0.0
    cap: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.coeffs is not None:
            return P.polyval(x, self.coeffs)
        with np.errstate(divide="ignore"):
            return np.maximum(np.log(np.abs(x - self.center)), -self.cap)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.coeffs is not None:
            return P.polyval(x, P.polyder(self.coeffs))
        d = x - self.center
        with np.errstate(divide="ignore"):
            return np.where(np.abs(d) > math.exp(-self.cap), 1.0 / d, 0.0)

    @property
    def is_polynomial(self) -> bool:
        return self.coeffs is not None

    def derivative_squared_coeffs(self):
        return tuple(P.polypow(P.polyder(self.coeffs), 2)) if self.coeffs is not None else None


def monomial(k: int) -> TestFunction:
    if not 1 <= k <= 6:
        raise InvalidParameterError("monomials x^k are registered for k = 1..6")
    c = [0.0] * k + [1.0]
    return TestFunction("x" if k == 1 else f"x^{k}", tuple(c))


def capped_log(center: float = 0.0, cap: float = 10.0) -> TestFunction:
    if not cap > 0:
        raise InvalidParameterError("cap must be positive")
    return TestFunction(f"logcap:{center:g}:{cap:g}", None, float(center), float(cap))


_LOGCAP = re.compile(r"logcap(?::([-+0-9.eE]+))?(?::([-+0-9.eE]+))?$")


def get_test_function(name: str) -> TestFunction:
    """Look up ``"x"``, ``"x^k"`` (k <= 6) or ``"logcap[:E[:M]]"``."""
    name = name.strip()
    if name == "x":
        return monomial(1)
    m = re.fullmatch(r"x\^(\d+)", name)
    if m:
        return monomial(int(m.group(1)))
    m = _LOGCAP.match(name)
    if m:
        return capped_log(float(m.group(1) or 0.0), float(m.group(2) or 10.0))
    raise InvalidParameterError(f"unknown test function {name!r}")


TEST_FUNCTIONS = tuple(f"x^{k}" if k > 1 else "x" for k in range(1, 7)) + ("logcap",)


def linear_stat(eigs, f) -> float:
    """``(1/n) sum_j f(lambda_j)``."""
    eigs = np.asarray(eigs, dtype=float)
    return float(np.mean(f(eigs)))


def _shift(x: np.ndarray, s: int) -> np.ndarray:
    """``out[:, i] = x[:, i + s]`` with zeros outside the range."""
    out = np.zeros_like(x)
    n = x.shape[1]
    if s >= 0:
        out[:, :n - s] = x[:, s:]
    else:
        out[:, -s:] = x[:, :n + s]
    return out


def trace_powers_batch(A, B2, kmax: int) -> np.ndarray:
    """``Tr J**k`` for k = 0..kmax and each stacked matrix; shape (R, kmax + 1).

    ``J**k`` is held as its diagonals: ``D[d][:, i] = (J**k)[i, i + d]``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    R, n = A.shape
    b = np.zeros((R, n))
    b[:, :n - 1] = np.sqrt(np.atleast_2d(B2))
    out = np.empty((R, kmax + 1))
    out[:, 0] = n
    D = {0: np.ones((R, n))}
    for k in range(1, kmax + 1):
        new = {}
        for d in range(-k, k + 1):
            if abs(d) >= n:
                continue
            # (P J)[i, j] = P[i, j-1] b[j-1] + P[i, j] a[j] + P[i, j+1] b[j],  j = i + d
            acc = np.zeros((R, n))
            if d - 1 in D:
                acc += D[d - 1] * _shift(b, d - 1)
            if d in D:
                acc += D[d] * _shift(A, d)
            if d + 1 in D:
                acc += D[d + 1] * _shift(b, d)
            new[d] = acc
        D = new
        out[:, k] = D[0].sum(axis=1)
    return out


def _poly_trace_stat(A, B2, coeffs) -> np.ndarray:
    T = trace_powers_batch(A, B2, len(coeffs) - 1)
    return T @ np.asarray(coeffs, dtype=float) / A.shape[1]


def _stat_chunk(model: Model, seed: int, f: TestFunction, substream: int, idx):
    """Per replica: ``<L_n, f>`` and ``<L_n, (f')**2>``."""
    A, B2 = model.sample_batch(seed, idx, substream)
    if f.is_polynomial:
        s = _poly_trace_stat(A, B2, f.coeffs)
        g = _poly_trace_stat(A, B2, f.derivative_squared_coeffs())
    else:
        lam = eigenvalues_batch(A, B2)
        s = f(lam).mean(axis=1)
        g = (f.derivative(lam) ** 2).mean(axis=1)
    return np.column_stack([s, g])


def sample_linear_stats(model: Model, f: TestFunction, replicas: int, seed: int,
                        workers=None, substream: int = 0):
    """Array (R, 2) of ``<L_n, f>`` and ``<L_n, (f')**2>`` plus the skip count."""
    vals = map_replicas(partial(_stat_chunk, model, seed, f, substream), replicas, workers)
    return finite_rows(vals)


def _as_function(f) -> TestFunction:
    return get_test_function(f) if isinstance(f, str) else f


@dataclass(frozen=True)
class CltSummary:
    """Moments of ``sqrt(n) (<L_n, f> - sample mean)`` over replicas.

    ``variance`` is ``n Var<L_n, f>``; ``bound`` estimates ``<Lbar_n, (f')**2>``,
    which dominates the variance.  ``normality`` is the KS test of the
    standardized statistic against N(0, 1).
    """

    function: str
    n: int
    alpha: float
    replicas: int
    mean: Estimate
    variance: Estimate
    skewness: Estimate
    kurtosis: Estimate
    bound: Estimate
    normality: KSResult
    skipped: int = 0
    samples: np.ndarray = field(default=None, repr=False, compare=False)


def summarize_clt(stat, grad_sq, n: int, function: str, alpha: float, skipped=0) -> CltSummary:
    stat = np.asarray(stat, dtype=float)
    R = stat.size
    if R < 2:
        raise InvalidParameterError("need at least two replicas")
    x = math.sqrt(n) * (stat - stat.mean())
    var = variance_estimate(x)
    sd = math.sqrt(var.value) if var.value > 0 else 1.0
    z = x / sd
    skew = float(np.mean(z ** 3))
    kurt = float(np.mean(z ** 4) - 3.0)
    normality = ks_statistic(z, ndtr) if var.value > 0 else KSResult(1.0, 0.0)
    return CltSummary(
        function=function, n=n, alpha=alpha, replicas=R,
        mean=mean_estimate(stat), variance=var,
        skewness=Estimate(skew, math.sqrt(6.0 / R)),
        kurtosis=Estimate(kurt, math.sqrt(24.0 / R)),
        bound=mean_estimate(grad_sq), normality=normality,
        skipped=skipped, samples=x)


def clt_experiment(n: int, alpha: float, f, replicas: int, seed: int,
                   workers=None, kind: str = "gbe") -> CltSummary:
    """CLT summary of ``<L_n, f>`` for the model at ``beta = 2 alpha / n``."""
    f = _as_function(f)
    model = Model(kind, n, alpha)
    vals, skipped = sample_linear_stats(model, f, replicas, seed, workers)
    return summarize_clt(vals[:, 0], vals[:, 1], n, f.name, alpha, skipped)


def sigma2_iid(alpha: float, f, n: int, replicas: int, seed: int,
               workers=None, substream: int = 0) -> Estimate:
    """Monte Carlo ``n Var<L_n, p>`` for the ``n x n`` i.i.d. model ``J_alpha``.

    ``alpha = 0`` means a vanishing subdiagonal (diagonal Gaussian matrix).
    """
    f = _as_function(f)
    if alpha < 0:
        raise InvalidParameterError("alpha must be non-negative")
    model = Model("iid", n, alpha)
    vals, _ = sample_linear_stats(model, f, replicas, seed, workers, substream)
    return variance_estimate(vals[:, 0], scale=n)


@dataclass(frozen=True)
class Sigma2Integral:
    value: Estimate
    nodes: np.ndarray
    node_values: tuple

    def __iter__(self):
        return iter(self.value)


def sigma2_integral(alpha: float, f, grid_size: int, n: int, replicas: int, seed: int,
                    workers=None) -> Sigma2Integral:
    """Trapezoid rule for ``int_0^1 sigma2_iid(u alpha) du``.

    Node ``i`` draws from substream ``i``, so nodes are independent and the
    standard error combines as ``sqrt(sum w_i**2 se_i**2)``.
    """
    if grid_size < 5:
        raise InvalidParameterError("grid_size must be at least 5")
    u = np.linspace(0.0, 1.0, int(grid_size))
    w = np.full(u.size, 1.0 / (u.size - 1))
    w[0] = w[-1] = 0.5 / (u.size - 1)
    est = [sigma2_iid(ui * alpha, f, n, replicas, seed, workers, substream=i)
           for i, ui in enumerate(u)]
    val = float(sum(wi * e.value for wi, e in zip(w, est)))
    se = math.sqrt(sum((wi * e.se) ** 2 for wi, e in zip(w, est)))
    return Sigma2Integral(Estimate(val, se), u, tuple(est))


def limit_moments(alpha: float, kmax: int) -> np.ndarray:
    """``<mu_alpha, x**k>`` for k = 0..kmax, as ``(H**k)(1, 1)`` of the associated Hermite matrix.

    Only the first ``k // 2 + 1`` rows of ``H`` affect ``(H**k)(1, 1)``, so a
    matrix of size ``kmax + 2`` gives the exact values.
    """
    H = associated_hermite(kmax + 2, alpha).to_dense()
    out = np.empty(kmax + 1)
    v = np.zeros(kmax + 2)
    v[0] = 1.0
    e = v.copy()
    for k in range(kmax + 1):
        out[k] = e @ v
        v = H @ v
    return out


def _moments_chunk(model: Model, seed: int, kmax: int, idx):
    A, B2 = model.sample_batch(seed, idx)
    return trace_powers_batch(A, B2, kmax)[:, 1:] / model.n


def global_moments(n: int, alpha: float, kmax: int, replicas: int, seed: int,
                   workers=None):
    """Estimates of ``E<L_n, x**k>`` for k = 1..kmax at ``beta = 2 alpha / n``."""
    vals = map_replicas(partial(_moments_chunk, Model("gbe", n, alpha), seed, kmax),
                        replicas, workers)
    vals, _ = finite_rows(vals)
    return [mean_estimate(vals[:, k]) for k in range(kmax)]
