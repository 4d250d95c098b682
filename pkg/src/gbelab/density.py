"""Limiting density of states and related quadratures.

The limiting mean spectral measure at high temperature is the orthogonality
measure of the associated Hermite polynomials,

    mu_alpha(E) = exp(-E**2 / 2) / (sqrt(2 pi) |f_alpha(E)|**2),
    f_alpha(E) = sqrt(alpha / Gamma(alpha)) * int_0^inf t**(alpha-1) exp(-t**2/2 + iEt) dt.

Two independent evaluation routes are provided: direct quadrature of
``f_alpha`` and the continued fraction of the associated Hermite Jacobi
matrix.  ``theta_E`` evaluates the Poisson intensity expression built from
the logarithmic potential of ``mu_alpha``, which must coincide with the
density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from . import InvalidParameterError, PrecisionError
from .jacobi import associated_hermite
from .tridiag import SpectralDecomposition, _check_upper, continued_fraction_m

_SQRT_2PI = math.sqrt(2.0 * math.pi)
# ratio int|g| / |int g| above which double precision cannot deliver 1e-8
_MAX_CANCELLATION = 1e7


def _log_peak(alpha: float) -> float:
    """Maximum over t > 0 of (alpha - 1) log t - t**2 / 2 (zero when alpha <= 1)."""
    if alpha <= 1.0:
        return 0.0
    s = alpha - 1.0
    return 0.5 * s * (math.log(s) - 1.0)


def _fourier_integral(alpha: float, E: np.ndarray, T: float, epsrel: float):
    """``exp(-c) * int_0^T t**(alpha-1) exp(-t**2/2 + iEt) dt`` for a vector of E.

    Returns the scaled integral, the scaled integral of the modulus (for the
    cancellation check) and ``c``.
    """
    c = _log_peak(alpha)

    def body(t):
        # integrand without the t**(alpha-1) factor on [0, 1] when alpha < 1
        amp = math.exp(-0.5 * t * t - c)
        ph = E * t
        return np.concatenate([amp * np.cos(ph), amp * np.sin(ph), [amp]])

    def full(t):
        amp = math.exp((alpha - 1.0) * math.log(t) - 0.5 * t * t - c)
        ph = E * t
        return np.concatenate([amp * np.cos(ph), amp * np.sin(ph), [amp]])

    kw = dict(epsabs=0.0, epsrel=epsrel, limit=2000)
    if alpha < 1.0:
        # u = t**alpha removes the endpoint singularity: t**(alpha-1) dt = du / alpha
        head, err_h = quad_vec(lambda u: body(u ** (1.0 / alpha)) / alpha, 0.0, 1.0, **kw)
    elif alpha == 1.0:
        head, err_h = quad_vec(body, 0.0, 1.0, **kw)
    else:
        head, err_h = quad_vec(full, 0.0, 1.0, **kw)
    # split the tail so each piece holds few oscillations
    edges = np.unique(np.concatenate([np.arange(1.0, T, 4.0), [T]]))
    tail = np.zeros_like(head)
    err_t = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece, e = quad_vec(full, lo, hi, **kw)
        tail += piece
        err_t += e
    total = head + tail
    k = E.size
    value = total[:k] + 1j * total[k:2 * k]
    return value, total[-1], c, err_h + err_t


def f_hat(alpha: float, E, T: float | None = None, epsrel: float = 1e-11):
    """Fourier-type integral ``f_alpha(E)``; vectorized over ``E``.

    Parameters
    ----------
    alpha : float
        Must be positive.
    E : float or array_like
    T : float, optional
        Upper cutoff; default ``max(10, max|E| + 8, sqrt(alpha) + 10)``.

    Raises
    ------
    PrecisionError
        When the oscillatory cancellation exceeds what double precision can
        resolve to 1e-8 relative accuracy (large ``alpha``).
    """
    if not alpha > 0.0:
        raise InvalidParameterError(f"f_hat needs alpha > 0, got {alpha!r}")
    Es = np.atleast_1d(np.asarray(E, dtype=float))
    if T is None:
        T = max(10.0, float(np.abs(Es).max()) + 8.0, math.sqrt(alpha) + 10.0)
    value, modulus, c, _ = _fourier_integral(alpha, Es.ravel(), T, epsrel)
    if np.any(modulus > _MAX_CANCELLATION * np.abs(value)):
        raise PrecisionError(
            f"f_hat cancellation too severe at alpha={alpha} (try the truncation route)")
    logpref = 0.5 * (math.log(alpha) - math.lgamma(alpha)) + c
    out = (value * math.exp(logpref)).reshape(Es.shape)
    return complex(out[0]) if np.ndim(E) == 0 else out


def dos(alpha: float, E, T: float | None = None):
    """Limiting density of states ``mu_alpha(E)``; vectorized over ``E``.

    ``alpha = 0`` returns the standard normal density.
    """
    if alpha < 0:
        raise InvalidParameterError(f"alpha must be non-negative, got {alpha!r}")
    Es = np.asarray(E, dtype=float)
    if alpha == 0.0:
        out = np.exp(-0.5 * Es * Es) / _SQRT_2PI
    else:
        f = f_hat(alpha, np.atleast_1d(Es), T)
        out = (np.exp(-0.5 * np.atleast_1d(Es) ** 2) / (_SQRT_2PI * np.abs(f) ** 2)).reshape(Es.shape)
    return float(out) if out.ndim == 0 else out


def _sqrt_tail(z: np.ndarray, b2: float) -> np.ndarray:
    """m-function of the constant Jacobi matrix (zero diagonal, subdiagonal sqrt(b2))."""
    r = np.sqrt(z * z - 4.0 * b2 + 0j)
    m = (-z + r) / (2.0 * b2)
    other = (-z - r) / (2.0 * b2)
    return np.where(m.imag > 0, m, other)


def dos_via_truncation(alpha: float, E, N: int = 5000, eta: float = 1e-3,
                       terminator: str = "sqrt"):
    """``Im m(E + i eta) / pi`` for the ``N x N`` associated Hermite matrix.

    Parameters
    ----------
    terminator : {"sqrt", "none"}
        ``"none"`` is the plain truncation.  ``"sqrt"`` closes the continued
        fraction with the m-function of a constant tail whose subdiagonal is
        ``sqrt(alpha + N)``.  The tail replaces the rows the truncation drops
        by a matrix with the same local coefficients, so the atoms of the
        finite matrix (spacing about ``pi / sqrt(N)`` near 0) are smeared into
        a continuum and small ``eta`` gives a smooth estimate.
    """
    if alpha < 0 or int(N) != N or N < 100 or not eta > 0:
        raise InvalidParameterError("need alpha >= 0, integer N >= 100 and eta > 0")
    if terminator not in ("sqrt", "none"):
        raise InvalidParameterError(f"unknown terminator {terminator!r}")
    J = associated_hermite(int(N), alpha)
    z = np.asarray(E, dtype=float) + 1j * eta
    tail = 0.0
    if terminator == "sqrt":
        b2 = alpha + N
        tail = b2 * _sqrt_tail(z, b2)
    m = continued_fraction_m(J.diag, J.offdiag ** 2, z, tail)[0]
    out = m.imag / math.pi
    return float(out) if np.ndim(out) == 0 else out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panels(lo: float, hi: float, width: float):
    """Gauss-Legendre nodes and weights on [lo, hi] split into panels."""
    k = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, k + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def log_potential(alpha: float, E: float, M: float = 30.0) -> float:
    """``int max(log|E - x|, -M) mu_alpha(x) dx``.

    Near ``x = E`` the substitution ``x = E +- exp(-u)`` turns the log
    singularity into a linear weight on ``u`` in ``[0, M]``; the capped core
    ``|x - E| < exp(-M)`` contributes ``-M * 2 exp(-M) * mu_alpha(E)``.  The
    outer region ``|x - E| >= 1`` is integrated on ``[-L, L]`` with
    ``L = 10 + 3 sqrt(alpha + 1)``; the density is taken as zero outside.
    """
    if not M > 0:
        raise InvalidParameterError("M must be positive")
    if alpha < 0:
        raise InvalidParameterError("alpha must be non-negative")
    u, wu = _panels(0.0, M, 1.0)
    L = 10.0 + 3.0 * math.sqrt(alpha + 1.0)
    lo_x, w_lo = _panels(-L, min(E - 1.0, L), 0.5) if E - 1.0 > -L else (np.empty(0), np.empty(0))
    hi_x, w_hi = _panels(max(E + 1.0, -L), L, 0.5) if E + 1.0 < L else (np.empty(0), np.empty(0))
    near = np.concatenate([E + np.exp(-u), E - np.exp(-u)])
    pts = np.concatenate([near, lo_x, hi_x, [E]])
    rho = np.zeros(pts.size)
    inside = np.abs(pts) <= L
    if np.any(inside):
        rho[inside] = dos(alpha, pts[inside])
    k = u.size
    near_val = np.sum(wu * (-u) * np.exp(-u) * (rho[:k] + rho[k:2 * k]))
    j = 2 * k
    outer = 0.0
    if lo_x.size:
        outer += np.sum(w_lo * np.log(np.abs(E - lo_x)) * rho[j:j + lo_x.size])
        j += lo_x.size
    if hi_x.size:
        outer += np.sum(w_hi * np.log(np.abs(E - hi_x)) * rho[j:j + hi_x.size])
    core = -M * 2.0 * math.exp(-M) * rho[-1]
    return float(near_val + outer + core)


def theta_E(alpha: float, E: float, M: float = 30.0) -> float:
    """Poisson intensity ``exp(-E**2/2 + 2 alpha U(E)) / (sqrt(2 pi) Gamma(alpha + 1))``.

    ``U`` is :func:`log_potential` at cap ``M``.
    """
    if not alpha > 0.0:
        raise InvalidParameterError(f"theta_E needs alpha > 0, got {alpha!r}")
    U = log_potential(alpha, E, M)
    return math.exp(-0.5 * E * E + 2.0 * alpha * U - math.lgamma(alpha + 1.0)) / _SQRT_2PI


def stieltjes_discrete(decomp, z):
    """``sum_j w_j / (lambda_j - z)`` of a discrete measure.

    ``decomp`` is a :class:`SpectralDecomposition` or a plain sequence of
    atoms, which then get uniform weights.
    """
    z = _check_upper(z)
    if isinstance(decomp, SpectralDecomposition):
        lam, w = decomp.eigenvalues, decomp.weights
    else:
        lam = np.asarray(decomp, dtype=float).ravel()
        if lam.size == 0:
            raise InvalidParameterError("empty measure")
        w = np.full(lam.size, 1.0 / lam.size)
    s = np.sum(w / (lam - z[..., None]), axis=-1)
    return complex(s) if s.ndim == 0 else s


@dataclass(frozen=True)
class DensityModel:
    """Evaluators for the limiting objects at fixed ``alpha``.

    Attributes
    ----------
    alpha : float
    T : float or None
        Cutoff for the ``f_alpha`` quadrature (None picks it per call).
    truncation : int
        Size of the associated Hermite matrix used by :meth:`stieltjes`.
    """

    alpha: float
    T: float | None = None
    truncation: int = 5000

    def __post_init__(self):
        if self.alpha < 0:
            raise InvalidParameterError("alpha must be non-negative")

    def f_hat(self, E):
        return f_hat(self.alpha, E, self.T)

    def dos(self, E):
        return dos(self.alpha, E, self.T)

    def theta(self, E, M: float = 30.0):
        return theta_E(self.alpha, E, M)

    def log_potential(self, E, M: float = 30.0):
        return log_potential(self.alpha, E, M)

    def stieltjes(self, z):
        """Stieltjes transform ``int mu_alpha(dx) / (x - z)``.

        Evaluated through the associated Hermite continued fraction closed
        with the square-root tail, accurate when ``Im z`` is well above the
        atom spacing ``pi / sqrt(truncation)`` or with the tail in place.
        """
        z = _check_upper(z)
        J = associated_hermite(self.truncation, self.alpha)
        b2 = self.alpha + self.truncation
        m = continued_fraction_m(J.diag, J.offdiag ** 2, z, b2 * _sqrt_tail(z, b2))[0]
        return complex(m) if m.ndim == 0 else m


def dos_table(alpha: float, energies, N: int = 5000, eta: float = 1e-3):
    """Rows ``(E, dos, theta_E, dos_via_truncation)`` for each energy."""
    E = np.asarray(energies, dtype=float)
    d = dos(alpha, E) if E.size else np.empty(0)
    if alpha > 0:
        th = np.array([theta_E(alpha, e) for e in E])
    else:
        th = np.full(E.shape, np.nan)
    tr = dos_via_truncation(alpha, E, N, eta) if E.size else np.empty(0)
    return np.column_stack([E, np.atleast_1d(d), th, np.atleast_1d(tr)])
