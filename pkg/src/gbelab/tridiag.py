"""Spectral analysis of symmetric tridiagonal matrices.

Everything here works on the diagonal ``a`` and the *squared* subdiagonal
``b2`` so that the same kernels serve single matrices and stacks of replicas
(arrays of shape ``(R, n)`` and ``(R, n - 1)``).  Loops run over the matrix
index; numpy vectorizes across replicas and shifts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import InvalidParameterError, PrecisionError
from .jacobi import JacobiMatrix

_SAFMIN = np.finfo(float).tiny
_EPS = np.finfo(float).eps


def _as_batch(J_or_a, b2=None):
    if isinstance(J_or_a, JacobiMatrix):
        return J_or_a.diag[None, :], (J_or_a.offdiag ** 2)[None, :]
    a = np.atleast_2d(np.asarray(J_or_a, dtype=float))
    b2 = np.atleast_2d(np.asarray(b2, dtype=float)).reshape(a.shape[0], a.shape[1] - 1)
    return a, b2


def _pivmin(b2: np.ndarray) -> np.ndarray:
    """Per-row smallest admissible pivot; keeps ``b2 / pivot`` finite."""
    top = b2.max(axis=-1, keepdims=True) if b2.shape[-1] else np.zeros(b2.shape[:-1] + (1,))
    return _SAFMIN * np.maximum(1.0, top)


def sturm_counts(a: np.ndarray, b2: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each shift, for a stack of matrices.

    Parameters
    ----------
    a : ndarray (R, n)
    b2 : ndarray (R, n - 1)
        Squared subdiagonals.
    x : ndarray (R, K)
        Shifts, one row per matrix.

    Notes
    -----
    Uses the LDL^T pivots ``q_k = a_k - x - b2_{k-1} / q_{k-1}``; the count is
    the number of negative pivots.  An exactly zero pivot is replaced by
    ``+pivmin`` so a shift equal to an eigenvalue is not counted as above it.
    """
    x = np.asarray(x, dtype=float)
    pivmin = _pivmin(b2)
    q = a[:, :1] - x
    q = np.where(q == 0.0, pivmin, q)
    count = (q < 0.0).astype(np.int64)
    for k in range(1, a.shape[1]):
        q = (a[:, k:k + 1] - x) - b2[:, k - 1:k] / q
        q = np.where(q == 0.0, pivmin, q)
        count += q < 0.0
    return count


def sturm_count(J: JacobiMatrix, x):
    """Number of eigenvalues of ``J`` strictly below ``x`` (scalar or array)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    a, b2 = _as_batch(J)
    c = sturm_counts(a, b2, xs.ravel()[None, :])[0].reshape(xs.shape)
    return int(c[0]) if np.ndim(x) == 0 else c


def gershgorin(a: np.ndarray, b2: np.ndarray):
    """Row-wise Gershgorin interval ``(lo, hi)`` for stacked matrices."""
    b = np.sqrt(b2)
    r = np.zeros_like(a)
    r[:, :-1] += b
    r[:, 1:] += b
    lo = (a - r).min(axis=1)
    hi = (a + r).max(axis=1)
    pad = 2.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi)) + 4.0 * _SAFMIN
    return lo - pad, hi + pad


def _newton_refine(a, b2, lam, lo, hi, steps):
    """Newton steps on log det(J - lam), kept inside the bisection bracket."""
    pivmin = _pivmin(b2)
    with np.errstate(all="ignore"):
        return _newton_loop(a, b2, lam, lo, hi, steps, pivmin)


def _newton_loop(a, b2, lam, lo, hi, steps, pivmin):
    for _ in range(steps):
        q = a[:, :1] - lam
        q = np.where(q == 0.0, pivmin, q)
        dq = -np.ones_like(lam)
        s = dq / q
        for k in range(1, a.shape[1]):
            bk = b2[:, k - 1:k]
            dq = -1.0 + bk * dq / (q * q)
            q = (a[:, k:k + 1] - lam) - bk / q
            q = np.where(q == 0.0, pivmin, q)
            s = s + dq / q
        new = lam - 1.0 / s
        ok = np.isfinite(new) & (new >= lo) & (new <= hi)
        lam = np.where(ok, new, lam)
    return lam


def bisect_eigenvalues(a, b2, k, lo, hi, tol, newton_steps=0):
    """Locate eigenvalue number ``k`` (0-based, ascending) inside ``[lo, hi]``.

    ``k``, ``lo`` and ``hi`` have shape (R, K); the bracket must satisfy
    ``count(lo) <= k < count(hi)``.  Returns the midpoints after the bracket
    width drops below ``tol``.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), lo.shape[:1] + (1,))
    while True:
        width = hi - lo
        if np.all(width <= tol):
            break
        mid = lo + 0.5 * width
        # adjacent floats: the midpoint no longer moves
        if np.all((mid == lo) | (mid == hi) | (width <= tol)):
            break
        c = sturm_counts(a, b2, mid)
        below = c <= k
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    lam = lo + 0.5 * (hi - lo)
    if newton_steps:
        lam = _newton_refine(a, b2, lam, lo, hi, newton_steps)
    return lam


def default_tol(a, b2) -> np.ndarray:
    lo, hi = gershgorin(a, b2)
    return 1e-12 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))


def eigenvalues_batch(a, b2, tol=None, newton_steps=2) -> np.ndarray:
    """All eigenvalues of each stacked matrix, ascending, shape (R, n)."""
    a, b2 = _as_batch(a, b2)
    R, n = a.shape
    lo, hi = gershgorin(a, b2)
    if tol is None:
        tol = default_tol(a, b2)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (R,))
    k = np.broadcast_to(np.arange(n), (R, n))
    lam = bisect_eigenvalues(a, b2, k, np.repeat(lo[:, None], n, 1),
                             np.repeat(hi[:, None], n, 1), tol[:, None], newton_steps)
    return np.sort(lam, axis=1)


def eigenvalues(J: JacobiMatrix, tol: float | None = None) -> np.ndarray:
    """Eigenvalues of ``J`` by Sturm bisection plus Newton polishing.

    The bracket starts from Gershgorin bounds.  The default tolerance is
    ``1e-12 * max(1, spectral radius bound)``.  Returned values are strictly
    increasing; eigenvalues closer than one ulp are separated by ulp steps.
    """
    if tol is not None and not tol > 0:
        raise InvalidParameterError("tol must be positive")
    lam = eigenvalues_batch(J.diag, J.offdiag ** 2, tol)[0]
    for i in range(1, lam.size):
        if lam[i] <= lam[i - 1]:
            lam[i] = np.nextafter(lam[i - 1], np.inf)
    return lam


def window_eigenvalues_batch(a, b2, lo, hi, tol=None):
    """Eigenvalues inside ``[lo, hi)`` for each stacked matrix.

    Only the eigenvalues in the window are bracketed, which costs
    ``O(n * log(1/tol))`` per eigenvalue found instead of a full spectrum.
    Returns a list of 1-d arrays.
    """
    a, b2 = _as_batch(a, b2)
    R = a.shape[0]
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (R,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (R,)).copy()
    c = sturm_counts(a, b2, np.stack([lo, hi], axis=1))
    c_lo, c_hi = c[:, 0], c[:, 1]
    kmax = int((c_hi - c_lo).max()) if R else 0
    if kmax == 0:
        return [np.empty(0) for _ in range(R)]
    if tol is None:
        tol = 1e-13 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    offs = np.arange(kmax)
    k = c_lo[:, None] + offs[None, :]
    valid = k < c_hi[:, None]
    k = np.where(valid, k, c_lo[:, None])
    lam = bisect_eigenvalues(a, b2, k, np.repeat(lo[:, None], kmax, 1),
                             np.repeat(hi[:, None], kmax, 1),
                             np.broadcast_to(np.asarray(tol, dtype=float), (R,))[:, None])
    return [np.sort(lam[r, valid[r]]) for r in range(R)]


def spectral_weights(J: JacobiMatrix, eigs) -> np.ndarray:
    """Squared first eigenvector components ``q_j**2``.

    Weights below the double range come back as 0; :func:`log_spectral_weights`
    keeps them.
    """
    return np.exp(log_spectral_weights(J, eigs))


def log_spectral_weights(J: JacobiMatrix, eigs) -> np.ndarray:
    """Natural log of the squared first eigenvector components ``q_j**2``.

    ``q_j**2 = 1 / sum_k p_k(lambda_j)**2`` where ``p_k`` are the orthonormal
    polynomials of the three-term recursion of ``J``.  The values
    ``p_k(lambda_j)`` are the components of the eigenvector scaled to have
    first entry one; they are evaluated by a twisted factorization (top-down
    pivots above the twist index, bottom-up below it) in log magnitude, which
    avoids both overflow and the instability of running the recursion past
    a decoupling point.
    """
    eigs = np.asarray(eigs, dtype=float)
    n = J.n
    if eigs.shape != (n,):
        raise InvalidParameterError(f"expected {n} eigenvalues, got shape {eigs.shape}")
    if n == 1:
        return np.zeros(1)
    if np.any(np.diff(eigs) <= 0.0):
        raise PrecisionError("eigenvalues are not distinct; weights are ill-conditioned")
    a = J.diag
    b = J.offdiag
    b2 = b * b
    logb = np.log(b)
    pivmin = float(_pivmin(b2[None, :])[0, 0])
    lam = eigs

    dplus = np.empty((n, n))
    d = a[0] - lam
    dplus[0] = np.where(d == 0.0, pivmin, d)
    for k in range(1, n):
        d = (a[k] - lam) - b2[k - 1] / dplus[k - 1]
        dplus[k] = np.where(d == 0.0, pivmin, d)
    dminus = np.empty((n, n))
    d = a[n - 1] - lam
    dminus[n - 1] = np.where(d == 0.0, pivmin, d)
    for k in range(n - 2, -1, -1):
        d = (a[k] - lam) - b2[k] / dminus[k + 1]
        dminus[k] = np.where(d == 0.0, pivmin, d)
    twist = np.abs(dplus + dminus - (a[:, None] - lam[None, :]))
    r = np.argmin(twist, axis=0)  # twist index per eigenvalue

    # log|v_k| with v_r = 1
    up = logb[:, None] - np.log(np.abs(dplus[:-1]))      # k -> k from k+1, k < r
    down = logb[:, None] - np.log(np.abs(dminus[1:]))    # k+1 from k, k+1 > r
    Sp = np.vstack([np.zeros(n), np.cumsum(up, axis=0)])     # Sp[k] = sum_{j<k} up[j]
    Sm = np.vstack([np.zeros(n), np.cumsum(down, axis=0)])   # Sm[k] = sum_{j<k} down[j]
    idx = np.arange(n)[:, None]
    cols = np.arange(n)
    logv = np.where(idx < r, Sp[r, cols] - Sp, 0.0)
    logv = np.where(idx > r, Sm - Sm[r, cols], logv)
    two = 2.0 * logv
    top = two.max(axis=0)
    lse = top + np.log(np.exp(two - top).sum(axis=0))
    logw = two[0] - lse
    total = np.exp(logw).sum()
    if not (np.all(np.isfinite(logw)) and abs(total - 1.0) <= 1e-8):
        raise PrecisionError(f"spectral weights sum to {total!r}; eigenvalues too inaccurate")
    return logw


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Sorted eigenvalues with their spectral-measure weights.

    ``log_weights`` is the exact representation: with tiny subdiagonal
    entries some weights are far below the double range and ``weights``
    (their exponentials) underflow to zero.  Positivity is checked on the
    log scale.
    """

    eigenvalues: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if self.log_weights is not None:
            logw = np.asarray(self.log_weights, dtype=float)
            w = np.exp(logw)
        else:
            w = np.asarray(self.weights, dtype=float)
            with np.errstate(divide="ignore"):
                logw = np.log(w)
        if lam.shape != w.shape or lam.ndim != 1 or lam.size == 0:
            raise InvalidParameterError("eigenvalues and weights must be equal-length vectors")
        if np.any(np.diff(lam) <= 0):
            raise InvalidParameterError("eigenvalues must be strictly increasing")
        if not np.all(np.isfinite(logw)) or abs(w.sum() - 1.0) > 1e-10:
            raise InvalidParameterError("weights must be positive and sum to one")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "log_weights", logw)

    @property
    def n(self):
        return self.eigenvalues.size


def spectral_decomposition(J: JacobiMatrix, tol=None) -> SpectralDecomposition:
    lam = eigenvalues(J, tol)
    logw = log_spectral_weights(J, lam)
    # renormalize the rounding residue of the sum
    logw = logw - math.log(np.exp(logw).sum())
    return SpectralDecomposition(lam, np.exp(logw), logw)


def char_poly(J: JacobiMatrix, z) -> tuple[complex, int]:
    """``det(z I - J)`` as ``(mantissa, exponent)`` with value ``mantissa * 2**exponent``.

    Uses ``D_k = (z - a_k) D_{k-1} - b_{k-1}**2 D_{k-2}`` and rescales by a
    power of two whenever the magnitude leaves ``[2**-200, 2**200]``.
    """
    z = complex(z)
    a = J.diag
    b2 = J.offdiag ** 2
    prev, cur = 1.0 + 0j, z - a[0]
    exponent = 0
    for k in range(1, J.n):
        prev, cur = cur, (z - a[k]) * cur - b2[k - 1] * prev
        mag = max(abs(cur), abs(prev))
        if mag != 0.0 and not (2.0 ** -200 <= mag <= 2.0 ** 200):
            _, e = math.frexp(mag)
            prev = prev * 2.0 ** -e
            cur = cur * 2.0 ** -e
            exponent += e
    mag = abs(cur)
    if mag == 0.0:
        return 0j, 0
    _, e = math.frexp(mag)
    return cur * 2.0 ** -e, exponent + e


def _check_upper(z):
    z = np.asarray(z, dtype=complex)
    if np.any(~(z.imag > 0)):
        raise InvalidParameterError("spectral parameter must have positive imaginary part")
    return z


def continued_fraction_m(a, b2, z, tail=0.0):
    """``m(z) = (J - z)^{-1}(1, 1)`` by the backward continued fraction.

    ``m_k = 1 / (a_k - z - b_k**2 m_{k+1})`` from the bottom row up.  ``tail``
    is the term ``b_n**2 m_{n+1}`` subtracted in the last row; zero gives the
    finite matrix.  ``a`` and ``b2`` may be stacked (R, n); ``z`` broadcasts.
    """
    a, b2 = _as_batch(a, b2)
    z = np.asarray(z, dtype=complex)
    m = 1.0 / (a[:, -1:].reshape(-1, *([1] * z.ndim)) - z - tail)
    for k in range(a.shape[1] - 2, -1, -1):
        ak = a[:, k].reshape(-1, *([1] * z.ndim))
        bk = b2[:, k].reshape(-1, *([1] * z.ndim))
        m = 1.0 / (ak - z - bk * m)
    return m


def m_function(J: JacobiMatrix, z):
    """The (1,1) resolvent entry, i.e. the Stieltjes transform of the spectral measure."""
    z = _check_upper(z)
    m = continued_fraction_m(J.diag, J.offdiag ** 2, z)[0]
    return complex(m) if m.ndim == 0 else m


def _forward_g(a, b2, z):
    """g+_k = (J_[1,k] - z)^{-1}(k, k), stacked; shape (R, n)."""
    R, n = a.shape
    g = np.empty((R, n), dtype=complex)
    g[:, 0] = 1.0 / (a[:, 0] - z)
    for k in range(1, n):
        g[:, k] = 1.0 / (a[:, k] - z - b2[:, k - 1] * g[:, k - 1])
    return g


def _backward_g(a, b2, z):
    """g-_k = (J_[k,n] - z)^{-1}(k, k), stacked; shape (R, n)."""
    R, n = a.shape
    g = np.empty((R, n), dtype=complex)
    g[:, n - 1] = 1.0 / (a[:, n - 1] - z)
    for k in range(n - 2, -1, -1):
        g[:, k] = 1.0 / (a[:, k] - z - b2[:, k] * g[:, k + 1])
    return g


def resolvent_diagonal_batch(a, b2, z) -> np.ndarray:
    """Diagonal of ``(J - z)^{-1}`` for each stacked matrix, shape (R, n)."""
    a, b2 = _as_batch(a, b2)
    z = complex(_check_upper(z))
    gp = _forward_g(a, b2, z)
    gm = _backward_g(a, b2, z)
    denom = a - z
    denom[:, 1:] -= b2 * gp[:, :-1]
    denom[:, :-1] -= b2 * gm[:, 1:]
    return 1.0 / denom


def first_row_log_abs_batch(a, b2, z) -> np.ndarray:
    """``log |G(z; 1, x)|`` for x = 1..n, stacked, shape (R, n).

    ``G(1, x) = G(1, 1) * prod_{k<x} (-b_k g-_{k+1})``; accumulated in log
    magnitude so distances of hundreds of sites do not underflow.
    """
    a, b2 = _as_batch(a, b2)
    z = complex(_check_upper(z))
    gm = _backward_g(a, b2, z)
    with np.errstate(divide="ignore"):
        steps = 0.5 * np.log(b2) + np.log(np.abs(gm[:, 1:]))
    out = np.empty(a.shape)
    out[:, 0] = np.log(np.abs(gm[:, 0]))
    out[:, 1:] = out[:, :1] + np.cumsum(steps, axis=1)
    return out


def green_entry(J: JacobiMatrix, z, x: int, y: int) -> complex:
    """Entry ``(x, y)`` (1-based) of the resolvent ``(J - z)^{-1}``.

    The diagonal entry comes from the forward and backward continued
    fractions; off-diagonal entries multiply it by the transfer ratios
    ``-b_k g+_k``, summed in log magnitude and phase.  This is the
    ratio form of ``phi_x psi_y / W`` and is stable for any separation.
    """
    z = complex(_check_upper(z))
    n = J.n
    if not (1 <= x <= n and 1 <= y <= n):
        raise IndexError(f"indices ({x}, {y}) out of range for n={n}")
    if x > y:
        x, y = y, x
    a, b2 = J.diag[None, :], (J.offdiag ** 2)[None, :]
    gp = _forward_g(a, b2, z)[0]
    gm = _backward_g(a, b2, z)[0]
    den = a[0, y - 1] - z
    if y > 1:
        den -= b2[0, y - 2] * gp[y - 2]
    if y < n:
        den -= b2[0, y - 1] * gm[y]
    gyy = 1.0 / den
    if x == y:
        out = gyy
    else:
        ratios = -J.offdiag[x - 1:y - 1] * gp[x - 1:y - 1]
        logmag = np.log(np.abs(ratios)).sum() + math.log(abs(gyy))
        phase = np.angle(ratios).sum() + np.angle(gyy)
        out = math.exp(logmag) * complex(math.cos(phase), math.sin(phase))
    if not np.isfinite(out):
        raise PrecisionError("non-finite Green's function entry")
    return complex(out)


def _cyclic_jacobi(J: JacobiMatrix):
    if J.n > 16:
        raise InvalidParameterError("dense oracle is limited to n <= 16")
    A = J.to_dense()
    n = J.n
    V = np.eye(n)
    for _ in range(100):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= 1e-15 * max(1.0, np.abs(np.diag(A)).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                A[p, q] = A[q, p] = 0.0
                V = V @ rot
    lam = np.diag(A)
    order = np.argsort(lam)
    return lam[order], V[:, order]


def dense_eig_oracle(J: JacobiMatrix) -> np.ndarray:
    """Eigenvalues by cyclic Jacobi rotations on the dense matrix (test oracle, n <= 16)."""
    return _cyclic_jacobi(J)[0]


def dense_eigh_oracle(J: JacobiMatrix):
    """Eigenvalues and squared first eigenvector components, same method."""
    lam, V = _cyclic_jacobi(J)
    return lam, V[0] ** 2
