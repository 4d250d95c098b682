"""Finite Jacobi matrices and the random models built from them.

Three families are provided:

* the Gaussian beta ensemble model ``T_{n,beta}``: i.i.d. N(0,1) diagonal,
  subdiagonal entry ``j`` distributed as chi_tilde with ``(n - j) * beta``
  degrees of freedom;
* truncations of the i.i.d. model ``J_alpha``: every subdiagonal entry is
  chi_tilde with ``2 * alpha`` degrees of freedom;
* the deterministic associated Hermite matrix with zero diagonal and
  subdiagonal ``sqrt(alpha + k)``, whose spectral measure is the limiting
  density of states.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import InvalidParameterError
from .randsrc import RandomStream, chi_tilde, log_gamma_variate, normal


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """Symmetric tridiagonal matrix with strictly positive subdiagonal.

    Attributes
    ----------
    diag : ndarray, shape (n,)
    offdiag : ndarray, shape (n - 1,)
    """

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float).ravel()
        b = np.array(self.offdiag, dtype=float).ravel()
        if d.size < 1:
            raise InvalidParameterError("a Jacobi matrix needs at least one row")
        if b.size != d.size - 1:
            raise InvalidParameterError(
                f"offdiag length {b.size} does not match diag length {d.size}")
        if np.any(~(b > 0.0)):
            raise InvalidParameterError("Jacobi subdiagonal entries must be strictly positive")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(b))):
            raise InvalidParameterError("Jacobi entries must be finite")
        d.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", b)

    @property
    def n(self) -> int:
        return self.diag.size

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, JacobiMatrix):
            return NotImplemented
        return (np.array_equal(self.diag, other.diag)
                and np.array_equal(self.offdiag, other.offdiag))

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.n > 1:
            m += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return m

    def to_csv(self) -> str:
        """Two-column CSV ``diag,offdiag``; the last row has an empty offdiag cell."""
        lines = ["diag,offdiag"]
        for i, a in enumerate(self.diag):
            b = f"{self.offdiag[i]:.17g}" if i < self.n - 1 else ""
            lines.append(f"{a:.17g},{b}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "JacobiMatrix":
        rows = [r for r in io.StringIO(text).read().splitlines() if r.strip()]
        if rows and rows[0].startswith("diag"):
            rows = rows[1:]
        diag, off = [], []
        for r in rows:
            a, _, b = r.partition(",")
            diag.append(float(a))
            if b.strip():
                off.append(float(b))
        return cls(np.array(diag), np.array(off))


def _check_size(n):
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"matrix size must be a positive integer, got {n!r}")
    return int(n)


def gbe_offdiag_dof(n: int, beta: float) -> np.ndarray:
    """Degrees of freedom ``(n - j) * beta`` of subdiagonal entries j = 1..n-1."""
    return (n - np.arange(1, n)) * beta


def sample_gbe(n: int, beta: float, stream: RandomStream) -> JacobiMatrix:
    """Draw the tridiagonal model ``T_{n,beta}`` of the Gaussian beta ensemble.

    The diagonal is drawn first, then the subdiagonal left to right, so the
    matrix is a pure function of the stream key.
    """
    n = _check_size(n)
    if not beta > 0.0:
        raise InvalidParameterError(f"beta must be positive, got {beta!r}")
    a = normal(stream, n)
    b = chi_tilde(gbe_offdiag_dof(n, beta), stream) if n > 1 else np.empty(0)
    return JacobiMatrix(a, b)


def sample_iid(n: int, alpha: float, stream: RandomStream) -> JacobiMatrix:
    """Draw the ``n x n`` truncation of the i.i.d. Jacobi matrix ``J_alpha``."""
    n = _check_size(n)
    if not alpha > 0.0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha!r}")
    a = normal(stream, n)
    b = chi_tilde(np.full(n - 1, 2.0 * alpha), stream) if n > 1 else np.empty(0)
    return JacobiMatrix(a, b)


def associated_hermite(n: int, alpha: float) -> JacobiMatrix:
    """Zero diagonal, subdiagonal ``sqrt(alpha + k)`` for k = 1..n-1."""
    n = _check_size(n)
    if alpha < 0:
        raise InvalidParameterError(f"alpha must be non-negative, got {alpha!r}")
    return JacobiMatrix(np.zeros(n), np.sqrt(alpha + np.arange(1, n, dtype=float)))


def restrict(J: JacobiMatrix, u: int, v: int) -> JacobiMatrix:
    """Principal submatrix on the 1-based inclusive index range ``u..v``."""
    if not (1 <= u <= v <= J.n):
        raise IndexError(f"restriction [{u}, {v}] out of range for n={J.n}")
    return JacobiMatrix(J.diag[u - 1:v], J.offdiag[u - 1:v - 1])


@dataclass(frozen=True)
class Model:
    """A random Jacobi matrix family at fixed size.

    ``kind`` is ``"gbe"`` (beta = 2 alpha / n unless ``beta`` is given
    explicitly) or ``"iid"``.  ``alpha = 0`` is allowed for the i.i.d. model
    in batch sampling, where it means a vanishing subdiagonal.
    """

    kind: str
    n: int
    alpha: float
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("gbe", "iid"):
            raise InvalidParameterError(f"unknown model kind {self.kind!r}")
        _check_size(self.n)
        if self.alpha < 0:
            raise InvalidParameterError("alpha must be non-negative")

    @property
    def effective_beta(self) -> float:
        return self.beta if self.beta is not None else 2.0 * self.alpha / self.n

    def offdiag_dof(self) -> np.ndarray:
        if self.kind == "gbe":
            return gbe_offdiag_dof(self.n, self.effective_beta)
        return np.full(self.n - 1, 2.0 * self.alpha)

    def sample(self, stream: RandomStream) -> JacobiMatrix:
        if self.kind == "gbe":
            return sample_gbe(self.n, self.effective_beta, stream)
        return sample_iid(self.n, self.alpha, stream)

    def sample_squared(self, stream: RandomStream):
        """Return ``(diag, offdiag**2)`` arrays for one replica.

        Same draw order as :meth:`sample`.  Squares are formed from the log
        variate, so entries far below the double range become exact zeros
        instead of being clamped.
        """
        a = normal(stream, self.n)
        dof = self.offdiag_dof()
        if self.n == 1:
            return a, np.empty(0)
        if np.all(dof > 0):
            b2 = np.exp(log_gamma_variate(dof / 2.0, stream))
        else:
            b2 = np.zeros(self.n - 1)
        return a, b2

    def sample_batch(self, seed: int, indices, substream: int = 0):
        """Stack ``(diag, offdiag**2)`` for the replicas in ``indices``."""
        indices = np.asarray(indices, dtype=np.int64)
        A = np.empty((indices.size, self.n))
        B2 = np.empty((indices.size, self.n - 1))
        for row, r in enumerate(indices):
            A[row], B2[row] = self.sample_squared(RandomStream(seed, int(r), substream))
        return A, B2
