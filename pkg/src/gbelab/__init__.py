"""Simulation and verification tools for Gaussian beta ensembles at high temperature.

The ensemble is sampled through its tridiagonal (Jacobi) matrix model in the
regime ``n * beta = 2 * alpha``; spectra are computed with a Sturm-sequence
bisection solver and compared with the limiting density of the associated
Hermite polynomials.
"""

__version__ = "0.1.0"


class InvalidParameterError(ValueError):
    """A sampler or estimator was called with an out-of-range parameter."""


class PrecisionError(ArithmeticError):
    """A numerical routine could not reach its accuracy contract."""
