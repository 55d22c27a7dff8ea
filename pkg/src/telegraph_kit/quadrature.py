"""Thin adaptive-quadrature layer over QUADPACK (``scipy.integrate.quad``)."""

import warnings

from scipy import integrate

from .errors import ConvergenceError

EPSABS = 1e-10
EPSREL = 1e-10
LIMIT = 1000
MAX_LIMIT = 100_000


def integrate_1d(f, a, b, points=None, epsabs=EPSABS, epsrel=EPSREL, limit=LIMIT,
                 strict=False):
    """Integral of ``f`` over ``[a, b]`` by adaptive Gauss-Kronrod.

    ``points`` are interior break points (kinks, integrable singularities).
    Empty or reversed intervals give 0. With ``strict=True`` a reported error
    above ``max(epsabs, epsrel*|I|) * 100`` raises ``ConvergenceError``.
    """
    if not b > a:
        return 0.0
    limit = min(limit, MAX_LIMIT)
    pts = None
    if points:
        pts = sorted(p for p in points if a < p < b)
        pts = pts or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(f, a, b, points=pts, epsabs=epsabs, epsrel=epsrel,
                                    limit=limit)
    if strict and err > 100 * max(epsabs, epsrel * abs(value)):
        raise ConvergenceError("adaptive quadrature did not reach tolerance",
                               partial=value, terms=limit)
    return value
