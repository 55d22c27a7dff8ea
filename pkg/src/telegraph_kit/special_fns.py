"""
Special functions behind every density of the telegraph process.

The three-parameter (Prabhakar) Mittag-Leffler function

.. math::
    E^{\\gamma}_{\\nu,\\delta}(x) = \\sum_{j\\ge0}
        \\frac{\\Gamma(\\gamma+j)}{\\Gamma(\\gamma)\\, j!}
        \\frac{x^j}{\\Gamma(\\nu j+\\delta)}

is evaluated in log space so that normalisers such as
:math:`E^{k}_{1,2k+1}` stay finite for several hundred switches. With
:math:`\\nu=1` the function is a scaled Kummer function,
:math:`E^{\\gamma}_{1,\\delta}(x) = {}_1F_1(\\gamma;\\delta;x)/\\Gamma(\\delta)`,
so negative arguments are mapped to positive ones through

.. math::
    E^{\\gamma}_{1,\\delta}(x) = e^{x} E^{\\delta-\\gamma}_{1,\\delta}(-x),

which turns the alternating series into a positive-term one.

The modified Bessel functions :math:`I_0, I_1` use the power series for
moderate arguments and the Hankel asymptotic expansion beyond.
"""

import math
from dataclasses import dataclass

import mpmath

from .errors import ConvergenceError, ValidationError

TOL_ML = 1e-13
MAX_TERMS = 10_000

# Switch from the power series to the asymptotic expansion for I_0, I_1.
_BESSEL_ASYMPTOTIC_FROM = 25.0

__all__ = [
    "MLParams",
    "TOL_ML",
    "MAX_TERMS",
    "bessel_i",
    "bessel_ie",
    "log_gamma",
    "log_mittag_leffler",
    "mittag_leffler",
    "ml",
    "log_ml",
    "reflection_identity",
]


@dataclass(frozen=True)
class MLParams:
    """Parameters (nu, delta, gamma) of the generalized Mittag-Leffler function.

    ``gamma == 0`` is accepted and means the limit of the series, which keeps
    only the ``j = 0`` term; floor-exponent formulas produce it for the first
    arrival time.
    """

    nu: float
    delta: float
    gamma: float

    def __post_init__(self):
        if not (self.nu > 0 and self.delta > 0 and self.gamma >= 0):
            raise ValidationError(
                f"Mittag-Leffler parameters need nu>0, delta>0, gamma>=0; got {self}"
            )


def log_gamma(x):
    """Natural logarithm of the gamma function for ``x > 0``."""
    if not x > 0:
        raise ValidationError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def _log_positive_series(nu, delta, gamma, x, tol, max_terms):
    """log of the series for ``x >= 0``: every term is nonnegative."""
    if x == 0.0 or gamma == 0.0:
        return -math.lgamma(delta)
    log_x = math.log(x)
    # terms are tracked relative to a moving scale to avoid overflow
    scale = 0.0
    total = 1.0
    term = 1.0
    for j in range(max_terms):
        if nu == 1.0:
            ratio = (gamma + j) * x / ((j + 1.0) * (j + delta))
        else:
            log_ratio = (
                math.log(gamma + j)
                - math.log(j + 1.0)
                + log_x
                + math.lgamma(nu * j + delta)
                - math.lgamma(nu * (j + 1) + delta)
            )
            ratio = math.exp(log_ratio)
        term *= ratio
        total += term
        if total > 1e250:
            scale += math.log(total)
            term /= total
            total = 1.0
        if ratio < 1.0 and term <= tol * total * (1.0 - ratio):
            return scale + math.log(total) - math.lgamma(delta)
    raise ConvergenceError(
        "Mittag-Leffler series did not converge",
        partial=math.exp(min(scale, 700.0)) * total,
        terms=max_terms,
    )


def _alternating_series(nu, delta, gamma, x, tol, max_terms):
    """Direct compensated summation; only used when no reflection applies."""
    terms = []
    log_abs_x = math.log(-x)
    log_coeff = math.lgamma(gamma) if gamma > 0 else 0.0
    for j in range(max_terms):
        if gamma == 0.0 and j > 0:
            break
        log_mag = (
            (math.lgamma(gamma + j) - log_coeff if gamma > 0 else 0.0)
            - math.lgamma(j + 1.0)
            + j * log_abs_x
            - math.lgamma(nu * j + delta)
        )
        if log_mag > 700:
            raise ConvergenceError("alternating Mittag-Leffler series overflows",
                                   partial=math.fsum(terms), terms=j)
        term = math.exp(log_mag) * (-1.0 if j % 2 else 1.0)
        terms.append(term)
        if j > 2 * abs(x) + 2 and abs(term) < tol * abs(math.fsum(terms)):
            return math.fsum(terms)
    if gamma == 0.0:
        return math.fsum(terms)
    raise ConvergenceError("alternating Mittag-Leffler series did not converge",
                           partial=math.fsum(terms), terms=max_terms)


def log_ml(gamma, delta, x, nu=1.0, tol=TOL_ML, max_terms=MAX_TERMS):
    """Natural log of :math:`E^{\\gamma}_{\\nu,\\delta}(x)`.

    Negative arguments with ``nu == 1`` and ``delta >= gamma`` go through the
    Kummer reflection and never cancel. Other negative arguments fall back to
    compensated summation of the alternating series.

    Raises
    ------
    ConvergenceError
        If the series has not settled after ``max_terms`` terms, or the
        alternating fallback yields a non-positive value.
    """
    MLParams(nu, delta, gamma)
    if x >= 0.0:
        return _log_positive_series(nu, delta, gamma, x, tol, max_terms)
    if gamma == 0.0:
        return -math.lgamma(delta)
    if nu == 1.0 and delta >= gamma:
        return x + _log_positive_series(1.0, delta, delta - gamma, -x, tol, max_terms)
    value = _alternating_series(nu, delta, gamma, x, tol, max_terms)
    if value <= 0.0:
        raise ConvergenceError("alternating Mittag-Leffler sum lost all precision",
                               partial=value, terms=max_terms)
    return math.log(value)


def ml(gamma, delta, x):
    """Shorthand for :math:`E^{\\gamma}_{1,\\delta}(x)`."""
    return math.exp(log_ml(gamma, delta, x))


def log_mittag_leffler(params, x, tol=TOL_ML):
    return log_ml(params.gamma, params.delta, x, nu=params.nu, tol=tol)


def mittag_leffler(params, x, tol=TOL_ML):
    """Generalized Mittag-Leffler function :math:`E^{\\gamma}_{\\nu,\\delta}(x)`.

    Parameters
    ----------
    params : MLParams
    x : float
        Any real argument.
    tol : float
        Relative truncation tolerance of the series.

    Examples
    --------
    >>> round(mittag_leffler(MLParams(1, 1, 1), 1.0), 12)
    2.718281828459
    """
    return math.exp(log_mittag_leffler(params, x, tol=tol))


def _ml_direct_mp(gamma, delta, z):
    """Term-by-term series in multiprecision, sized to absorb cancellation."""
    extra = int(abs(z) / math.log(10.0)) + 25
    with mpmath.workdps(extra):
        z = mpmath.mpf(z)
        total = mpmath.mpf(0)
        term = 1 / mpmath.gamma(delta)
        j = 0
        while True:
            total += term
            term = term * (gamma + j) * z / ((j + 1) * (j + delta))
            j += 1
            if j > 2 * abs(z) + 10 and abs(term) < abs(total) * mpmath.mpf(10) ** (-30):
                break
            if j > MAX_TERMS:
                raise ConvergenceError("direct Mittag-Leffler series did not converge",
                                       partial=float(total), terms=j)
        return float(total)


def reflection_identity(gamma1, gamma2, y_minus_x):
    """Both sides of :math:`E^{\\gamma_1}_{1,\\gamma_1+\\gamma_2}(z) = e^{z}E^{\\gamma_2}_{1,\\gamma_1+\\gamma_2}(-z)`.

    The left side is summed term by term (with enough working precision to
    survive the cancellation of a negative ``z``); the right side is built
    from the float evaluator. Agreement of the two is the check.

    Returns
    -------
    (float, float)
        ``(lhs, rhs)``.
    """
    if gamma1 < 1 or gamma2 < 1:
        raise ValidationError("reflection identity needs gamma1, gamma2 >= 1")
    delta = gamma1 + gamma2
    z = float(y_minus_x)
    lhs = _ml_direct_mp(gamma1, delta, z)
    # combined in log space so that e^{z} and E(-z) never over/underflow separately
    rhs = math.exp(z + log_ml(gamma2, delta, -z))
    return lhs, rhs


def _bessel_series_scaled(order, x):
    half = 0.5 * x
    term = 1.0 if order == 0 else half
    total = term
    half_sq = half * half
    k = 0
    while True:
        term *= half_sq / ((k + 1.0) * (k + 1.0 + order))
        total += term
        k += 1
        if term <= 1e-17 * total or k > 10_000:
            break
    return total * math.exp(-x)


def _bessel_asymptotic_scaled(order, x):
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    k = 1
    while k < 60:
        new = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(new) >= abs(term):
            break
        term = new
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        k += 1
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_ie(order, x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I_order(x)``.

    Only orders 0 and 1 and ``x >= 0`` are supported.
    """
    if order not in (0, 1):
        raise ValidationError("only Bessel orders 0 and 1 are implemented")
    if x < 0:
        raise ValidationError(f"bessel_ie needs x >= 0, got {x}")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x < _BESSEL_ASYMPTOTIC_FROM:
        return _bessel_series_scaled(order, x)
    return _bessel_asymptotic_scaled(order, x)


def bessel_i(order, x):
    """Modified Bessel function of the first kind, orders 0 and 1.

    >>> bessel_i(0, 0.0), bessel_i(1, 0.0)
    (1.0, 0.0)
    """
    if x > 700.0:
        return math.inf
    return bessel_ie(order, x) * math.exp(x)
