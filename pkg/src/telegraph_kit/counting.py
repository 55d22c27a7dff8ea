"""
The switching process N: a Poisson-type counter whose exponential waiting
times alternate between rate ``lambda1`` (first, third, ... wait) and
``lambda2`` (second, fourth, ...).

All closed forms are written in terms of :math:`E^{\\gamma}_{1,\\delta}` at the
argument :math:`t(\\lambda_1-\\lambda_2)` and evaluated in log space.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, ValidationError
from .special_fns import log_ml

__all__ = [
    "AltSum",
    "MLEstimate",
    "RatePair",
    "SwitchRecord",
    "alt_sum",
    "alt_sum_density",
    "alt_sum_moment",
    "arrival_pair_density",
    "first_arrival_density",
    "log_likelihood",
    "log_pmf",
    "mle_rates",
    "pmf",
    "pmf_table",
    "simulate_switches",
]

# tail truncation for pmf sums
PMF_TAIL = 1e-14
PMF_TAIL_RUN = 5


@dataclass(frozen=True)
class RatePair:
    """Ordered switching rates: ``lambda1`` governs the first waiting time."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValidationError(f"rates must be positive, got {self}")

    def swapped(self):
        return RatePair(self.lambda2, self.lambda1)

    @property
    def diff(self):
        return self.lambda1 - self.lambda2

    def rate_after(self, k):
        """Rate of the waiting time that follows the ``k``-th switch."""
        return self.lambda1 if k % 2 == 0 else self.lambda2


@dataclass(frozen=True)
class SwitchRecord:
    """Arrival times of N on ``(0, horizon)``; ``T_0 = 0`` is implicit."""

    horizon: float
    arrival_times: tuple

    def __post_init__(self):
        times = tuple(float(x) for x in self.arrival_times)
        object.__setattr__(self, "arrival_times", times)
        if not self.horizon > 0:
            raise ValidationError("horizon must be positive")
        prev = 0.0
        for x in times:
            if not prev < x < self.horizon:
                raise ValidationError("arrival times must increase strictly inside (0, horizon)")
            prev = x

    @property
    def n(self):
        return len(self.arrival_times)


@dataclass(frozen=True)
class AltSum:
    """Alternating sum ``T1 - T2 + T3 - ...`` of the arrival times and its parity."""

    value: float
    parity: str

    @property
    def even(self):
        return self.parity == "even"


@dataclass(frozen=True)
class MLEstimate:
    lambda1: float
    lambda2: float
    branch: str
    degenerate: bool = False


def alt_sum(record):
    """``AltSum`` of a record (``S_n(t)`` with ``n = N(t)``)."""
    total = math.fsum(x if i % 2 == 0 else -x for i, x in enumerate(record.arrival_times))
    return AltSum(total, "even" if record.n % 2 == 0 else "odd")


def _check_t(t):
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")


def log_pmf(rates, t, n):
    """Log of ``P{N(t) = n}``; ``-inf`` for negative ``n``."""
    _check_t(t)
    if n < 0:
        return -math.inf
    l1t = rates.lambda1 * t
    l2t = rates.lambda2 * t
    z = t * rates.diff
    k, odd = divmod(n, 2)
    if odd:
        return ((k + 1) * math.log(l1t) + k * math.log(l2t) - l1t
                + log_ml(k + 1, 2 * k + 2, z))
    return k * (math.log(l1t) + math.log(l2t)) - l1t + log_ml(k, 2 * k + 1, z)


def pmf(rates, t, n):
    """Probability mass ``P{N(t) = n}`` of the alternating-rate counter.

    >>> round(pmf(RatePair(1.0, 1.0), 1.0, 0), 12) == round(math.exp(-1), 12)
    True
    """
    return math.exp(log_pmf(rates, t, n))


def pmf_table(rates, t, nmax=None):
    """pmf values for ``n = 0, 1, ...``.

    Without ``nmax`` the table runs until ``PMF_TAIL_RUN`` consecutive values
    past the mode fall below ``PMF_TAIL``.
    """
    values = []
    small = 0
    n = 0
    mode_guess = 2 * max(rates.lambda1, rates.lambda2) * t
    while True:
        p = pmf(rates, t, n)
        values.append(p)
        if nmax is not None:
            if n >= nmax:
                break
        else:
            small = small + 1 if (p < PMF_TAIL and n > mode_guess) else 0
            if small >= PMF_TAIL_RUN:
                break
        n += 1
    return np.array(values)


def arrival_pair_density(rates, t, n, l, m, t_l, t_m):
    """Density of ``(T_l, T_m)`` given ``N(t) = n`` at ``(t_l, t_m)``.

    Zero outside ``0 < t_l < t_m < t``. Requires ``n >= m > l >= 1``.
    """
    _check_t(t)
    if not (n >= m > l >= 1):
        raise ValidationError(f"need n >= m > l >= 1, got n={n}, l={l}, m={m}")
    if not (0.0 < t_l < t_m < t):
        return 0.0
    d = rates.diff
    log_val = (
        (l - 1) * math.log(t_l)
        + (m - l - 1) * math.log(t_m - t_l)
        + (n - m) * math.log(t - t_m)
        - n * math.log(t)
        + log_ml(l // 2, l, t_l * d)
        + log_ml(m // 2 - l // 2, m - l, (t_m - t_l) * d)
        + log_ml((n + 1) // 2 - m // 2, n + 1 - m, (t - t_m) * d)
        - log_ml((n + 1) // 2, n + 1, t * d)
    )
    return math.exp(log_val)


def first_arrival_density(rates, t, n, t1):
    """Density of ``T_1`` given ``N(t) = n`` (``n >= 1``).

    Memorylessness gives ``lambda1 e^{-lambda1 t1} P'{N(t - t1) = n - 1}`` over
    ``P{N(t) = n}``, with the rates swapped after the first switch.
    """
    if n < 1:
        raise ValidationError("first arrival needs n >= 1")
    if not (0.0 < t1 < t):
        return 0.0
    tail = log_pmf(rates.swapped(), t - t1, n - 1)
    return math.exp(math.log(rates.lambda1) - rates.lambda1 * t1 + tail - log_pmf(rates, t, n))


def alt_sum_density(rates, t, n, s):
    """Density of ``S_n(t)`` given ``N(t) = n``.

    Even ``n`` lives on ``(-t, 0)``, odd ``n`` on ``(0, t)``; zero elsewhere.
    """
    _check_t(t)
    if n < 1:
        raise ValidationError("alternating sum needs n >= 1")
    d = rates.diff
    k, odd = divmod(n, 2)
    if odd:
        if not (0.0 < s < t):
            return 0.0
        log_val = (d * (t - s) + k * (math.log(s) + math.log(t - s))
                   - log_ml(k + 1, 2 * k + 2, t * d) - 2 * math.lgamma(k + 1)
                   - (2 * k + 1) * math.log(t))
    else:
        if not (-t < s < 0.0):
            return 0.0
        log_val = (-d * s + (k - 1) * math.log(-s) + k * math.log(t + s)
                   - log_ml(k, 2 * k + 1, t * d) - math.lgamma(k + 1) - math.lgamma(k)
                   - 2 * k * math.log(t))
    return math.exp(log_val)


def alt_sum_moment(rates, t, n, m):
    """``E[S_n(t)^m | N(t) = n]``.

    Needs ``m > -k`` for ``n = 2k`` and ``m > -k - 1`` for ``n = 2k + 1``.
    For even ``n`` the variable is negative, so ``m`` must be an integer.
    """
    _check_t(t)
    if n < 1:
        raise ValidationError("alternating sum needs n >= 1")
    z = t * rates.diff
    k, odd = divmod(n, 2)
    if odd:
        if not m > -k - 1:
            raise ValidationError(f"moment order must exceed {-k - 1}")
        log_val = (m * math.log(t) + math.lgamma(k + m + 1) - math.lgamma(k + 1)
                   + log_ml(k + 1, 2 * k + 2 + m, z) - log_ml(k + 1, 2 * k + 2, z))
        return math.exp(log_val)
    if not m > -k:
        raise ValidationError(f"moment order must exceed {-k}")
    if m != int(m):
        raise ValidationError("even-parity alternating sums are negative; use an integer order")
    m = int(m)
    log_val = (m * math.log(t) + math.lgamma(k + m) - math.lgamma(k)
               + log_ml(k + m, 2 * k + 1 + m, z) - log_ml(k, 2 * k + 1, z))
    return (-1.0) ** m * math.exp(log_val)


def _exposure(record):
    """(switches out of a1-state, time in a1-state, switches out of a2, time in a2)."""
    s = alt_sum(record)
    n = record.n
    t = record.horizon
    if s.even:
        return n // 2, t + s.value, n // 2, -s.value
    return (n + 1) // 2, s.value, (n - 1) // 2, t - s.value


def mle_rates(record):
    """Closed-form maximum likelihood estimates of the ordered rates.

    With ``S = S_{N(t)}(t)``: even ``N`` gives ``((N/2)/(t+S), (N/2)/(-S))``,
    odd ``N`` gives ``((N+1)/(2S), (N-1)/(2(t-S)))``. For ``N = 1`` the second
    estimate is 0 and ``degenerate`` is set.

    Raises
    ------
    EstimationError
        If the record holds no events.
    """
    n = record.n
    if n == 0:
        raise EstimationError("no events: rates are not estimable from an empty record")
    s = alt_sum(record).value
    t = record.horizon
    if n % 2 == 0:
        if not -t < s < 0:
            raise EstimationError("even record with alternating sum outside (-t, 0)")
        return MLEstimate((n / 2) / (t + s), (n / 2) / (-s), "even")
    if not 0 < s < t:
        raise EstimationError("odd record with alternating sum outside (0, t)")
    return MLEstimate((n + 1) / (2 * s), (n - 1) / (2 * (t - s)), "odd", degenerate=(n == 1))


def log_likelihood(record, lambda1, lambda2):
    """Log-likelihood of a censored record under ordered rates.

    Broadcasts over array-valued ``lambda1``/``lambda2``.
    """
    k1, tau1, k2, tau2 = _exposure(record)
    lambda1 = np.asarray(lambda1, dtype=float)
    lambda2 = np.asarray(lambda2, dtype=float)
    return k1 * np.log(lambda1) - lambda1 * tau1 + k2 * np.log(lambda2) - lambda2 * tau2


def simulate_switches(rates, t, stream, block=32):
    """Draw one record on ``(0, t)``; waiting times alternate Exp(lambda1), Exp(lambda2).

    ``stream`` is a ``CounterStream``; exactly one draw is consumed per
    waiting time, including the one that overshoots ``t``.
    """
    _check_t(t)
    times = []
    clock = 0.0
    k = 0
    while True:
        u = stream.uniforms(block)
        for i, ui in enumerate(u):
            rate = rates.lambda1 if k % 2 == 0 else rates.lambda2
            clock += -math.log(ui) / rate
            if clock >= t:
                stream.advance(i + 1 - block)
                return SwitchRecord(t, tuple(times))
            times.append(clock)
            k += 1
