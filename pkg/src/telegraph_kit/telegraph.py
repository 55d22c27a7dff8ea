"""
The telegraph process: a particle on the line moving at velocity ``a1`` or
``a2`` and reversing at the events of the alternating-rate counter.

Laws of the position are mixed: atoms at ``a1 t`` and ``a2 t`` (no switch)
and an absolutely continuous part on ``(a2 t, a1 t)``.
"""

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .counting import RatePair, simulate_switches
from .errors import ScopeError, ValidationError
from .quadrature import integrate_1d
from .special_fns import bessel_ie, log_ml

__all__ = [
    "MixedLaw",
    "PathSample",
    "ProcessParams",
    "atom_mass",
    "density",
    "density_given_n_v",
    "density_given_v",
    "law",
    "law_given_n_v",
    "law_given_v",
    "simulate_path",
    "velocity_posterior",
]


@dataclass(frozen=True)
class ProcessParams:
    """Velocities ``a1 > a2`` and ordered rates (``lambda1`` acts at ``a1``)."""

    a1: float
    a2: float
    rates: RatePair

    def __post_init__(self):
        if not self.a1 > self.a2:
            raise ValidationError(f"need a1 > a2, got a1={self.a1}, a2={self.a2}")

    @classmethod
    def from_values(cls, a1, a2, lambda1, lambda2=None):
        return cls(a1, a2, RatePair(lambda1, lambda1 if lambda2 is None else lambda2))

    @classmethod
    def symmetric_process(cls, c, lam):
        return cls(c, -c, RatePair(lam, lam))

    @property
    def width(self):
        return self.a1 - self.a2

    def is_symmetric(self):
        return self.a1 == -self.a2 > 0 and self.equal_rates()

    def equal_rates(self):
        """Homogeneous switching (``lambda1 == lambda2``)."""
        return self.rates.lambda1 == self.rates.lambda2

    def index(self, v):
        """1 for the upper velocity, 2 for the lower one.

        ``v`` may be the numeric velocity or the label ``"a1"``/``"a2"``.
        """
        if isinstance(v, str):
            if v in ("a1", "+", "up"):
                return 1
            if v in ("a2", "-", "down"):
                return 2
        elif v == self.a1:
            return 1
        elif v == self.a2:
            return 2
        raise ValidationError(f"velocity {v!r} is neither a1={self.a1} nor a2={self.a2}")

    def velocity(self, v):
        return self.a1 if self.index(v) == 1 else self.a2

    def other(self, v):
        return self.a2 if self.index(v) == 1 else self.a1

    def rate(self, v):
        return self.rates.lambda1 if self.index(v) == 1 else self.rates.lambda2

    def rates_from(self, v):
        """Rates in the order experienced by a motion started at ``v``."""
        return self.rates if self.index(v) == 1 else self.rates.swapped()


@dataclass(frozen=True)
class PathSample:
    """One trajectory on ``[0, t]``: initial velocity plus switch record."""

    params: ProcessParams
    v0: float
    switches: object  # SwitchRecord

    @property
    def horizon(self):
        return self.switches.horizon

    def knots(self):
        """Times and positions at 0, every switch, and the horizon."""
        times = (0.0,) + self.switches.arrival_times + (self.horizon,)
        pos = [0.0]
        v = self.v0
        for a, b in zip(times[:-1], times[1:]):
            pos.append(pos[-1] + v * (b - a))
            v = self.params.other(v)
        return np.array(times), np.array(pos)

    def velocity(self, s):
        k = bisect.bisect_right(self.switches.arrival_times, s)
        return self.v0 if k % 2 == 0 else self.params.other(self.v0)

    def switches_up_to(self, s):
        return bisect.bisect_right(self.switches.arrival_times, s)

    def position(self, s):
        times, pos = self.knots()
        return float(np.interp(s, times, pos))

    def min_up_to(self, s):
        times, pos = self.knots()
        inside = times < s
        return float(min(pos[inside].min(initial=0.0), self.position(s)))

    def max_up_to(self, s):
        times, pos = self.knots()
        inside = times < s
        return float(max(pos[inside].max(initial=0.0), self.position(s)))


@dataclass
class MixedLaw:
    """Atoms plus a density on an open interval.

    ``density`` must vanish outside ``support``; it is called on scalars.
    """

    atoms: tuple
    support: tuple
    density: Callable
    breakpoints: tuple = field(default=())

    def pdf(self, x):
        lo, hi = self.support
        if not lo < x < hi:
            return 0.0
        return self.density(x)

    def atom_total(self):
        return math.fsum(m for _, m in self.atoms)

    def interval_mass(self, a, b, epsabs=1e-11):
        """Mass of the absolutely continuous part on ``[a, b]`` (atoms excluded)."""
        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        return integrate_1d(self.pdf, a, b, points=self.breakpoints, epsabs=epsabs,
                            epsrel=1e-11)

    def continuous_mass(self):
        return self.interval_mass(*self.support)

    def total_mass(self):
        return self.atom_total() + self.continuous_mass()

    def cdf(self, x):
        """``P{X <= x}`` with atoms counted right-continuously."""
        atoms = math.fsum(m for loc, m in self.atoms if loc <= x)
        return atoms + self.interval_mass(self.support[0], x)


def _check(params, t):
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")


def simulate_path(params, v0, t, stream):
    """Simulate one trajectory started at velocity ``v0``."""
    v0 = params.velocity(v0)
    record = simulate_switches(params.rates_from(v0), t, stream)
    return PathSample(params, v0, record)


def atom_mass(params, v0, t, conditional=False):
    """Mass of the atom at ``v0 * t`` (no switch up to ``t``).

    Unconditionally the start is uniform on the two velocities, giving
    ``e^{-lambda_i t}/2``; with ``conditional=True`` the law is the one
    given ``V(0) = v0`` and the mass is ``e^{-lambda_i t}``.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    mass = math.exp(-params.rate(v0) * t)
    return mass if conditional else mass / 2.0


def density_given_n_v(params, t, n, v0, x):
    """Density of the position at ``t`` given ``N(t) = n >= 1`` and ``V(0) = v0``."""
    _check(params, t)
    if n < 1:
        raise ValidationError("conditional density needs n >= 1")
    a1, a2 = params.a1, params.a2
    if not a2 * t < x < a1 * t:
        return 0.0
    d = params.rates.diff
    z = t * d
    up = a1 * t - x
    down = x - a2 * t
    log_w = math.log(params.width * t)
    k, odd = divmod(n, 2)
    expo = d * up / params.width
    if odd:
        val = (expo - log_ml(k + 1, 2 * k + 2, z) + k * (math.log(up) + math.log(down))
               - 2 * math.lgamma(k + 1) - (2 * k + 1) * log_w)
    elif params.index(v0) == 1:
        val = (expo - log_ml(k, 2 * k + 1, z) + (k - 1) * math.log(up) + k * math.log(down)
               - math.lgamma(k + 1) - math.lgamma(k) - 2 * k * log_w)
    else:
        val = (expo - log_ml(k + 1, 2 * k + 1, z) + k * math.log(up) + (k - 1) * math.log(down)
               - math.lgamma(k + 1) - math.lgamma(k) - 2 * k * log_w)
    return math.exp(val)


def density_given_v(params, t, v0, x):
    """Absolutely continuous part of the law of the position given ``V(0) = v0``.

    Returns ``inf`` exactly at ``x = v0 t``, where the ``I_1`` term has an
    integrable singularity, and 0 outside the open interval.
    """
    _check(params, t)
    a1, a2 = params.a1, params.a2
    if not a2 * t < x < a1 * t:
        return 0.0
    v0 = params.velocity(v0)
    v1 = params.other(v0)
    if x == v0 * t:
        return math.inf
    l1, l2 = params.rates.lambda1, params.rates.lambda2
    w = params.width
    g = math.sqrt(l1 * l2)
    z = 2.0 * g / w * math.sqrt((a1 * t - x) * (x - a2 * t))
    expo = -(l1 * (x - a2 * t) + l2 * (a1 * t - x)) / w + z
    bracket = (params.rate(v0) * bessel_ie(0, z)
               + g * math.sqrt(abs(v1 * t - x) / abs(v0 * t - x)) * bessel_ie(1, z))
    return math.exp(expo) / w * bracket


def density(params, t, x):
    """Absolutely continuous part of the law of the position (uniform start)."""
    return 0.5 * (density_given_v(params, t, params.a1, x)
                  + density_given_v(params, t, params.a2, x))


def law_given_v(params, t, v0):
    """Mixed law of the position at ``t`` given ``V(0) = v0``."""
    v0 = params.velocity(v0)
    return MixedLaw(
        atoms=((v0 * t, atom_mass(params, v0, t, conditional=True)),),
        support=(params.a2 * t, params.a1 * t),
        density=lambda x: density_given_v(params, t, v0, x),
    )


def law(params, t):
    """Mixed law of the position at ``t`` with ``V(0)`` uniform on ``{a1, a2}``."""
    return MixedLaw(
        atoms=((params.a1 * t, atom_mass(params, params.a1, t)),
               (params.a2 * t, atom_mass(params, params.a2, t))),
        support=(params.a2 * t, params.a1 * t),
        density=lambda x: density(params, t, x),
    )


def law_given_n_v(params, t, n, v0):
    return MixedLaw(
        atoms=(),
        support=(params.a2 * t, params.a1 * t),
        density=lambda x: density_given_n_v(params, t, n, v0, x),
    )


def velocity_posterior(params, t, n, x, v0):
    """``P{V(0) = v0 | position(t) = x, N(t) = n}``.

    Odd ``n`` gives ``lambda(v0) / (lambda1 + lambda2)``, which is 1/2 for
    equal rates; even ``n`` needs ``lambda1 == lambda2`` and gives
    ``|v1 t - x| / ((a1 - a2) t)``.
    """
    _check(params, t)
    if not params.a2 * t < x < params.a1 * t:
        raise ValidationError("x must lie strictly between a2*t and a1*t")
    if n < 1:
        raise ValidationError("posterior needs n >= 1")
    if n % 2:
        # every odd-n path from v0 carries one extra factor lambda(v0)
        return params.rate(params.velocity(v0)) / (params.rates.lambda1 + params.rates.lambda2)
    if not params.equal_rates():
        raise ScopeError("even-n velocity posterior is derived for lambda1 == lambda2 only")
    return abs(params.other(v0) * t - x) / (params.width * t)
