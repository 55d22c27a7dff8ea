"""
Laws of the position at time ``t`` given the position ``x`` at an earlier
time ``s``, optionally also given the parity of ``N(s)`` or the pair
``(N(s), V(0))``.

Given ``N(s) = k`` and ``V(0) = v0`` the current velocity is known and the
motion simply restarts from ``x``. Knowing only the parity (or nothing)
leaves the current velocity random; with homogeneous switching its
posterior is explicit, which yields the Markov term plus a correction
``g`` built from ``I_1``.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ScopeError, ValidationError
from .special_fns import bessel_ie
from .telegraph import MixedLaw, density, density_given_v

__all__ = [
    "ConditioningContext",
    "g_term",
    "g_term_derivative_form",
    "law_given_pos",
    "law_given_pos_count_vel",
    "law_given_pos_parity",
    "parity_posterior",
    "v_after_k",
]


@dataclass(frozen=True)
class ConditioningContext:
    """What is known at the earlier time ``s``.

    Exactly one of: nothing (position only), ``parity`` in ``{"even", "odd"}``,
    or both ``k`` and ``v0``.
    """

    s: float
    t: float
    x: float
    parity: Optional[str] = None
    k: Optional[int] = None
    v0: Optional[object] = None

    def __post_init__(self):
        if not 0 < self.s < self.t:
            raise ValidationError(f"need 0 < s < t, got s={self.s}, t={self.t}")
        if (self.k is None) != (self.v0 is None):
            raise ValidationError("k and v0 must be given together")
        if self.parity is not None and self.k is not None:
            raise ValidationError("give either a parity or (k, v0), not both")
        if self.parity not in (None, "even", "odd"):
            raise ValidationError(f"parity must be 'even' or 'odd', got {self.parity!r}")

    @property
    def known(self):
        if self.k is not None:
            return "pos+count+v0"
        if self.parity is not None:
            return "pos+parity"
        return "pos_only"

    def law(self, params):
        if self.k is not None:
            return law_given_pos_count_vel(params, self.s, self.t, self.x, self.k, self.v0)
        if self.parity is not None:
            return law_given_pos_parity(params, self.s, self.t, self.x, self.parity)
        return law_given_pos(params, self.s, self.t, self.x)


def v_after_k(params, v0, k):
    """Velocity after the ``k``-th switch of a motion started at ``v0``."""
    if k < 0:
        raise ValidationError("k must be nonnegative")
    v0 = params.velocity(v0)
    return v0 if k % 2 == 0 else params.other(v0)


def _check_times(params, s, t, x, closed=False):
    if not 0 < s < t:
        raise ValidationError(f"need 0 < s < t, got s={s}, t={t}")
    lo, hi = params.a2 * s, params.a1 * s
    inside = lo <= x <= hi if closed else lo < x < hi
    if not inside:
        raise ValidationError(f"x={x} outside the reachable set at time s={s}")


def _equal_rates(params, what):
    if not params.equal_rates():
        raise ScopeError(f"{what} is derived for lambda1 == lambda2 only")
    return params.rates.lambda1


def law_given_pos_count_vel(params, s, t, x, k, v0):
    """Law of ``position(t)`` given ``position(s) = x``, ``N(s) = k``, ``V(0) = v0``.

    Valid for two distinct rates: the motion restarts at ``x`` with velocity
    ``v_k``.
    """
    _check_times(params, s, t, x, closed=True)
    vk = v_after_k(params, v0, k)
    dt = t - s
    return MixedLaw(
        atoms=((x + vk * dt, math.exp(-params.rate(vk) * dt)),),
        support=(x + params.a2 * dt, x + params.a1 * dt),
        density=lambda y: density_given_v(params, dt, vk, y - x),
    )


def g_term(lam, a1, a2, s, dt, x, u):
    """Correction to the Markov density when ``N(s)`` is known to be even.

    ``u = y - x`` is the displacement over ``dt = t - s``. Zero outside
    ``(a2 dt, a1 dt)``; may be negative inside.
    """
    if not a2 * dt < u < a1 * dt:
        return 0.0
    w = a1 - a2
    q = (a1 * dt - u) * (u - a2 * dt)
    root = math.sqrt(q)
    arg = 2.0 * lam / w * root
    # 4xu + (a1+a2)[(a1+a2)s dt - 2su - 2x dt], factored so the midpoint gives exact zero
    m = a1 + a2
    bracket = (2.0 * x - m * s) * (2.0 * u - m * dt)
    # I_1(arg)/root, scaled; at small arg use I_1(z)/z -> 1/2
    if arg < 1e-8:
        i1_over_root = lam / w
    else:
        i1_over_root = bessel_ie(1, arg) * math.exp(arg) / root
    return i1_over_root * lam * math.exp(-lam * dt) / (2.0 * w * w * s) * bracket


def g_term_derivative_form(lam, a1, a2, s, dt, x, u):
    """Same quantity written as a multiple of ``d/du I_0(...)``."""
    if not a2 * dt < u < a1 * dt:
        return 0.0
    w = a1 - a2
    q = (a1 * dt - u) * (u - a2 * dt)
    root = math.sqrt(q)
    kappa = 2.0 * lam / w
    arg = kappa * root
    i1 = bessel_ie(1, arg) * math.exp(arg)
    d_arg = kappa * ((a1 + a2) * dt - 2.0 * u) / (2.0 * root)
    return math.exp(-lam * dt) * ((a1 + a2) * s - 2.0 * x) / (2.0 * w * s) * i1 * d_arg


def parity_posterior(lam, a1, a2, s, x):
    """``P{N(s) even | position(s) = x}`` for homogeneous switching at rate ``lam``."""
    if not a2 * s < x < a1 * s:
        raise ValidationError("x must lie strictly inside (a2 s, a1 s)")
    w = a1 - a2
    area = math.sqrt((a1 * s - x) * (x - a2 * s))
    arg = 2.0 * lam / w * area
    i0 = bessel_ie(0, arg)
    i1 = bessel_ie(1, arg)
    return w * s * i1 / (2.0 * area * i0 + w * s * i1)


def law_given_pos_parity(params, s, t, x, parity):
    """Law of ``position(t)`` given ``position(s) = x`` and the parity of ``N(s)``.

    Odd parity holds for two rates: the current velocity is ``v`` with
    probability ``lambda(other v) / (lambda1 + lambda2)`` (1/2 for equal
    rates) and the motion restarts from ``x``. Even parity needs
    ``lambda1 == lambda2``; its atoms carry the velocity posterior
    ``|v1 s - x| / ((a1 - a2) s)``.
    """
    _check_times(params, s, t, x)
    dt = t - s
    support = (x + params.a2 * dt, x + params.a1 * dt)
    if parity == "odd":
        if params.equal_rates():
            atoms = tuple(
                (x + v * dt, math.exp(-params.rate(v) * dt) / 2.0) for v in (params.a1, params.a2)
            )
            return MixedLaw(atoms, support, lambda y: density(params, dt, y - x))
        total = params.rates.lambda1 + params.rates.lambda2
        weights = {v: params.rate(params.other(v)) / total for v in (params.a1, params.a2)}
        atoms = tuple((x + v * dt, weights[v] * math.exp(-params.rate(v) * dt))
                      for v in (params.a1, params.a2))
        return MixedLaw(atoms, support, lambda y: math.fsum(
            wv * density_given_v(params, dt, v, y - x) for v, wv in weights.items()))
    if parity != "even":
        raise ValidationError(f"parity must be 'even' or 'odd', got {parity!r}")
    lam = _equal_rates(params, "the even-parity conditional law")
    a1, a2, w = params.a1, params.a2, params.width
    atoms = tuple(
        (x + v * dt, abs(params.other(v) * s - x) / (w * s) * math.exp(-lam * dt))
        for v in (a1, a2)
    )

    def pdf(y):
        u = y - x
        return density(params, dt, u) + g_term(lam, a1, a2, s, dt, x, u)

    return MixedLaw(atoms, support, pdf)


def law_given_pos(params, s, t, x):
    """Law of ``position(t)`` given only ``position(s) = x`` (``lambda1 == lambda2``)."""
    _check_times(params, s, t, x)
    lam = _equal_rates(params, "the position-only conditional law")
    a1, a2, w = params.a1, params.a2, params.width
    dt = t - s
    p_even = parity_posterior(lam, a1, a2, s, x)
    decay = math.exp(-lam * dt)
    atoms = tuple(
        (x + v * dt,
         decay * (p_even * abs(params.other(v) * s - x) / (w * s) + (1.0 - p_even) / 2.0))
        for v in (a1, a2)
    )

    def pdf(y):
        u = y - x
        return density(params, dt, u) + g_term(lam, a1, a2, s, dt, x, u) * p_even

    return MixedLaw(atoms, (x + a2 * dt, x + a1 * dt), pdf)
