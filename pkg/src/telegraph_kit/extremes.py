"""
Joint law of the final position, the running minimum and the running
maximum of the symmetric telegraph process (velocities ``+c`` and ``-c``)
started upwards, given ``N(t) = n``.

Densities are in ``x`` for the event ``{T(t) in dx, m(t) < -alpha,
M(t) > beta}``, split by which level is reached first:

* ``max_first``: ``beta`` is crossed before ``-alpha``;
* ``min_first``: ``-alpha`` is crossed before ``beta``.

The max-first density is evaluated by conditioning on the first one or two
switch times; each step removes two switches, so the recursion stops at
``n - 2 < 2`` where the event is empty. The min-first density reduces to a
max-first density of the motion reflected at its first switch.

Given ``N(t) = n`` with homogeneous switching the arrival times are uniform
order statistics, so these laws do not depend on the rate. Passing a
``RatePair`` with distinct rates evaluates the same recursions under the
alternating-rate counter (first term by quadrature, ``n <= 3``).
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

import numpy as np

from .counting import RatePair, arrival_pair_density, first_arrival_density
from .errors import CapabilityError, ValidationError
from .quadrature import integrate_1d

__all__ = [
    "N_MAX",
    "ExtremesQuery",
    "SupportClass",
    "classify_support",
    "clear_cache",
    "density",
    "first_term_density",
    "in_reflection_regime",
    "joint_both_levels_density",
    "max_then_min_density",
    "max_then_min_density_from_below",
    "min_first_upper_limit",
    "min_then_max_density",
    "reflection_closed_form",
]

N_MAX = 10
OUTER_EPSABS = 1e-7
INNER_EPSABS = 1e-8
EPSREL = 1e-9
MEMO_DIGITS = 12
MEMO_SIZE = 200_000
TIGHT = 1e-12
# exact tensor rule for the last two recursion levels (homogeneous switching)
TENSOR_LAST_LEVELS = True
ORDERS = ("max_first", "min_first", "either")


@dataclass(frozen=True)
class ExtremesQuery:
    """Levels ``-alpha <= 0 <= beta``, end point ``x`` and ``n`` switches on ``[0, t]``.

    ``rates=None`` means homogeneous switching, under which the conditional
    law given ``N(t) = n`` is free of the rate.
    """

    c: float
    t: float
    n: int
    alpha: float
    beta: float
    x: float
    order: str = "either"
    rates: Optional[RatePair] = None

    def __post_init__(self):
        if not (self.c > 0 and self.t > 0):
            raise ValidationError("c and t must be positive")
        if int(self.n) != self.n or self.n < 0:
            raise ValidationError(f"n must be a nonnegative integer, got {self.n}")
        ct = self.c * self.t
        if not (0 <= self.alpha < ct and 0 <= self.beta < ct):
            raise ValidationError(f"levels must satisfy 0 <= alpha, beta < ct = {ct}")
        if self.order not in ORDERS:
            raise ValidationError(f"order must be one of {ORDERS}, got {self.order!r}")

    @property
    def ct(self):
        return self.c * self.t

    @property
    def homogeneous(self):
        return self.rates is None or self.rates.lambda1 == self.rates.lambda2

    def nontrivial(self):
        return -self.alpha <= self.x <= self.beta


@dataclass(frozen=True)
class SupportClass:
    """Support membership of a query.

    ``branch_M``/``branch_m`` give the matching branch (1, 2, 3) of the
    three-branch unions, 0 when outside. ``tight`` lists the inequalities
    met with equality (within ``1e-12 * ct``) in the matching branches.
    """

    in_SM: bool
    in_Sm: bool
    branch_M: int
    branch_m: int
    tight: tuple = ()

    @property
    def branch(self):
        return {"max_first": self.branch_M, "min_first": self.branch_m}


def _sm_conditions(ct, a, b, x):
    """Branches of the max-first support as (value, lo, hi, lo_closed, hi_closed, name)."""
    return (
        (("beta", b, 0.0, ct / 3, True, False),
         ("-alpha", -a, (3 * b - ct) / 2, 0.0, False, True),
         ("x", x, -a, b, True, True)),
        (("beta", b, 0.0, ct / 3, True, False),
         ("-alpha", -a, 2 * b - ct, (3 * b - ct) / 2, False, True),
         ("x", x, -a, ct - 2 * a - 2 * b, True, True)),
        (("beta", b, ct / 3, ct / 2, True, False),
         ("-alpha", -a, 2 * b - ct, 0.0, False, True),
         ("x", x, -a, ct - 2 * a - 2 * b, True, True)),
    )


def _sm_conditions_min(ct, a, b, x):
    """Branches of the min-first support."""
    return (
        (("beta", b, 0.0, ct / 2, True, False),
         ("-alpha", -a, (2 * b - ct) / 3, 0.0, False, True),
         ("x", x, -a, b, True, True)),
        (("beta", b, 0.0, ct / 2, True, False),
         ("-alpha", -a, (b - ct) / 2, (2 * b - ct) / 3, False, True),
         ("x", x, 2 * a + 2 * b - ct, b, True, True)),
        (("beta", b, ct / 2, ct, True, False),
         ("-alpha", -a, (b - ct) / 2, 0.0, False, True),
         ("x", x, 2 * a + 2 * b - ct, b, True, True)),
    )


def _holds(value, lo, hi, lo_closed, hi_closed):
    above = value >= lo if lo_closed else value > lo
    below = value <= hi if hi_closed else value < hi
    return above and below


def _match(branches):
    for i, conds in enumerate(branches, start=1):
        if all(_holds(*c[1:]) for c in conds):
            return i, conds
    return 0, ()


def _tight(conds, ct, label):
    tol = TIGHT * max(ct, 1.0)
    out = []
    for name, value, lo, hi, _, _ in conds:
        if abs(value - lo) <= tol:
            out.append(f"{label}: {name} at lower end {lo!r}")
        if abs(value - hi) <= tol:
            out.append(f"{label}: {name} at upper end {hi!r}")
    return out


def _in_SM(ct, a, b, x):
    """Fast membership test, same inequalities as ``_sm_conditions``."""
    if not (0.0 <= b < ct / 2 and -a <= 0.0 and x >= -a):
        return False
    if b < ct / 3:
        if -a > (3 * b - ct) / 2:
            return x <= b
        return -a > 2 * b - ct and x <= ct - 2 * a - 2 * b
    return -a > 2 * b - ct and x <= ct - 2 * a - 2 * b


def classify_support(q):
    """Where the max-first and min-first densities are non-trivial and positive.

    Membership is decided by the inequality systems exactly as stated, with
    ``n >= 2`` required for max-first and ``n >= 3`` for min-first.

    Examples
    --------
    >>> classify_support(ExtremesQuery(1, 1, 2, 0.5, 0.1, -0.3)).branch_M
    2
    """
    ct, a, b, x = q.ct, q.alpha, q.beta, q.x
    bm, conds_m = _match(_sm_conditions(ct, a, b, x))
    bn, conds_n = _match(_sm_conditions_min(ct, a, b, x))
    if q.n < 2:
        bm = 0
    if q.n < 3:
        bn = 0
    tight = []
    if bm:
        tight += _tight(conds_m, ct, f"S_M branch {bm}")
    if bn:
        tight += _tight(conds_n, ct, f"S_m branch {bn}")
    return SupportClass(bool(bm), bool(bn), bm, bn, tuple(tight))


def in_reflection_regime(q):
    """``(ct - 4 alpha - 2 beta - x)/(2c) <= 0 <= beta/c``."""
    return (q.ct - 4 * q.alpha - 2 * q.beta - q.x) / (2 * q.c) <= 0 <= q.beta / q.c


def min_first_upper_limit(q):
    """Upper limit of the first-switch integral in the min-first reduction.

    Returns ``(limit, in_R)``: ``beta/c`` on the region where the motion can
    still reach ``beta`` after turning, else ``(ct - 2 alpha - 2 beta + x)/(2c)``.
    """
    ct, a, b, x = q.ct, q.alpha, q.beta, q.x
    in_r = (0 <= b <= ct / 3 and (3 * b - ct) / 2 <= -a <= 0
            and max(-a, 2 * a + 4 * b - ct) <= x <= b)
    if in_r:
        return b / q.c, True
    return (ct - 2 * a - 2 * b + x) / (2 * q.c), False


# ---------------------------------------------------------------------------
# memo cache


_cache = {}


def clear_cache():
    _cache.clear()


def _key(tag, n, rates, *vals):
    r = None if rates is None else (rates.lambda1, rates.lambda2)
    return (tag, n, r) + tuple(round(v, MEMO_DIGITS) for v in vals)


def _remember(key, value):
    if len(_cache) >= MEMO_SIZE:
        _cache.clear()
    _cache[key] = value
    return value


# ---------------------------------------------------------------------------
# switch-time densities given N(t) = n


def _homog(rates):
    return rates is None or rates.lambda1 == rates.lambda2


def _first_density(rates, t, n, t1):
    if _homog(rates):
        if not 0.0 < t1 < t:
            return 0.0
        return n * (t - t1) ** (n - 1) / t ** n
    return first_arrival_density(rates, t, n, t1)


def _pair_density(rates, t, n, t1, t2):
    if _homog(rates):
        if not 0.0 < t1 < t2 < t:
            return 0.0
        return n * (n - 1) * (t - t2) ** (n - 2) / t ** n
    return arrival_pair_density(rates, t, n, 1, 2, t1, t2)


def _swap(rates):
    return None if rates is None else rates.swapped()


# ---------------------------------------------------------------------------
# first term: beta crossed during the first displacement


def _first_term_explicit(c, t, n, a, b, x):
    ct = c * t
    k, odd = divmod(n, 2)
    if k < 1:
        return 0.0
    left = ct + 2 * a + x
    right = max(ct - 2 * a - 2 * b - x, 0.0)
    if odd:
        coef = math.exp(math.lgamma(2 * k + 2) - math.lgamma(k) - math.lgamma(k + 2))
        return coef * left ** (k - 1) * right ** (k + 1) / (2 * ct) ** (2 * k + 1)
    coef = math.exp(math.lgamma(2 * k + 1) - math.lgamma(k) - math.lgamma(k + 1))
    return coef * left ** (k - 1) * right ** k / (2 * ct) ** (2 * k)


def _below_level_from_below(c, tau, j, z, gamma, rates):
    """Density in ``z`` of ``{T(tau) in dz, m(tau) < -gamma}`` started at ``-c`` with ``j`` switches.

    ``rates`` are in the order experienced by this downward-started motion.
    """
    if j == 1:
        u = (c * tau - z) / (2 * c)
        if not (gamma / c < u < tau):
            return 0.0
        return _first_density(rates, tau, 1, u) / (2 * c)
    if j == 2:
        gap = (z + c * tau) / (2 * c)
        hi = tau - gap
        if not (gap > 0 and hi > 0):
            return 0.0

        def f(u1):
            return _pair_density(rates, tau, 2, u1, u1 + gap)

        # min is min(-c u1, z): whole range counts if z < -gamma
        lo = 0.0 if z < -gamma else min(gamma / c, hi)
        return integrate_1d(f, lo, hi, epsabs=INNER_EPSABS, epsrel=EPSREL) / (2 * c)
    raise CapabilityError(
        "with distinct rates the first-displacement term is implemented for n <= 3; "
        "use Monte Carlo (montecarlo.run_batch) for larger n")


def _first_term_quadrature(c, t, n, a, b, x, rates):
    lo = b / c
    hi = (c * t - 2 * a - x) / (2 * c)
    after = _swap(rates)

    def f(t1):
        w = _first_density(rates, t, n, t1)
        if w == 0.0:
            return 0.0
        return w * _below_level_from_below(c, t - t1, n - 1, x - c * t1, a + c * t1, after)

    return integrate_1d(f, lo, hi, epsabs=OUTER_EPSABS, epsrel=EPSREL)


def _first_term(c, t, n, a, b, x, rates, route="auto"):
    if route == "explicit" or (route == "auto" and _homog(rates)):
        if not _homog(rates):
            raise ValidationError("the explicit first term holds for homogeneous switching only")
        return _first_term_explicit(c, t, n, a, b, x)
    if n > 3:
        raise CapabilityError(
            "with distinct rates the first-displacement term is implemented for n <= 3; "
            "use Monte Carlo (montecarlo.run_batch) for larger n")
    return _first_term_quadrature(c, t, n, a, b, x, rates)


# ---------------------------------------------------------------------------
# breakpoints: every support and case boundary is linear in the switch times


def _boundary_exprs(ct, a, b, x):
    return (
        b, ct / 3 - b, ct / 2 - b, a,
        -a - (3 * b - ct) / 2, -a - (2 * b - ct),
        x + a, b - x, ct - 2 * a - 2 * b - x, ct + 2 * a + x,
        (ct - 4 * a - 2 * b - x) / 2, (ct - 4 * a - 2 * b - x) / 2 - b,
    )


def _root_lines(sub):
    """Lines ``t2 = p + q t1`` on which a boundary expression of ``sub(t1, t2)`` vanishes."""
    e00 = _boundary_exprs(*sub(0.0, 0.0))
    e10 = _boundary_exprs(*sub(1.0, 0.0))
    e01 = _boundary_exprs(*sub(0.0, 1.0))
    lines = []
    for v00, v10, v01 in zip(e00, e10, e01):
        slope2 = v01 - v00
        if abs(slope2) > 1e-14:
            lines.append((-v00 / slope2, -(v10 - v00) / slope2))
    return lines


def _max_sub(c, t, a, b, x, t1, t2):
    """Query left after switches at ``t1 < beta/c`` and ``t2``: (c tau, alpha', beta', x')."""
    return (c * (t - t2), a + 2 * c * t1 - c * t2, b - 2 * c * t1 + c * t2,
            x - 2 * c * t1 + c * t2)


def _crossings(lines, lo, hi):
    out = set()
    for (p1, q1), (p2, q2) in combinations(lines, 2):
        if abs(q1 - q2) > 1e-14:
            s = (p2 - p1) / (q1 - q2)
            if lo < s < hi:
                out.add(s)
    return sorted(out)


# ---------------------------------------------------------------------------
# max first


def _check_depth(n):
    if n > N_MAX:
        raise CapabilityError(
            f"recursion depth n={n} exceeds N_MAX={N_MAX}; use Monte Carlo "
            "(montecarlo.run_batch) for this query")


def _max_first(c, t, n, a, b, x, rates):
    if n < 2 or t <= 0:
        return 0.0
    if not _in_SM(c * t, a, b, x):
        return 0.0
    if n <= 3:
        return _first_term(c, t, n, a, b, x, rates)
    key = _key("M", n, rates, c, t, a, b, x)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    value = _first_term(c, t, n, a, b, x, rates) + _second_term(c, t, n, a, b, x, rates)
    return _remember(key, value)


def _second_term(c, t, n, a, b, x, rates):
    """Paths turning below ``beta``: integrate over the first two switch times."""
    if TENSOR_LAST_LEVELS and n <= 5 and _homog(rates):
        return _two_level_homogeneous(c, t, n, a, b, x)
    ct = c * t
    r = (ct - 4 * a - 2 * b - x) / (2 * c)
    top = b / c
    late = (ct - 2 * a - 2 * b - x) / (2 * c)
    def sub(u1, u2):
        return _max_sub(c, t, a, b, x, u1, u2)

    lines = _root_lines(sub)

    def hi_of(t1):
        # before r the motion must stay above -alpha at the second switch
        h = min(2 * t1 + a / c, t1 + late) if 0 < r else t1 + late
        return min(h, t)

    def inner(t1):
        lo, hi = t1, hi_of(t1)
        if not hi > lo:
            return 0.0
        pts = [p + q * t1 for p, q in lines]

        def g(t2):
            w = _pair_density(rates, t, n, t1, t2)
            if w == 0.0:
                return 0.0
            # two switches later the motion again waits at rate lambda1
            return w * _max_first(c, t - t2, n - 2, *sub(t1, t2)[1:], rates)

        return integrate_1d(g, lo, hi, points=pts, epsabs=INNER_EPSABS, epsrel=EPSREL)

    limit_lines = lines + [(0.0, 1.0), (a / c, 2.0), (late, 1.0), (t, 0.0)]
    pts = _crossings(limit_lines, 0.0, top)
    if 0 < r < top:
        pts.append(r)
    return integrate_1d(inner, 0.0, top, points=pts, epsabs=OUTER_EPSABS, epsrel=EPSREL)


@lru_cache(maxsize=None)
def _legendre(m):
    return np.polynomial.legendre.leggauss(m)


def _first_term_explicit_vec(ct, n, a, b, x):
    k, odd = divmod(n, 2)
    left = ct + 2 * a + x
    right = np.maximum(ct - 2 * a - 2 * b - x, 0.0)
    if odd:
        coef = math.exp(math.lgamma(2 * k + 2) - math.lgamma(k) - math.lgamma(k + 2))
        return coef * left ** (k - 1) * right ** (k + 1) / (2 * ct) ** (2 * k + 1)
    coef = math.exp(math.lgamma(2 * k + 1) - math.lgamma(k) - math.lgamma(k + 1))
    return coef * left ** (k - 1) * right ** k / (2 * ct) ** (2 * k)


def _in_SM_vec(ct, a, b, x):
    low = -a > (3 * b - ct) / 2
    first = low & (x <= b)
    rest = ~low & (-a > 2 * b - ct) & (x <= ct - 2 * a - 2 * b)
    third = (b >= ct / 3) & (-a > 2 * b - ct) & (x <= ct - 2 * a - 2 * b)
    ok = (b >= 0) & (b < ct / 2) & (-a <= 0) & (x >= -a)
    return ok & np.where(b < ct / 3, first | rest, third)


def _two_level_homogeneous(c, t, n, a, b, x):
    """Second term for ``n in {4, 5}`` under homogeneous switching, exactly.

    The integrand is polynomial in ``(t1, t2)`` on cells cut by the support
    roots, and the inner integral is polynomial in ``t1`` between crossings
    of those root lines, so tensor Gauss-Legendre with ``n + 1`` nodes per
    cell is exact up to rounding.
    """
    ct = c * t
    r = (ct - 4 * a - 2 * b - x) / (2 * c)
    top = b / c
    late = (ct - 2 * a - 2 * b - x) / (2 * c)

    def sub(u1, u2):
        return _max_sub(c, t, a, b, x, u1, u2)

    lines = _root_lines(sub)
    limit_lines = lines + [(0.0, 1.0), (a / c, 2.0), (late, 1.0), (t, 0.0)]
    cuts = _crossings(limit_lines, 0.0, top)
    if 0 < r < top:
        cuts.append(r)
    nodes, weights = _legendre(n + 1)
    outer = np.array(sorted({0.0, top, *cuts}))
    o_half = np.diff(outer)[:, None] / 2
    t1 = ((outer[:-1, None] + outer[1:, None]) / 2 + o_half * nodes).ravel()
    w1 = (o_half * weights).ravel()
    lo = t1
    hi = np.minimum(np.where(r > 0, np.minimum(2 * t1 + a / c, t1 + late), t1 + late), t)
    hi = np.maximum(hi, lo)
    p = np.array([pq[0] for pq in lines])
    q = np.array([pq[1] for pq in lines])
    inner = np.clip(p[None, :] + q[None, :] * t1[:, None], lo[:, None], hi[:, None])
    edges = np.sort(np.concatenate([lo[:, None], inner, hi[:, None]], axis=1), axis=1)
    i_half = np.diff(edges, axis=1)[..., None] / 2
    t2 = (edges[:, :-1, None] + edges[:, 1:, None]) / 2 + i_half * nodes
    w2 = i_half * weights
    tt1 = t1[:, None, None]
    ct2, a2, b2, x2 = sub(tt1, t2)
    pair = n * (n - 1) * (t - t2) ** (n - 2) / t ** n
    vals = np.where(_in_SM_vec(ct2, a2, b2, x2),
                    _first_term_explicit_vec(ct2, n - 2, a2, b2, x2), 0.0)
    inner_int = np.sum(w2 * pair * vals, axis=(1, 2))
    return float(np.dot(w1, inner_int))


def first_term_density(q, route="auto"):
    """Density of the max-first event restricted to crossing ``beta`` before the first switch.

    Homogeneous switching uses the explicit binomial expression; distinct
    rates (or ``route="quadrature"``) integrate the single-barrier law of
    the remaining motion over the first switch time.
    """
    if not classify_support(q).in_SM:
        return 0.0
    return _first_term(q.c, q.t, q.n, q.alpha, q.beta, q.x, q.rates, route=route)


def max_then_min_density(q):
    """Density of ``{T(t) in dx, m < -alpha, M > beta, beta reached first}`` given ``N(t) = n``.

    Raises
    ------
    CapabilityError
        If ``n > N_MAX``, or ``n > 3`` with distinct rates.
    """
    _check_depth(q.n)
    if not classify_support(q).in_SM:
        return 0.0
    return _max_first(q.c, q.t, q.n, q.alpha, q.beta, q.x, q.rates)


def max_then_min_density_from_below(q):
    """Max-first density for the motion started downwards.

    Conditions on the first switch ``t1 < alpha/c`` and restarts upwards
    from ``-c t1`` with levels shifted by ``c t1``.
    """
    _check_depth(q.n)
    c, t, n, a, b, x = q.c, q.t, q.n, q.alpha, q.beta, q.x
    if n < 1 or not q.nontrivial():
        return 0.0
    after = _swap(q.rates)
    sub = lambda u: (c * (t - u), a - c * u, b + c * u, x + c * u)  # noqa: E731
    top = min(a / c, t)

    def f(t1):
        w = _first_density(q.rates, t, n, t1)
        if w == 0.0:
            return 0.0
        return w * _max_first(c, t - t1, n - 1, *sub(t1)[1:], after)

    return integrate_1d(f, 0.0, top, points=_roots_1d(sub, 0.0, top), epsabs=OUTER_EPSABS,
                        epsrel=EPSREL)


def _roots_1d(sub, lo, hi):
    e0 = _boundary_exprs(*sub(lo))
    e1 = _boundary_exprs(*sub(hi))
    out = []
    for v0, v1 in zip(e0, e1):
        if (v0 < 0) != (v1 < 0) and v0 != v1:
            out.append(lo + (hi - lo) * v0 / (v0 - v1))
    return out


def reflection_closed_form(q):
    """Closed form of the max-first density in the reflection regime.

    Requires ``(ct - 4 alpha - 2 beta - x)/(2c) <= 0 <= beta/c``, where
    ``-alpha`` cannot be reached before ``beta``.
    """
    if not in_reflection_regime(q):
        raise ValidationError("query is outside the reflection regime")
    if not classify_support(q).in_SM:
        return 0.0
    ct, a, b, x = q.ct, q.alpha, q.beta, q.x
    k, odd = divmod(q.n, 2)
    left = ct + 2 * a + 2 * b + x
    right = max(ct - 2 * a - 2 * b - x, 0.0)
    if odd:
        coef = math.exp(math.lgamma(2 * k + 2) - math.lgamma(k) - math.lgamma(k + 2))
        return coef * left ** (k - 1) * right ** (k + 1) / (2 * ct) ** (2 * k + 1)
    coef = math.exp(math.lgamma(2 * k + 1) - math.lgamma(k) - math.lgamma(k + 1))
    return coef * left ** (k - 1) * right ** k / (2 * ct) ** (2 * k)


# ---------------------------------------------------------------------------
# min first


def min_then_max_density(q):
    """Density of ``{T(t) in dx, m < -alpha, M > beta, -alpha reached first}`` given ``N(t) = n``.

    After the first switch at ``t1`` the motion, reflected about ``c t1``,
    is a max-first problem with upper level ``alpha + c t1``, lower level
    ``c t1 - beta`` and end point ``c t1 - x``.
    """
    _check_depth(q.n)
    if not classify_support(q).in_Sm:
        return 0.0
    c, t, n, a, b, x = q.c, q.t, q.n, q.alpha, q.beta, q.x
    top, _ = min_first_upper_limit(q)
    after = _swap(q.rates)
    sub = lambda u: (c * (t - u), b - c * u, a + c * u, c * u - x)  # noqa: E731

    def f(t1):
        w = _first_density(q.rates, t, n, t1)
        if w == 0.0:
            return 0.0
        return w * _max_first(c, t - t1, n - 1, *sub(t1)[1:], after)

    return integrate_1d(f, 0.0, top, points=_roots_1d(sub, 0.0, top), epsabs=OUTER_EPSABS,
                        epsrel=EPSREL)


def joint_both_levels_density(q):
    """Density of ``{T(t) in dx, m < -alpha, M > beta}`` given ``N(t) = n``, either order."""
    return max_then_min_density(q) + min_then_max_density(q)


def density(q):
    """Dispatch on ``q.order``."""
    if q.order == "max_first":
        return max_then_min_density(q)
    if q.order == "min_first":
        return min_then_max_density(q)
    return joint_both_levels_density(q)
