import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from telegraph_kit import _backend
from telegraph_kit.counting import (RatePair, SwitchRecord, alt_sum, alt_sum_density,
                                    alt_sum_moment, arrival_pair_density,
                                    first_arrival_density, log_likelihood, mle_rates, pmf,
                                    pmf_table, simulate_switches)
from telegraph_kit.errors import EstimationError, ValidationError
from telegraph_kit.quadrature import integrate_1d
from telegraph_kit.rng import CounterStream

rate_st = st.floats(0.2, 6.0)


def pmf_generator_oracle(rates, t, nmax):
    """P{N(t) = n} from the matrix exponential of the counting chain.

    State j means j switches so far; the holding rate alternates with j.
    Truncated at ``nmax + 40`` states, far beyond the mass that matters.
    """
    size = nmax + 40
    q = np.zeros((size, size))
    for j in range(size - 1):
        r = rates.rate_after(j)
        q[j, j] = -r
        q[j, j + 1] = r
    return linalg.expm(q * t)[0, : nmax + 1]


@pytest.mark.parametrize("n", range(0, 21))
def test_pmf_homogeneous_is_poisson(n):
    lam, t = 1.7, 2.3
    expect = math.exp(-lam * t) * (lam * t) ** n / math.factorial(n)
    assert pmf(RatePair(lam, lam), t, n) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("rates,t", [(RatePair(2.0, 1.0), 1.0), (RatePair(0.5, 4.0), 2.5),
                                     (RatePair(7.0, 0.3), 3.0)])
def test_pmf_against_generator(rates, t):
    ours = np.array([pmf(rates, t, n) for n in range(30)])
    np.testing.assert_allclose(ours, pmf_generator_oracle(rates, t, 29), rtol=1e-9,
                               atol=1e-15)


def test_pmf_normalizes():
    rates = RatePair(2.0, 1.0)
    assert math.fsum(pmf(rates, 1.0, n) for n in range(61)) == pytest.approx(1.0, abs=1e-10)
    table = pmf_table(RatePair(3.0, 0.7), 4.0)
    assert math.fsum(table) == pytest.approx(1.0, abs=1e-10)
    assert table[-5:].max() < 1e-14


def test_pmf_negative_n_and_bad_t():
    assert pmf(RatePair(1, 1), 1.0, -1) == 0.0
    with pytest.raises(ValidationError):
        pmf(RatePair(1, 1), 0.0, 1)
    with pytest.raises(ValidationError):
        RatePair(0.0, 1.0)


def test_pmf_matches_simulation():
    rates = RatePair(2.0, 1.0)
    res = _backend.simulate_chunk(17, 0, 2_000_000, 1.0, -1.0, 2.0, 1.0, 1.0, 0, 0.0,
                                  np.inf, -np.inf, 0)
    counts = np.bincount(res["n"], minlength=8)[:8] / res["n"].size
    for n in range(8):
        p = pmf(rates, 1.0, n)
        assert abs(counts[n] - p) < 4 * math.sqrt(p * (1 - p) / res["n"].size)
    # swapped rates checked independently
    res = _backend.simulate_chunk(18, 0, 2_000_000, 1.0, -1.0, 1.0, 2.0, 1.0, 0, 0.0,
                                  np.inf, -np.inf, 0)
    counts = np.bincount(res["n"], minlength=8)[:8] / res["n"].size
    for n in range(8):
        p = pmf(rates.swapped(), 1.0, n)
        assert abs(counts[n] - p) < 4 * math.sqrt(p * (1 - p) / res["n"].size)


def pair_density_oracle(rates, t, n, l, m, tl, tm):
    """Renewal construction: f_{T_l}(tl) f_{gap}(tm - tl) P{no more than n - m after tm}.

    The density of the l-th arrival is ``rate_after(l - 1) * P{N(u) = l - 1}``.
    """
    f_l = rates.rate_after(l - 1) * pmf(rates, tl, l - 1)
    mid = rates if l % 2 == 0 else rates.swapped()
    f_gap = mid.rate_after(m - l - 1) * pmf(mid, tm - tl, m - l - 1)
    tail_rates = rates if m % 2 == 0 else rates.swapped()
    return f_l * f_gap * pmf(tail_rates, t - tm, n - m) / pmf(rates, t, n)


@pytest.mark.parametrize("n,l,m", [(2, 1, 2), (3, 1, 2), (5, 2, 4), (6, 1, 5), (7, 3, 6),
                                   (4, 3, 4)])
@pytest.mark.parametrize("rates", [RatePair(2.0, 1.0), RatePair(0.4, 3.0)])
def test_pair_density_against_renewal(n, l, m, rates):
    t = 1.5
    for tl, tm in ((0.2, 0.5), (0.7, 1.3), (0.05, 0.1)):
        assert arrival_pair_density(rates, t, n, l, m, tl, tm) == pytest.approx(
            pair_density_oracle(rates, t, n, l, m, tl, tm), rel=1e-11)


def test_pair_density_homogeneous_order_statistics():
    t, n, l, m = 2.0, 6, 2, 5
    tl, tm = 0.4, 1.1
    expect = (tl ** (l - 1) * (tm - tl) ** (m - l - 1) * (t - tm) ** (n - m)
              * math.factorial(n)
              / (math.factorial(l - 1) * math.factorial(m - l - 1) * math.factorial(n - m)
                 * t ** n))
    got = arrival_pair_density(RatePair(1.3, 1.3), t, n, l, m, tl, tm)
    assert got == pytest.approx(expect, rel=1e-12)


def test_pair_density_normalizes_and_vanishes_outside():
    rates = RatePair(2.0, 1.0)
    total = integrate_1d(
        lambda a: integrate_1d(lambda b: arrival_pair_density(rates, 1.0, 2, 1, 2, a, b),
                               a, 1.0, epsabs=1e-12), 0.0, 1.0, epsabs=1e-11)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert arrival_pair_density(rates, 1.0, 3, 1, 2, 0.5, 0.4) == 0.0
    assert arrival_pair_density(rates, 1.0, 3, 1, 2, 0.5, 1.2) == 0.0
    with pytest.raises(ValidationError):
        arrival_pair_density(rates, 1.0, 3, 2, 2, 0.1, 0.2)


def test_pair_density_matches_simulation():
    rates = RatePair(2.0, 1.0)
    res = _backend.simulate_chunk(23, 0, 4_000_000, 1.0, -1.0, 2.0, 1.0, 1.0, 0, 0.0,
                                  np.inf, -np.inf, 2)
    sel = res["n"] == 3
    t1, t2 = res["times"][sel, 0], res["times"][sel, 1]
    h = 0.02
    hit = (np.abs(t1 - 0.2) < h) & (np.abs(t2 - 0.5) < h)
    p_emp = hit.mean()
    p = integrate_1d(lambda a: integrate_1d(
        lambda b: arrival_pair_density(rates, 1.0, 3, 1, 2, a, b), 0.5 - h, 0.5 + h),
        0.2 - h, 0.2 + h)
    assert abs(p_emp - p) < 4 * math.sqrt(p * (1 - p) / sel.sum())


@pytest.mark.parametrize("n", [1, 2, 5])
def test_first_arrival_density_normalizes(n):
    rates = RatePair(2.5, 0.7)
    total = integrate_1d(lambda u: first_arrival_density(rates, 1.3, n, u), 0.0, 1.3)
    assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", range(1, 13))
@pytest.mark.parametrize("rates", [RatePair(1, 1), RatePair(2, 1), RatePair(1, 3)])
def test_alt_sum_density_normalizes(n, rates):
    t = 1.4
    lo, hi = (0.0, t) if n % 2 else (-t, 0.0)
    total = integrate_1d(lambda s: alt_sum_density(rates, t, n, s), lo, hi)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert alt_sum_density(rates, t, n, -lo - hi / 2 if n % 2 else 0.5) == 0.0


def test_alt_sum_uniform_for_single_arrival():
    assert alt_sum_density(RatePair(1.5, 1.5), 2.0, 1, 0.3) == pytest.approx(0.5)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 10])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_alt_sum_moment_against_quadrature(n, m):
    rates, t = RatePair(2.0, 1.0), 1.0
    lo, hi = (0.0, t) if n % 2 else (-t, 0.0)
    quad = integrate_1d(lambda s: s ** m * alt_sum_density(rates, t, n, s), lo, hi,
                        epsabs=1e-13)
    assert alt_sum_moment(rates, t, n, m) == pytest.approx(quad, rel=1e-7, abs=1e-12)


def test_alt_sum_moment_edges():
    rates = RatePair(2.0, 1.0)
    for n in range(1, 8):
        assert alt_sum_moment(rates, 1.0, n, 0) == pytest.approx(1.0, rel=1e-13)
    assert alt_sum_moment(RatePair(1, 1), 3.0, 1, 1) == pytest.approx(1.5)
    with pytest.raises(ValidationError):
        alt_sum_moment(rates, 1.0, 4, -2)
    with pytest.raises(ValidationError):
        alt_sum_moment(rates, 1.0, 3, -2)
    with pytest.raises(ValidationError):
        alt_sum_moment(rates, 1.0, 4, 0.5)
    # fractional orders are fine for odd n
    quad = integrate_1d(lambda s: s ** -0.5 * alt_sum_density(rates, 1.0, 3, s), 0, 1)
    assert alt_sum_moment(rates, 1.0, 3, -0.5) == pytest.approx(quad, rel=1e-8)


def test_alt_sum_density_matches_simulation():
    rates = RatePair(2.0, 1.0)
    res = _backend.simulate_chunk(29, 0, 4_000_000, 1.0, -1.0, 2.0, 1.0, 1.0, 0, 0.0,
                                  np.inf, -np.inf, 0)
    s = res["alt_sum"][res["n"] == 4]
    h = 0.01
    p = integrate_1d(lambda v: alt_sum_density(rates, 1.0, 4, v), -0.3 - h, -0.3 + h)
    emp = np.mean(np.abs(s + 0.3) < h)
    assert abs(emp - p) < 4 * math.sqrt(p * (1 - p) / s.size)


def test_alt_sum_and_record_validation():
    rec = SwitchRecord(1.0, (0.25, 0.75))
    assert alt_sum(rec).value == pytest.approx(-0.5)
    assert alt_sum(rec).even
    assert not alt_sum(SwitchRecord(1.0, (0.5,))).even
    with pytest.raises(ValidationError):
        SwitchRecord(1.0, (0.5, 0.4))
    with pytest.raises(ValidationError):
        SwitchRecord(1.0, (1.0,))


def test_mle_examples():
    est = mle_rates(SwitchRecord(1.0, (0.25, 0.75)))
    assert (est.lambda1, est.lambda2, est.branch) == (pytest.approx(2), pytest.approx(2),
                                                      "even")
    # S = 0.8, so t - S = 0.2 and the second estimate is 2 / 0.4
    est = mle_rates(SwitchRecord(1.0, (0.5, 0.6, 0.9)))
    assert est.lambda1 == pytest.approx(2.5) and est.lambda2 == pytest.approx(5.0)
    assert est.branch == "odd" and not est.degenerate
    est = mle_rates(SwitchRecord(1.0, (0.4,)))
    assert est.degenerate and est.lambda2 == 0.0 and est.lambda1 == pytest.approx(2.5)
    with pytest.raises(EstimationError, match="no events"):
        mle_rates(SwitchRecord(1.0, ()))


@given(st.lists(st.floats(0.001, 0.999), min_size=2, max_size=12, unique=True),
       st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
@settings(max_examples=80, deadline=None)
def test_mle_maximizes_likelihood(times, d1, d2):
    times = sorted(times)
    if min(np.diff(times)) < 1e-6:
        return
    rec = SwitchRecord(1.0, tuple(times))
    est = mle_rates(rec)
    best = log_likelihood(rec, est.lambda1, est.lambda2)
    other = log_likelihood(rec, est.lambda1 * math.exp(d1), est.lambda2 * math.exp(d2))
    assert other <= best + 1e-9 * abs(best) + 1e-12


@given(rate_st, rate_st, st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_simulate_switches_determinism(l1, l2, seed):
    rates = RatePair(l1, l2)
    a = simulate_switches(rates, 2.0, CounterStream(seed))
    b = simulate_switches(rates, 2.0, CounterStream(seed))
    assert a == b
    assert all(0 < x < 2.0 for x in a.arrival_times)


def test_fast_second_rate_gives_short_even_gaps():
    rec = simulate_switches(RatePair(1.0, 1e6), 50.0, CounterStream(4))
    gaps = np.diff((0.0,) + rec.arrival_times)
    assert gaps[1::2].max() < 1e-4
