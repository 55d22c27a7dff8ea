import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from telegraph_kit.conditional import (ConditioningContext, g_term, g_term_derivative_form,
                                       law_given_pos, law_given_pos_count_vel,
                                       law_given_pos_parity, parity_posterior, v_after_k)
from telegraph_kit.counting import pmf
from telegraph_kit.errors import ScopeError, ValidationError
from telegraph_kit.montecarlo import conditional_histogram, z_scores
from telegraph_kit.quadrature import integrate_1d
from telegraph_kit.telegraph import (ProcessParams, density, density_given_n_v,
                                     density_given_v)

TWO = ProcessParams.from_values(1.0, -1.0, 2.0, 1.0)
EQ = ProcessParams.from_values(1.5, -0.5, 1.2, 1.2)


def test_v_after_k_examples():
    assert v_after_k(TWO, "a1", 0) == 1.0
    assert v_after_k(TWO, "a1", 1) == -1.0
    assert v_after_k(TWO, "a2", 4) == -1.0
    with pytest.raises(ValidationError):
        v_after_k(TWO, "a1", -1)


def test_context_validation():
    with pytest.raises(ValidationError):
        ConditioningContext(1.0, 0.5, 0.0)
    with pytest.raises(ValidationError):
        ConditioningContext(0.5, 1.0, 0.0, k=1)
    with pytest.raises(ValidationError):
        ConditioningContext(0.5, 1.0, 0.0, parity="even", k=2, v0="a1")
    ctx = ConditioningContext(0.5, 1.0, 0.1, k=1, v0="a1")
    assert ctx.known == "pos+count+v0"
    assert ctx.law(TWO).total_mass() == pytest.approx(1.0, abs=1e-8)
    assert ConditioningContext(0.5, 1.0, 0.1).known == "pos_only"


def test_count_vel_law_is_markov_restart():
    law = law_given_pos_count_vel(TWO, 0.5, 1.2, 0.1, 0, "a2")
    for y in (-0.4, 0.0, 0.5):
        assert law.pdf(y) == density_given_v(TWO, 0.7, "a2", y - 0.1)
    assert law.atoms == ((0.1 - 0.7, math.exp(-0.7)),)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-8)
    assert law.pdf(0.1 + 0.71) == 0.0


def test_count_vel_law_first_switch_decomposition():
    # after one switch the motion restarts at x with speed a2 (rate 1)
    law = law_given_pos_count_vel(TWO, 0.5, 1.0, 0.1, 1, "a1")
    dt, u = 0.5, 0.2
    v, w, lv, lw = -1.0, 1.0, 1.0, 2.0
    u_star = (u - w * dt) / (v - w)
    direct = lv * math.exp(-lv * u_star - lw * (dt - u_star)) / abs(v - w)
    rest = integrate_1d(
        lambda r: lv * math.exp(-lv * r) * density_given_v(TWO, dt - r, w, u - v * r),
        0.0, dt, points=[u_star], epsabs=1e-13)
    assert law.pdf(0.3) == pytest.approx(direct + rest, abs=1e-7)


def _prev_histogram(params, s, t, x, count, seed, edges, parity=None, k=None, v0=None):
    h = 0.005 * params.width * s
    a1, a2 = params.a1, params.a2

    def predicate(ch):
        ok = np.abs(ch["pos_s"] - x) < h
        if parity is not None:
            ok &= (ch["n_s"] % 2 == 0) == (parity == "even")
        if k is not None:
            ok &= ch["n_s"] == k
        return ok

    def atom_index(ch):
        v_s = np.where(ch["n_s"] % 2 == 0, ch["v0"], a1 + a2 - ch["v0"])
        return np.where(ch["n"] == ch["n_s"], np.where(v_s == a1, 0, 1), -1)

    return conditional_histogram(
        params, "mixture" if v0 is None else v0, t, count, seed, predicate,
        lambda ch: x + ch["pos"] - ch["pos_s"], edges,
        atoms=[x + a1 * (t - s), x + a2 * (t - s)], atom_index=atom_index, s=s)


def _check_against(summary, law, tol=4.0):
    edges = summary.bin_edges
    expected = [law.interval_mass(a, b) for a, b in zip(edges[:-1], edges[1:])]
    z = z_scores(summary, expected)
    assert np.max(np.abs(z)) < tol
    for loc, mass in law.atoms:
        se = math.sqrt(mass * (1 - mass) / summary.sample_count)
        assert abs(summary.atom_masses[loc] - mass) < tol * se


def test_count_vel_law_matches_conditioned_simulation():
    s, t, x = 0.5, 1.0, 0.1
    law = law_given_pos_count_vel(TWO, s, t, x, 1, "a1")
    edges = np.linspace(x - 0.5, x + 0.5, 11)[1:-1]
    summ = _prev_histogram(TWO, s, t, x, 4_000_000, 3, edges, k=1, v0="a1")
    _check_against(summ, law)


@pytest.mark.parametrize("params,parity", [(TWO, "odd"), (EQ, "odd"), (EQ, "even")])
def test_parity_laws_match_conditioned_simulation(params, parity):
    s, t, x = 0.5, 1.0, 0.2
    law = law_given_pos_parity(params, s, t, x, parity)
    lo, hi = law.support
    edges = np.linspace(lo, hi, 10)[1:-1]
    summ = _prev_histogram(params, s, t, x, 4_000_000, 17, edges, parity=parity)
    _check_against(summ, law)


def test_position_only_law_matches_conditioned_simulation():
    s, t, x = 0.6, 1.0, 0.3
    law = law_given_pos(EQ, s, t, x)
    lo, hi = law.support
    summ = _prev_histogram(EQ, s, t, x, 4_000_000, 5, np.linspace(lo, hi, 10)[1:-1])
    _check_against(summ, law)


@pytest.mark.parametrize("params", [EQ, ProcessParams.from_values(2.0, 0.5, 0.7, 0.7)])
def test_g_term_closed_and_derivative_forms_agree(params):
    a1, a2, lam = params.a1, params.a2, params.rates.lambda1
    s, dt = 0.8, 0.6
    for x in np.linspace(a2 * s, a1 * s, 7)[1:-1]:
        for u in np.linspace(a2 * dt, a1 * dt, 13)[1:-1]:
            g1 = g_term(lam, a1, a2, s, dt, x, u)
            g2 = g_term_derivative_form(lam, a1, a2, s, dt, x, u)
            assert g1 == pytest.approx(g2, rel=1e-10, abs=1e-14)


def test_g_term_vanishes_at_midpoint_and_outside():
    a1, a2, lam, s, dt = 1.5, -0.5, 1.2, 0.8, 0.6
    x = (a1 + a2) * s / 2
    for u in np.linspace(a2 * dt, a1 * dt, 11):
        assert g_term(lam, a1, a2, s, dt, x, u) == 0.0
    assert g_term(lam, a1, a2, s, dt, 0.1, a1 * dt + 0.01) == 0.0


@pytest.mark.parametrize("x", [-0.5, 0.1, 0.35, 0.9])
def test_g_term_integrates_to_zero(x):
    a1, a2, lam, s, dt = 1.5, -0.5, 1.2, 0.8, 0.6
    total = integrate_1d(lambda u: g_term(lam, a1, a2, s, dt, x, u), a2 * dt, a1 * dt,
                         epsabs=1e-13)
    assert abs(total) < 1e-9


def test_g_term_symmetric_simplification():
    c, lam, s, dt = 1.3, 0.9, 0.7, 0.5
    for x in (-0.6, -0.1, 0.4, 0.8):
        for u in (-0.5, -0.2, 0.05, 0.3, 0.6):
            r = math.sqrt(c * c * dt * dt - u * u)
            f = lam * math.exp(-lam * dt) * special.i1(lam * r / c) / (2 * c * c * s * r)
            assert g_term(lam, c, -c, s, dt, x, u) == pytest.approx(x * u * f, rel=1e-12)


@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
@settings(max_examples=100, deadline=None)
def test_g_term_sign_structure(fx, fu):
    c, lam, s, dt = 1.0, 1.5, 1.0, 0.8
    x, u = fx * c * s, fu * c * dt
    g = g_term(lam, c, -c, s, dt, x, u)
    if x * u > 0:
        assert g > 0
    elif x * u < 0:
        assert g < 0


def test_even_density_mass_is_complement_of_atoms():
    s, t, x = 0.8, 1.4, 0.35
    lam, dt = EQ.rates.lambda1, t - s
    law = law_given_pos_parity(EQ, s, t, x, "even")
    assert law.continuous_mass() == pytest.approx(1 - math.exp(-lam * dt), abs=1e-8)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-8)


def test_even_atoms_carry_velocity_posterior():
    s, t, x = 0.8, 1.4, 0.35
    law = law_given_pos_parity(EQ, s, t, x, "even")
    w, dt = EQ.width, t - s
    masses = dict(law.atoms)
    decay = math.exp(-1.2 * dt)
    assert masses[x + 1.5 * dt] == pytest.approx((x + 0.5 * s) / (w * s) * decay)
    assert masses[x - 0.5 * dt] == pytest.approx((1.5 * s - x) / (w * s) * decay)


def test_odd_law_is_shifted_unconditional_law():
    s, t, x = 0.5, 1.3, -0.2
    law = law_given_pos_parity(EQ, s, t, x, "odd")
    for y in (-0.5, -0.2, 0.3):
        assert law.pdf(y) == density(EQ, t - s, y - x)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-8)


def test_odd_law_two_rates_weights_current_velocity():
    s, t, x = 0.5, 1.3, -0.2
    dt = t - s
    law = law_given_pos_parity(TWO, s, t, x, "odd")
    # speed a1 (rate 2) is current with probability 1/3
    for y in (-0.8, -0.2, 0.3):
        expect = (density_given_v(TWO, dt, "a1", y - x) / 3
                  + 2 * density_given_v(TWO, dt, "a2", y - x) / 3)
        assert law.pdf(y) == pytest.approx(expect, rel=1e-14)
    masses = dict(law.atoms)
    assert masses[x + dt] == pytest.approx(math.exp(-2 * dt) / 3)
    assert masses[x - dt] == pytest.approx(2 * math.exp(-dt) / 3)
    assert law.total_mass() == pytest.approx(1.0, abs=1e-8)


def test_even_two_rate_is_out_of_scope():
    with pytest.raises(ScopeError, match="paper scope"):
        law_given_pos_parity(TWO, 0.5, 1.0, 0.1, "even")
    with pytest.raises(ScopeError, match="paper scope"):
        law_given_pos(TWO, 0.5, 1.0, 0.1)
    with pytest.raises(ValidationError):
        law_given_pos(EQ, 0.5, 1.0, 0.75)


def _series_posterior(params, s, x):
    num = 0.0
    for n in range(2, 120, 2):
        for v0 in ("a1", "a2"):
            num += 0.5 * pmf(params.rates_from(v0), s, n) * density_given_n_v(params, s, n, v0, x)
    return num / density(params, s, x)


@pytest.mark.parametrize("x", [-0.3, 0.0, 0.4, 0.9, 1.5 * 0.8 - 1e-6])
def test_parity_posterior_matches_series_ratio(x):
    s = 0.8
    p = ProcessParams.from_values(1.5, -0.5, 1 / s, 1 / s)
    assert parity_posterior(1 / s, 1.5, -0.5, s, x) == pytest.approx(
        _series_posterior(p, s, x), rel=1e-9)


def test_parity_posterior_kac_limit():
    for lam in (10.0, 100.0, 1000.0):
        c = math.sqrt(lam)
        p = parity_posterior(lam, c, -c, 1.0, 0.5)
        assert 0 < p < 1
    assert abs(p - 0.5) < 0.01


@given(st.floats(0.05, 0.95), st.floats(0.02, 0.98))
@settings(max_examples=60, deadline=None)
def test_parity_mixture_identity(fx, fy):
    s, t = 0.7, 1.3
    x = EQ.a2 * s + fx * EQ.width * s
    pe = parity_posterior(1.2, EQ.a1, EQ.a2, s, x)
    full = law_given_pos(EQ, s, t, x)
    even = law_given_pos_parity(EQ, s, t, x, "even")
    odd = law_given_pos_parity(EQ, s, t, x, "odd")
    lo, hi = full.support
    y = lo + fy * (hi - lo)
    assert full.pdf(y) == pytest.approx(pe * even.pdf(y) + (1 - pe) * odd.pdf(y),
                                        rel=1e-10, abs=1e-14)
    for (la, ma), (_, me), (_, mo) in zip(full.atoms, even.atoms, odd.atoms):
        assert ma == pytest.approx(pe * me + (1 - pe) * mo, rel=1e-12)


def test_position_only_law_normalizes():
    for x in (-0.3, 0.2, 0.8):
        assert law_given_pos(EQ, 0.7, 1.5, x).total_mass() == pytest.approx(1.0, abs=1e-8)
