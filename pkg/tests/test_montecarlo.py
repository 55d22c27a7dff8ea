import math

import numpy as np
import pytest
from scipy import stats

from telegraph_kit.errors import AcceptanceError, ValidationError
from telegraph_kit.montecarlo import (Collector, EmpiricalSummary, conditional_histogram,
                                      ks_distance, run_batch, simulate_batch, tabulated_cdf,
                                      worker_count, z_scores)
from telegraph_kit.telegraph import ProcessParams, law

ASYM = ProcessParams.from_values(1.0, -1.0, 2.0, 1.0)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("TELEGRAPH_KIT_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    with pytest.raises(ValidationError):
        worker_count(0)


def test_batch_is_deterministic_and_worker_independent():
    a = simulate_batch(ASYM, "mixture", 1.5, 200_000, 12, s=0.5, levels=(0.3, -0.2), keep=3,
                       workers=1)
    b = simulate_batch(ASYM, "mixture", 1.5, 200_000, 12, s=0.5, levels=(0.3, -0.2), keep=3,
                       workers=4)
    for key in a:
        np.testing.assert_array_equal(a[key], b[key])
    c = simulate_batch(ASYM, "mixture", 1.5, 200_000, 13, workers=1)
    assert not np.array_equal(a["pos"], c["pos"])


def test_offset_batches_reproduce_the_same_paths():
    col = Collector(lambda ch: ch["pos"], np.linspace(-1, 1, 9))
    whole = run_batch(ASYM, "a1", 1.0, 150_000, 4, col, workers=1)
    first = run_batch(ASYM, "a1", 1.0, 70_000, 4, col, workers=2)
    rest = run_batch(ASYM, "a1", 1.0, 80_000, 4, col, workers=2, first=70_000)
    merged = (first.bin_masses * first.sample_count + rest.bin_masses * rest.sample_count)
    np.testing.assert_allclose(merged, whole.bin_masses * whole.sample_count, atol=1e-9)


def test_paths_respect_extremes_and_speed_bound():
    res = simulate_batch(ASYM, "mixture", 2.0, 100_000, 3)
    assert np.all(res["min"] <= res["pos"]) and np.all(res["pos"] <= res["max"])
    assert np.all(res["min"] >= -2.0 - 1e-12) and np.all(res["max"] <= 2.0 + 1e-12)


def test_atoms_and_total_mass():
    t = 1.0
    target = law(ASYM, t)
    col = Collector(lambda ch: ch["pos"], np.linspace(-t, t, 21), atoms=(-t, t))
    summ = run_batch(ASYM, "mixture", t, 1_000_000, 8, col)
    assert summ.total_mass() == pytest.approx(1.0, abs=1e-12)
    for loc, mass in target.atoms:
        assert abs(summ.atom_masses[loc] - mass) < 4 * summ.atom_standard_error(loc)
    expected = [target.interval_mass(a, b) for a, b in zip(col.edges[:-1], col.edges[1:])]
    assert np.max(np.abs(z_scores(summ, expected))) < 4.5


def test_unconditional_ks_distance():
    t = 1.0
    target = law(ASYM, t)
    col = Collector(lambda ch: ch["pos"], (-t, t), atoms=(-t, t), keep_values=True)
    summ = run_batch(ASYM, "mixture", t, 400_000, 21, col)
    d = ks_distance(summ, tabulated_cdf(target), atoms=dict(target.atoms))
    # Kolmogorov 99.9% point is about 1.95 / sqrt(N)
    assert d < 1.95 / math.sqrt(400_000)


def test_ks_distance_basics():
    u = np.random.default_rng(0).uniform(size=20_000)
    assert ks_distance(u, stats.uniform.cdf) == pytest.approx(stats.kstest(u, "uniform").statistic)
    pts = np.array([0.0, 1.0])
    assert ks_distance(pts, lambda x: np.where(x >= 1.0, 1.0, np.where(x >= 0.0, 0.5, 0.0)),
                       atoms={0.0: 0.5, 1.0: 0.5}) == 0.0
    with pytest.raises(ValidationError):
        ks_distance(np.array([]), stats.uniform.cdf)


def test_single_path_histogram():
    col = Collector(lambda ch: ch["pos"], np.linspace(-1, 1, 5))
    summ = run_batch(ASYM, "a1", 1.0, 1, 0, col)
    assert summ.sample_count == 1
    assert sorted(summ.bin_masses.tolist() + [summ.outside_mass]).count(1.0) <= 1
    assert summ.total_mass() == pytest.approx(1.0)


def test_acceptance_floor():
    with pytest.raises(AcceptanceError):
        conditional_histogram(ASYM, "a1", 1.0, 100_000, 1, lambda ch: ch["n"] == 60,
                              lambda ch: ch["pos"], (-1, 1), pilot=100_000)


def test_standard_error_coverage():
    from telegraph_kit.counting import pmf
    params = ProcessParams.from_values(1.0, -1.0, 1.5, 1.5)
    col = Collector(lambda ch: ch["n"], np.arange(-0.5, 6.5))
    target = np.array([pmf(params.rates, 1.0, n) for n in range(6)])
    inside = total = 0
    for rep in range(100):
        summ = run_batch(params, "a1", 1.0, 5_000, 1000 + rep, col, workers=1)
        inside += int(np.sum(np.abs(summ.bin_masses - target) <= 2 * summ.standard_errors))
        total += target.size
    assert inside / total >= 0.93


def test_one_switch_histogram_is_flat():
    params = ProcessParams.from_values(1.0, -1.0, 1.0, 1.0)
    edges = np.linspace(-1, 1, 11)
    summ = conditional_histogram(params, "a1", 1.0, 1_000_000, 6, lambda ch: ch["n"] == 1,
                                 lambda ch: ch["pos"], edges)
    assert np.max(np.abs(z_scores(summ, np.full(10, 0.1)))) < 4


def test_ks_against_own_empirical_cdf_is_zero():
    x = np.random.default_rng(3).normal(size=1000)
    ecdf = lambda v: np.searchsorted(np.sort(x), v, side="right") / x.size  # noqa: E731
    # each sample point is an atom of its own empirical law
    assert ks_distance(x, ecdf, atoms={v: 1 / x.size for v in x}) == pytest.approx(0.0, abs=1e-15)


def test_uniform_ks_bound():
    from telegraph_kit.rng import CounterStream
    u = CounterStream(5).uniforms(1_000_000)
    assert ks_distance(u, stats.uniform.cdf) < 0.002


def test_summary_serialization(tmp_path):
    col = Collector(lambda ch: ch["n"], np.arange(-0.5, 5.5))
    summ = run_batch(ASYM, "a1", 1.0, 1000, 2, col)
    path = tmp_path / "h.csv"
    summ.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,lo,hi,mass,se" and len(lines) == 6
    d = summ.to_dict()
    assert d["sample_count"] == 1000 and len(d["bin_masses"]) == 5
    assert isinstance(summ, EmpiricalSummary) and summ.widths.tolist() == [1.0] * 5


def test_collector_rejects_bad_edges():
    with pytest.raises(ValidationError):
        Collector(lambda ch: ch["pos"], (1.0, 0.0))
