"""
Large-batch simulation of the telegraph process and goodness-of-fit tools.

Paths are identified by their index; path ``i`` always uses the counter
stream keyed by ``(seed, i)``. Batches are cut into fixed-size chunks of
consecutive indices and the chunks are farmed out to threads (the compiled
kernel releases the GIL). Histogram counts are integers and merge exactly,
so results do not depend on the worker count.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend
from ._io import write_csv
from .errors import AcceptanceError, ValidationError

__all__ = [
    "ACCEPTANCE_FLOOR",
    "CHUNK",
    "Collector",
    "EmpiricalSummary",
    "conditional_histogram",
    "ks_distance",
    "run_batch",
    "simulate_batch",
    "tabulated_cdf",
    "worker_count",
    "z_scores",
]

CHUNK = 1 << 16
ACCEPTANCE_FLOOR = 1e-6
PILOT = 1_000_000
FIELDS = ("v0", "n", "pos", "alt_sum", "min", "max", "n_s", "pos_s", "hit_hi", "hit_lo")


def worker_count(workers=None):
    """Threads to use: explicit value, else ``TELEGRAPH_KIT_THREADS``, else CPU count."""
    if workers is None:
        env = os.environ.get("TELEGRAPH_KIT_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValidationError("worker count must be at least 1")
    return workers


def _v0_mode(params, v0):
    if v0 in (None, "mixture", "mix", "uniform"):
        return 2
    return params.index(v0) - 1


@dataclass(frozen=True)
class _Job:
    params: object
    mode: int
    t: float
    seed: int
    s: float
    hi: float
    lo: float
    keep: int

    def run(self, start, count):
        p = self.params
        return _backend.simulate_chunk(
            self.seed, start, count, float(p.a1), float(p.a2), float(p.rates.lambda1),
            float(p.rates.lambda2), float(self.t), self.mode, self.s, self.hi, self.lo,
            self.keep)


def _job(params, v0, t, seed, s, levels, keep):
    if not t > 0:
        raise ValidationError("t must be positive")
    if s is not None and not 0 < s < t:
        raise ValidationError("observation time s must lie in (0, t)")
    hi, lo = (math.inf, -math.inf) if levels is None else (float(levels[0]), float(levels[1]))
    return _Job(params, _v0_mode(params, v0), t, int(seed), 0.0 if s is None else float(s),
                hi, lo, int(keep))


def _chunks(count, chunk, first=0):
    return [(start, min(chunk, first + count - start))
            for start in range(first, first + count, chunk)]


def _map_chunks(fn, count, workers, chunk=CHUNK, first=0):
    pieces = _chunks(count, chunk, first)
    workers = min(worker_count(workers), max(len(pieces), 1))
    if workers == 1:
        return [fn(*p) for p in pieces]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda p: fn(*p), pieces))


def simulate_batch(params, v0, t, count, seed, s=None, levels=None, keep=0, workers=None):
    """Simulate ``count`` paths and return per-path arrays in index order.

    Parameters
    ----------
    v0 : velocity, label, or ``"mixture"``
        ``"mixture"`` draws the start uniformly from ``{a1, a2}``.
    s : float, optional
        Observation time; fills ``n_s`` and ``pos_s``.
    levels : (hi, lo), optional
        First crossing times of ``hi`` upwards and ``lo`` downwards are
        recorded in ``hit_hi`` and ``hit_lo`` (``inf`` if never).
    keep : int
        Number of leading switch times to keep per path in ``times``.
    """
    if count < 1:
        raise ValidationError("count must be at least 1")
    job = _job(params, v0, t, seed, s, levels, keep)
    parts = _map_chunks(job.run, count, workers)
    out = {k: np.concatenate([p[k] for p in parts]) for k in FIELDS}
    out["times"] = np.concatenate([p["times"] for p in parts], axis=0)
    return out


@dataclass
class Collector:
    """What to histogram from each simulated chunk.

    Parameters
    ----------
    value : callable
        Maps the chunk's dict of arrays to the values to bin.
    edges : sequence of float
        Strictly increasing bin edges.
    predicate : callable, optional
        Boolean mask of accepted paths; all paths when omitted.
    atoms : sequence of float
        Atom locations. A value equal to an atom location is counted there
        unless ``atom_index`` decides otherwise.
    atom_index : callable, optional
        Maps the chunk to an integer array: index into ``atoms`` or -1.
    keep_values : bool
        Keep all accepted values (needed for KS distances).
    """

    value: Callable
    edges: Sequence[float]
    predicate: Optional[Callable] = None
    atoms: Sequence[float] = ()
    atom_index: Optional[Callable] = None
    keep_values: bool = False

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.ndim != 1 or self.edges.size < 2 or np.any(np.diff(self.edges) <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        self.atoms = tuple(float(a) for a in self.atoms)

    def tally(self, chunk):
        mask = (np.ones(chunk["n"].shape, dtype=bool) if self.predicate is None
                else np.asarray(self.predicate(chunk), dtype=bool))
        vals = np.asarray(self.value(chunk), dtype=float)
        if self.atom_index is not None:
            idx = np.asarray(self.atom_index(chunk), dtype=np.int64)
        else:
            idx = np.full(vals.shape, -1, dtype=np.int64)
            for i, a in enumerate(self.atoms):
                idx[vals == a] = i
        accepted = int(mask.sum())
        atom_counts = np.bincount(idx[mask & (idx >= 0)], minlength=len(self.atoms))
        cont = vals[mask & (idx < 0)]
        counts, _ = np.histogram(cont, bins=self.edges)
        kept = vals[mask] if self.keep_values else None
        return _Tally(accepted, counts.astype(np.int64), atom_counts.astype(np.int64), kept)


@dataclass
class _Tally:
    accepted: int
    counts: np.ndarray
    atom_counts: np.ndarray
    values: Optional[np.ndarray] = None

    @staticmethod
    def merge(tallies):
        vals = [t.values for t in tallies if t.values is not None]
        return _Tally(
            sum(t.accepted for t in tallies),
            np.sum([t.counts for t in tallies], axis=0),
            np.sum([t.atom_counts for t in tallies], axis=0),
            np.concatenate(vals) if vals else None,
        )


@dataclass
class EmpiricalSummary:
    """Histogram of accepted paths, with atoms reported separately.

    ``bin_masses`` and ``atom_masses`` are fractions of ``sample_count``;
    values falling outside the edges are counted in ``outside_mass``.
    """

    sample_count: int
    bin_edges: np.ndarray
    bin_masses: np.ndarray
    atom_masses: dict
    standard_errors: np.ndarray
    outside_mass: float = 0.0
    values: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_tally(cls, tally, edges, atoms):
        n = tally.accepted
        if n == 0:
            raise AcceptanceError("no path satisfied the predicate")
        masses = tally.counts / n
        se = np.sqrt(masses * (1.0 - masses) / n)
        atom_masses = {a: c / n for a, c in zip(atoms, tally.atom_counts)}
        inside = int(tally.counts.sum() + tally.atom_counts.sum())
        return cls(n, np.asarray(edges), masses, atom_masses, se, (n - inside) / n,
                   tally.values)

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self):
        return np.diff(self.bin_edges)

    def total_mass(self):
        return math.fsum(self.bin_masses) + math.fsum(self.atom_masses.values()) + \
            self.outside_mass

    def atom_standard_error(self, loc):
        p = self.atom_masses[loc]
        return math.sqrt(p * (1.0 - p) / self.sample_count)

    def rows(self):
        """Long-format rows: kind, lo, hi, mass, standard error."""
        out = [("bin", lo, hi, m, se) for lo, hi, m, se in
               zip(self.bin_edges[:-1], self.bin_edges[1:], self.bin_masses,
                   self.standard_errors)]
        for loc in sorted(self.atom_masses):
            out.append(("atom", loc, loc, self.atom_masses[loc], self.atom_standard_error(loc)))
        return out

    def to_csv(self, path):
        write_csv(path, ("kind", "lo", "hi", "mass", "se"), self.rows())

    def to_dict(self):
        return {
            "sample_count": self.sample_count,
            "bin_edges": [float(e) for e in self.bin_edges],
            "bin_masses": [float(m) for m in self.bin_masses],
            "standard_errors": [float(s) for s in self.standard_errors],
            "atom_masses": [[float(k), float(v)] for k, v in sorted(self.atom_masses.items())],
            "outside_mass": float(self.outside_mass),
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text


def run_batch(params, v0, t, count, seed, collectors, s=None, levels=None, keep=0,
              workers=None, first=0):
    """Simulate ``count`` paths and reduce them through ``collectors``.

    ``collectors`` is a mapping name -> ``Collector`` (or a single
    ``Collector``). Returns summaries with the same shape. Paths
    ``first, ..., first + count - 1`` are simulated.
    """
    if count < 1:
        raise ValidationError("count must be at least 1")
    single = isinstance(collectors, Collector)
    cols = {"_": collectors} if single else dict(collectors)
    job = _job(params, v0, t, seed, s, levels, keep)

    def work(start, size):
        chunk = job.run(start, size)
        return {name: c.tally(chunk) for name, c in cols.items()}

    parts = _map_chunks(work, count, workers, first=first)
    out = {name: EmpiricalSummary.from_tally(_Tally.merge([p[name] for p in parts]),
                                             c.edges, c.atoms)
           for name, c in cols.items()}
    return out["_"] if single else out


def conditional_histogram(params, v0, t, count, seed, predicate, value, edges, atoms=(),
                          atom_index=None, s=None, levels=None, keep_values=False,
                          workers=None, pilot=PILOT, floor=ACCEPTANCE_FLOOR):
    """Histogram of ``value`` over paths accepted by ``predicate``.

    A pilot run on the first ``min(pilot, count)`` paths estimates the
    acceptance rate; below ``floor`` an ``AcceptanceError`` is raised before
    the full run.
    """
    col = Collector(value, edges, predicate, atoms, atom_index, keep_values)
    probe = Collector(lambda ch: np.zeros(ch["n"].shape), (-1.0, 1.0), predicate)
    m = min(pilot, count)
    rate = run_batch(params, v0, t, m, seed, probe, s=s, levels=levels,
                     workers=workers).sample_count / m if m else 0.0
    if rate < floor:
        raise AcceptanceError(
            f"pilot acceptance {rate:.3g} is below {floor:g}; widen the conditioning window "
            "or move the parameters towards typical behavior")
    return run_batch(params, v0, t, count, seed, col, s=s, levels=levels, workers=workers)


def ks_distance(sample, cdf, atoms=None):
    """Sup distance between the empirical CDF of ``sample`` and ``cdf``.

    Parameters
    ----------
    sample : array or EmpiricalSummary with kept values
    cdf : callable
        Vectorized, right-continuous ``P{X <= x}``.
    atoms : dict, optional
        ``location -> mass`` of the model law, used for left limits
        ``F(x-) = F(x) - mass``.
    """
    values = sample.values if isinstance(sample, EmpiricalSummary) else sample
    if values is None:
        raise ValidationError("summary was collected without keep_values=True")
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise ValidationError("empty sample")
    ux, counts = np.unique(values, return_counts=True)
    after = np.cumsum(counts) / n
    before = after - counts / n
    f = np.asarray(cdf(ux), dtype=float)
    f_left = f.copy()
    for loc, mass in (atoms or {}).items():
        f_left[ux == loc] -= mass
    return float(max(np.max(np.abs(after - f)), np.max(np.abs(before - f_left))))


def tabulated_cdf(law, cells=4096):
    """Vectorized CDF of a ``MixedLaw``: exact cell masses, linear inside cells.

    Atoms are added right-continuously.
    """
    lo, hi = law.support
    grid = np.linspace(lo, hi, cells + 1)
    masses = [law.interval_mass(a, b) for a, b in zip(grid[:-1], grid[1:])]
    cont = np.concatenate([[0.0], np.cumsum(masses)])
    locs = np.array([a for a, _ in law.atoms])
    amass = np.array([m for _, m in law.atoms])

    def cdf(x):
        x = np.asarray(x, dtype=float)
        val = np.interp(x, grid, cont, left=0.0, right=cont[-1])
        if locs.size:
            val = val + (amass[None, :] * (x[..., None] >= locs)).sum(axis=-1)
        return val

    return cdf


def z_scores(summary, expected):
    """``(empirical - expected) / sqrt(expected (1 - expected) / N)`` per bin.

    Bins with ``expected`` of 0 get ``z = 0`` if empty and ``inf`` otherwise.
    """
    p = np.asarray(expected, dtype=float)
    se = np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / summary.sample_count)
    diff = summary.bin_masses - p
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0),
                     np.where(diff == 0, 0.0, np.inf))
    return z
