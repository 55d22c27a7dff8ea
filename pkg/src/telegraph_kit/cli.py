"""
Command-line front end.

Subcommands
-----------
density   evaluate a law on a grid and write a long-format CSV
simulate  simulate paths and write one CSV row per path
estimate  closed-form rate estimates from an arrival record (JSON)
compare   Monte Carlo histogram against the analytic law, per-bin z-scores
replay    re-run the command stored in a manifest

Every output ``OUT`` is accompanied by ``OUT.manifest.json``. Exit codes:
0 success, 1 statistical failure, 2 scope or validation error, 3 numeric
non-convergence.
"""

import argparse
import datetime
import json
import math
import sys

import numpy as np

from . import __version__, _backend
from . import conditional as cond
from . import counting, extremes, montecarlo, telegraph
from ._io import write_csv, write_json
from .counting import RatePair, SwitchRecord
from .errors import StatisticalFailure, TelegraphError, ValidationError
from .quadrature import integrate_1d
from .rng import CounterStream
from .telegraph import ProcessParams

LAWS = ("pmf", "altsum", "pos_given_nv", "pos_free", "pos_given_prev", "extremes_joint",
        "reflection")
DENSITY_HEADER = ("law", "kind", "x", "value", "support_flag")
COMPARE_HEADER = ("law", "kind", "lo", "hi", "analytic", "empirical", "se", "z")
Z_LIMIT = 5.0


# ---------------------------------------------------------------------------
# argument parsing


def _grid(text):
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:steps, got {text!r}") from None
    if steps < 1 or not hi >= lo:
        raise argparse.ArgumentTypeError("grid needs hi >= lo and steps >= 1")
    return lo, hi, steps


def _common(p, simulate=False):
    g = p.add_argument_group("process")
    g.add_argument("--l1", type=float, default=1.0, help="rate at velocity a1")
    g.add_argument("--l2", type=float, default=None, help="rate at velocity a2 (default l1)")
    g.add_argument("--a1", type=float, default=None, help="upper velocity (default c)")
    g.add_argument("--a2", type=float, default=None, help="lower velocity (default -c)")
    g.add_argument("--c", type=float, default=1.0, help="speed of the symmetric process")
    g.add_argument("--t", type=float, default=1.0, help="time horizon")
    g.add_argument("--v0", default=None, help="initial velocity: a1, a2, or a number")
    g = p.add_argument_group("law")
    g.add_argument("--law", choices=LAWS, default=None)
    g.add_argument("--s", type=float, default=None, help="earlier observation time")
    g.add_argument("--x", type=float, default=None,
                   help="position observed at s, or the single evaluation point")
    g.add_argument("--n", type=int, default=None, help="number of switches N(t)")
    g.add_argument("--k", type=int, default=None, help="number of switches N(s)")
    g.add_argument("--parity", choices=("even", "odd"), default=None)
    g.add_argument("--alpha", type=float, default=None, help="lower level is -alpha")
    g.add_argument("--beta", type=float, default=None, help="upper level")
    g.add_argument("--order", choices=extremes.ORDERS, default="either")
    g.add_argument("--nmax", type=int, default=None, help="largest n for --law pmf")
    g.add_argument("--grid", type=_grid, default=None, help="lo:hi:steps")
    g = p.add_argument_group("run")
    g.add_argument("--samples", type=int, default=1_000_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=None,
                   help="|z| threshold for compare (default 5)")
    g.add_argument("--out", required=True, help="output file")


def build_parser():
    parser = argparse.ArgumentParser(prog="telegraph-kit",
                                     description="Telegraph process laws and simulation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("density", "evaluate a law on a grid"),
                        ("simulate", "simulate paths"),
                        ("compare", "Monte Carlo vs analytic law")):
        _common(sub.add_parser(name, help=help_))
    est = sub.add_parser("estimate", help="closed-form rate estimates")
    est.add_argument("--times", default=None,
                     help="comma-separated arrival times; simulated when omitted")
    est.add_argument("--t", type=float, required=True)
    est.add_argument("--l1", type=float, default=1.0)
    est.add_argument("--l2", type=float, default=None)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--out", required=True)
    rep = sub.add_parser("replay", help="re-run a manifest")
    rep.add_argument("manifest")
    return parser


def _process(args):
    a1 = args.c if args.a1 is None else args.a1
    a2 = -args.c if args.a2 is None else args.a2
    l2 = args.l1 if args.l2 is None else args.l2
    return ProcessParams.from_values(a1, a2, args.l1, l2)


def _v0(params, text, default=None):
    if text is None:
        return default
    if text in ("a1", "a2", "+", "-", "mixture"):
        return text if text == "mixture" else params.velocity(text)
    return params.velocity(float(text))


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError("missing " + ", ".join("--" + m for m in missing))


def _points(args, default):
    if args.grid is None:
        if args.x is not None and args.law in ("extremes_joint", "reflection"):
            return np.array([args.x])
        lo, hi, steps = default
    else:
        lo, hi, steps = args.grid
    return np.linspace(lo, hi, steps)


def _edges(args, default):
    lo, hi, steps = default if args.grid is None else args.grid
    return np.linspace(lo, hi, steps + 1)


# ---------------------------------------------------------------------------
# analytic side


def _extremes_query(args, x, order=None):
    _need(args, "n", "alpha", "beta")
    rates = None if (args.l2 is None or args.l2 == args.l1) else RatePair(args.l1, args.l2)
    return extremes.ExtremesQuery(args.c, args.t, args.n, args.alpha, args.beta, float(x),
                                  order=order or args.order, rates=rates)


def _law_spec(args):
    """(density(x), support test(x), atoms, default grid) for the requested law."""
    law = args.law
    if law is None:
        raise ValidationError("--law is required")
    params = _process(args)
    t = args.t
    if law == "altsum":
        _need(args, "n")
        rates = params.rates
        lo, hi = (0.0, t) if args.n % 2 else (-t, 0.0)
        return (lambda s: counting.alt_sum_density(rates, t, args.n, s),
                lambda s: lo < s < hi, (), (lo, hi, 41))
    if law == "pos_given_nv":
        _need(args, "n", "v0")
        v0 = _v0(params, args.v0)
        lo, hi = params.a2 * t, params.a1 * t
        return (lambda x: telegraph.density_given_n_v(params, t, args.n, v0, x),
                lambda x: lo < x < hi, (), (lo, hi, 41))
    if law == "pos_free":
        v0 = _v0(params, args.v0)
        mixed = telegraph.law(params, t) if v0 is None else telegraph.law_given_v(params, t, v0)
        return _mixed_spec(mixed)
    if law == "pos_given_prev":
        _need(args, "s", "x")
        ctx = cond.ConditioningContext(args.s, t, args.x, parity=args.parity, k=args.k,
                                       v0=None if args.k is None else _v0(params, args.v0))
        return _mixed_spec(ctx.law(params))
    if law == "extremes_joint":
        q0 = _extremes_query(args, 0.0)
        return (lambda x: extremes.density(_extremes_query(args, x)),
                lambda x: _in_extremes_support(_extremes_query(args, x)),
                (), (-q0.alpha, q0.beta, 41))
    if law == "reflection":
        q0 = _extremes_query(args, 0.0, order="max_first")
        return (lambda x: extremes.reflection_closed_form(
                    _extremes_query(args, x, order="max_first")),
                lambda x: extremes.classify_support(
                    _extremes_query(args, x, order="max_first")).in_SM,
                (), (-q0.alpha, q0.beta, 41))
    raise ValidationError(f"law {law!r} has no density form")


def _in_extremes_support(q):
    sc = extremes.classify_support(q)
    if q.order == "max_first":
        return sc.in_SM
    if q.order == "min_first":
        return sc.in_Sm
    return sc.in_SM or sc.in_Sm


def _mixed_spec(mixed):
    lo, hi = mixed.support
    return (mixed.pdf, lambda x: lo < x < hi, tuple(mixed.atoms), (lo, hi, 41))


# ---------------------------------------------------------------------------
# commands


def cmd_density(args):
    rows = []
    if args.law == "pmf":
        params = _process(args)
        nmax = args.nmax if args.nmax is not None else (
            int(args.grid[1]) if args.grid else 20)
        for n in range(nmax + 1):
            rows.append(("pmf", "mass", n, counting.pmf(params.rates, args.t, n), 1))
    else:
        f, inside, atoms, default = _law_spec(args)
        for x in _points(args, default):
            flag = bool(inside(float(x)))
            rows.append((args.law, "density", float(x), float(f(float(x))) if flag else 0.0,
                         int(flag)))
        for loc, mass in atoms:
            rows.append((args.law, "atom", float(loc), float(mass), 1))
    write_csv(args.out, DENSITY_HEADER, rows)
    return 0, {"rows": len(rows)}


def cmd_simulate(args):
    params = _process(args)
    v0 = _v0(params, args.v0, default="mixture")
    levels = None
    if args.alpha is not None or args.beta is not None:
        levels = (args.beta if args.beta is not None else math.inf,
                  -args.alpha if args.alpha is not None else -math.inf)
    batch = montecarlo.simulate_batch(params, v0, args.t, args.samples, args.seed, s=args.s,
                                      levels=levels)
    cols = ["v0", "n", "pos", "alt_sum", "min", "max"]
    if args.s is not None:
        cols += ["n_s", "pos_s"]
    if levels is not None:
        cols += ["hit_hi", "hit_lo"]
    arrays = [batch[c] for c in cols]
    rows = ((i, *(a[i] for a in arrays)) for i in range(args.samples))
    write_csv(args.out, ["index"] + cols, rows)
    return 0, {"rows": args.samples}


def cmd_estimate(args):
    if args.times is not None:
        times = tuple(float(v) for v in args.times.split(",") if v.strip())
        record = SwitchRecord(args.t, times)
        source = "input"
    else:
        l2 = args.l1 if args.l2 is None else args.l2
        record = counting.simulate_switches(RatePair(args.l1, l2), args.t,
                                            CounterStream(args.seed))
        source = "simulated"
    est = counting.mle_rates(record)
    out = {"lambda1": est.lambda1, "lambda2": est.lambda2, "branch": est.branch,
           "degenerate": est.degenerate, "n": record.n, "t": record.horizon,
           "alt_sum": counting.alt_sum(record).value, "source": source}
    write_json(args.out, out)
    return 0, {"estimate": out}


def _compare_setup(args, params):
    """Collector pieces and analytic bin masses for ``compare``."""
    law, t = args.law, args.t
    if law == "pmf":
        nmax = args.nmax if args.nmax is not None else 20
        edges = np.arange(-0.5, nmax + 1.0)
        expected = [counting.pmf(params.rates, t, n) for n in range(nmax + 1)]
        return dict(v0="a1", value=lambda ch: ch["n"], edges=edges), expected, ()
    if law == "altsum":
        _need(args, "n")
        f, _, _, default = _law_spec(args)
        n = args.n
        spec = dict(v0="a1", predicate=lambda ch: ch["n"] == n,
                    value=lambda ch: ch["alt_sum"], edges=_edges(args, default))
        return spec, _bin_masses(f, spec["edges"]), ()
    if law == "pos_given_nv":
        _need(args, "n", "v0")
        f, _, _, default = _law_spec(args)
        n = args.n
        spec = dict(v0=_v0(params, args.v0), predicate=lambda ch: ch["n"] == n,
                    value=lambda ch: ch["pos"], edges=_edges(args, default))
        return spec, _bin_masses(f, spec["edges"]), ()
    if law == "pos_free":
        v0 = _v0(params, args.v0, default="mixture")
        f, _, atoms, default = _law_spec(args)
        spec = dict(v0=v0, value=lambda ch: ch["pos"], edges=_edges(args, default),
                    atoms=[a for a, _ in atoms])
        return spec, _bin_masses(f, spec["edges"]), atoms
    if law == "pos_given_prev":
        return _compare_prev(args, params)
    if law in ("extremes_joint", "reflection"):
        order = "max_first" if law == "reflection" else args.order
        f, _, _, default = _law_spec(args)
        n, a, b = args.n, args.alpha, args.beta
        if params.equal_rates():
            # the law given N(t) = n is rate-free; rate n/t makes N(t) = n likeliest
            params = ProcessParams.symmetric_process(args.c, n / t)

        def value(ch):
            ev = (ch["n"] == n) & (ch["min"] < -a) & (ch["max"] > b)
            if order == "max_first":
                ev &= ch["hit_hi"] < ch["hit_lo"]
            elif order == "min_first":
                ev &= ch["hit_lo"] < ch["hit_hi"]
            return np.where(ev, ch["pos"], np.inf)

        spec = dict(v0="a1", predicate=lambda ch: ch["n"] == n, value=value,
                    edges=_edges(args, default), levels=(b, -a), params=params)
        return spec, _bin_masses(f, spec["edges"]), ()
    raise ValidationError(f"unknown law {law!r}")


def _compare_prev(args, params):
    _need(args, "s", "x")
    f, _, atoms, default = _law_spec(args)
    s, x, t = args.s, args.x, args.t
    h = 0.005 * params.width * s
    a1, a2 = params.a1, params.a2
    k = args.k
    v0 = None if k is None else _v0(params, args.v0)
    parity = args.parity

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

    spec = dict(v0="mixture" if v0 is None else v0, predicate=predicate,
                value=lambda ch: x + ch["pos"] - ch["pos_s"], edges=_edges(args, default),
                atoms=[x + a1 * (t - s), x + a2 * (t - s)], atom_index=atom_index, s=s)
    return spec, _bin_masses(f, spec["edges"]), atoms


def _bin_masses(f, edges):
    return [integrate_1d(f, lo, hi, epsabs=1e-11, epsrel=1e-10)
            for lo, hi in zip(edges[:-1], edges[1:])]


def cmd_compare(args):
    params = _process(args)
    spec, expected, atoms = _compare_setup(args, params)
    params = spec.pop("params", params)
    v0 = spec.pop("v0")
    summary = montecarlo.conditional_histogram(
        params, v0, args.t, args.samples, args.seed, spec.pop("predicate", None),
        spec.pop("value"), spec.pop("edges"), atoms=spec.pop("atoms", ()),
        atom_index=spec.pop("atom_index", None), s=spec.pop("s", None),
        levels=spec.pop("levels", None))
    expected = np.asarray(expected, dtype=float)
    z = montecarlo.z_scores(summary, expected)
    rows = []
    for lo, hi, p, e, se, zz in zip(summary.bin_edges[:-1], summary.bin_edges[1:], expected,
                                    summary.bin_masses, summary.standard_errors, z):
        rows.append((args.law, "bin", lo, hi, p, e, se, zz))
    atom_z = []
    for loc, mass in atoms:
        emp = summary.atom_masses[loc]
        se = math.sqrt(mass * (1 - mass) / summary.sample_count)
        zz = (emp - mass) / se
        atom_z.append(zz)
        rows.append((args.law, "atom", loc, loc, mass, emp,
                     summary.atom_standard_error(loc), zz))
    cum_emp = np.cumsum(summary.bin_masses)
    cum_an = np.cumsum(expected)
    ks = float(np.max(np.abs(cum_emp - cum_an)))
    rows.append((args.law, "ks", "", "", "", ks, "", ""))
    write_csv(args.out, COMPARE_HEADER, rows)
    limit = Z_LIMIT if args.tol is None else args.tol
    zmax = float(np.max(np.abs(np.concatenate([z, atom_z])))) if len(z) else 0.0
    info = {"accepted": summary.sample_count, "max_abs_z": zmax, "binned_ks": ks,
            "z_limit": limit}
    if zmax > limit:
        return StatisticalFailure.exit_code, info
    return 0, info


COMMANDS = {"density": cmd_density, "simulate": cmd_simulate, "estimate": cmd_estimate,
            "compare": cmd_compare}


def _manifest(argv, args, info):
    params = {k: v for k, v in vars(args).items() if k not in ("command",)}
    return {
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "tolerance_overrides": {"tol": getattr(args, "tol", None)},
        "artifact_version": __version__,
        "backend": _backend.BACKEND,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "result": info,
    }


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        with open(args.manifest, encoding="utf-8") as fh:
            return main(json.load(fh)["argv"])
    try:
        code, info = COMMANDS[args.command](args)
    except TelegraphError as exc:
        print(f"telegraph-kit: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"telegraph-kit: {exc}", file=sys.stderr)
        return 2
    write_json(args.out + ".manifest.json", _manifest(argv, args, info))
    if code == StatisticalFailure.exit_code:
        print(f"telegraph-kit: max |z| = {info['max_abs_z']:.3f} exceeds "
              f"{info['z_limit']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
