"""Command-line entry point ``rankenv``.

Every subcommand writes its results into ``--out`` and exits with status
0 once it has finished, whatever the test decision.  Input problems exit
with status 2 and a one-line diagnostic.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from .combined import (CombinedCurveSet, Measure, combined_deviation_test, deviation_vector,
                       write_combined_result)
from .envelope import recommend_simulations, run_rank_test
from .fanova import permutation_engine, read_grouped_csv
from .io import read_curveset_csv, write_curveset_csv, write_json, write_result
from .parallel import THREADS_ENV, default_threads
from .rank_core import Side
from .spatial import (PointPattern, Window, fit_null, generate, parse_model, read_pattern,
                      write_pattern)
from .spatial.summary import estimate_many
from .study import StudyConfig, run_study, shift_curvesets, simulate_curvesets


def _functions(text: str) -> list:
    fs = [f.strip().upper() for f in text.split(",") if f.strip()]
    if not fs:
        raise ValueError("--functions is empty")
    return fs


def _grid(args):
    if args.rmax is None:
        return None
    if not args.rmin < args.rmax:
        raise ValueError(f"need rmin < rmax, got {args.rmin} and {args.rmax}")
    if args.K < 1:
        raise ValueError("--K must be at least 1")
    return np.linspace(args.rmin, args.rmax, args.K)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ValueError(f"--alpha must lie in (0, 1), got {alpha}")


def _finish(outdir, result, extra=None):
    summary = write_result(outdir, result, extra)
    if result.matrix.segments and len(result.matrix.segments) > 1:
        write_combined_result(outdir, result)
    print(f"{summary['decision']}: p-interval ({summary['p_minus']:.4g}, {summary['p_plus']:.4g}], "
          f"p_erc = {summary['p_erc']:.4g}")
    return summary


# subcommands

def cmd_rank_test(args):
    _check_alpha(args.alpha)
    cs = read_curveset_csv(args.input, side=args.side)
    res = run_rank_test(cs.to_matrix(), args.alpha)
    _finish(args.out, res)


def cmd_combine(args):
    _check_alpha(args.alpha)
    parts = [read_curveset_csv(p, side=args.side) for p in args.inputs]
    if args.measure == "none":
        m = CombinedCurveSet(parts, allow_unequal=args.allow_unequal).to_matrix()
        res = run_rank_test(m, args.alpha)
        _finish(args.out, res, {"combination": "concatenation"})
    else:
        devs = deviation_vector(parts, Measure(args.measure))
        res = combined_deviation_test(devs, args.alpha)
        _finish(args.out, res, {"combination": f"deviation:{args.measure}"})


def _read_patterns(paths):
    return [read_pattern(p) for p in paths]


def _null_models(args, pats):
    if args.model:
        return [parse_model(args.model)] * len(pats)
    if args.fit == "none":
        raise ValueError("give a null model with --model or choose --fit csr|matclust")
    return [fit_null(args.fit, p) for p in pats]


def cmd_gof(args):
    _check_alpha(args.alpha)
    pats = _read_patterns(args.inputs)
    fs = _functions(args.functions)
    nulls = _null_models(args, pats)
    grids = None
    r = _grid(args)
    if r is not None:
        grids = {f: r for f in fs}
    nsim = args.nsim if args.nsim is not None else recommend_simulations(k_functions=len(fs) * len(pats))
    sets = simulate_curvesets(pats if len(pats) > 1 else pats[0], nulls if len(pats) > 1 else nulls[0],
                              fs, nsim, args.seed, grids, K=args.K, threads=args.threads)
    if args.save_curves:
        os.makedirs(args.out, exist_ok=True)
        for name, cs in sets.items():
            write_curveset_csv(os.path.join(args.out, f"curves_{name.replace(':', '_')}.csv"), cs)
    res = run_rank_test(CombinedCurveSet(list(sets.values())).to_matrix(), args.alpha)
    _finish(args.out, res, {"functions": fs, "null": [str(m) for m in nulls]})


def cmd_fanova(args):
    _check_alpha(args.alpha)
    g = read_grouped_csv(args.input)
    if args.weights and g.weights is None:
        raise ValueError(f"{args.input}: --weights needs a 'weight' column")
    kw = {"weighted": args.weights}
    if args.construction == "fstat":
        kw = {"welch": args.welch}
    m = permutation_engine(g, args.construction, args.nsim, args.seed, **kw)
    res = run_rank_test(m, args.alpha)
    _finish(args.out, res, {"construction": args.construction})


def cmd_groupdiff(args):
    _check_alpha(args.alpha)
    g = read_grouped_csv(args.input)
    if args.weights and g.weights is None:
        raise ValueError(f"{args.input}: --weights needs a 'weight' column")
    scaling = args.scaling or ("ma" if args.construction == "loo" else "none")
    m = permutation_engine(g, args.construction, args.nsim, args.seed, scaling=scaling,
                           b=args.window_b, weighted=args.weights)
    res = run_rank_test(m, args.alpha)
    _finish(args.out, res, {"construction": args.construction, "scaling": scaling,
                            "window_b": args.window_b})


def _window(text):
    if text is None:
        return Window()
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise ValueError("--window takes xmin,xmax,ymin,ymax")
    return Window(*vals)


def cmd_simulate(args):
    model = parse_model(args.model)
    w = _window(args.window)
    rng = np.random.default_rng(args.seed)
    if args.types > 1:
        comps = [generate(model, w, rng) for _ in range(args.types)]
        pts = np.vstack([c.points for c in comps])
        marks = np.concatenate([np.full(c.n, t + 1) for t, c in enumerate(comps)])
        p = PointPattern(pts, w, marks)
    else:
        p = generate(model, w, rng)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    write_pattern(args.out, p)
    print(f"{p.n} points written to {args.out}")


def cmd_summary(args):
    p = read_pattern(args.input)
    fs = _functions(args.functions)
    r = _grid(args)
    if r is None:
        r = np.linspace(args.rmin, min(p.window.width, p.window.height) / 8, args.K)
    est = estimate_many(p, fs, r)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r"] + fs)
        for k in range(r.size):
            w.writerow([repr(float(r[k]))] + [repr(float(est[f][k])) for f in fs])


def cmd_shift_test(args):
    _check_alpha(args.alpha)
    p = read_pattern(args.input)
    if p.marks is None:
        raise ValueError(f"{args.input}: shift test needs a 'mark' column")
    r = _grid(args)
    ntypes = p.types().size
    npairs = ntypes * (ntypes - 1) // 2
    nsim = args.nsim if args.nsim is not None else recommend_simulations(k_functions=npairs)
    sets = shift_curvesets(p, nsim, args.seed, r, K=args.K, threads=args.threads)
    res = run_rank_test(CombinedCurveSet(list(sets.values())).to_matrix(), args.alpha)
    _finish(args.out, res, {"pairs": list(sets)})


def cmd_power_study(args):
    _check_alpha(args.alpha)
    combos = [tuple(_functions(c)) for c in args.functions.split(";") if c.strip()]
    null = "known" if args.fit == "none" else args.fit
    if args.null_model:
        null = parse_model(args.null_model)
    cfg = StudyConfig(parse_model(args.true_model), null, combos, nrep=args.nrep,
                      nsim=args.nsim if args.nsim is not None else 999, alpha=args.alpha,
                      seed=args.seed, K=args.K, rmax_l=args.rmax, rmax_fgj=args.rmax)
    rep = run_study(cfg, threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    write_json(os.path.join(args.out, "study.json"), rep.to_dict())
    for c in rep.cells:
        print(f"{c['functions']:>10s}  rate {c['rate']:.3f}  95% CI ({c['ci_low']:.3f}, {c['ci_high']:.3f})"
              f"  n={c['n']}")
    if rep.failures:
        print(f"{len(rep.failures)} replicate(s) failed and were excluded")


# parser

def _common(p, nsim_default=None, grid=False):
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--nsim", type=int, default=nsim_default,
                   help="number of simulations or permutations s")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default: ${THREADS_ENV} or 1)")
    p.add_argument("--out", default="out")
    if grid:
        p.add_argument("--rmin", type=float, default=0.0)
        p.add_argument("--rmax", type=float, default=None)
        p.add_argument("--K", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rankenv", description="Global rank envelope tests.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sides = [s.value for s in Side]

    p = sub.add_parser("rank-test", help="rank envelope test of a curve-set CSV")
    p.add_argument("input")
    p.add_argument("--side", default="two-sided", choices=sides)
    _common(p)
    p.set_defaults(func=cmd_rank_test)

    p = sub.add_parser("combine", help="combined test of several curve-set CSVs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--side", default="two-sided", choices=sides)
    p.add_argument("--measure", default="none", choices=["none"] + [m.value for m in Measure],
                   help="'none' concatenates the curves; otherwise test one deviation per part")
    p.add_argument("--allow-unequal", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("gof", help="goodness-of-fit test of point pattern(s)")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--functions", default="L")
    p.add_argument("--fit", default="csr", choices=["none", "csr", "matclust"])
    p.add_argument("--model", default=None, help="fixed null model, e.g. 'poisson(200)'")
    p.add_argument("--save-curves", action="store_true")
    _common(p, grid=True)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("fanova", help="permutation functional ANOVA")
    p.add_argument("input")
    p.add_argument("--construction", default="fstat", choices=["fstat", "means"])
    p.add_argument("--welch", action="store_true", help="variance-weighted F")
    p.add_argument("--weights", action="store_true", help="use the weight column for group means")
    _common(p, nsim_default=2499)
    p.set_defaults(func=cmd_fanova)

    p = sub.add_parser("groupdiff", help="permutation test of group differences")
    p.add_argument("input")
    p.add_argument("--construction", default="pairwise", choices=["pairwise", "loo"])
    p.add_argument("--scaling", default=None, choices=["none", "unit", "ma"])
    p.add_argument("--window-b", type=int, default=1)
    p.add_argument("--weights", action="store_true")
    _common(p, nsim_default=2499)
    p.set_defaults(func=cmd_groupdiff)

    p = sub.add_parser("simulate", help="simulate a point pattern")
    p.add_argument("model")
    p.add_argument("--window", default=None, help="xmin,xmax,ymin,ymax (default unit square)")
    p.add_argument("--types", type=int, default=1, help="superpose this many independent marked copies")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="pattern.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("summary", help="estimate summary functions of a pattern")
    p.add_argument("input")
    p.add_argument("--functions", default="L")
    p.add_argument("--rmin", type=float, default=0.0)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--K", type=int, default=500)
    p.add_argument("--out", default="summary.csv")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("shift-test", help="random superposition test of a marked pattern")
    p.add_argument("input")
    _common(p, grid=True)
    p.set_defaults(func=cmd_shift_test)

    p = sub.add_parser("power-study", help="rejection rates over simulated data sets")
    p.add_argument("--true-model", required=True)
    p.add_argument("--fit", default="none", choices=["none", "csr", "matclust"],
                   help="null fitted to each data set; 'none' uses the true model")
    p.add_argument("--null-model", default=None, help="fixed null model instead of --fit")
    p.add_argument("--functions", default="L", help="combinations separated by ';', e.g. 'L;L,F,G,J'")
    p.add_argument("--nrep", type=int, default=100)
    _common(p, grid=True)
    p.set_defaults(func=cmd_power_study)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_threads()
    try:
        args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"rankenv {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
