"""Command-line entry point for reproducible percolation experiments.

Every subcommand echoes its full parameter set into a JSON summary and
writes plot-ready CSV tables.  Outputs are byte-identical across re-runs
with the same arguments and across thread counts.  Exit codes: 0 success,
1 usage/runtime error, 2 window-insufficient exhaustion, 3 divergent-moment
misuse.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import estimators, laws, sampler, serialize, topology
from .connectivity import WindowInsufficientError
from .geometry import Rect
from .laws import DivergentMomentError, LawSpecError
from .stats import Estimate

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WINDOW = 2
EXIT_DIVERGENT = 3


def _progress(args, message: str) -> None:
    if args.progress:
        print(message, file=sys.stderr)


def _echo(args, extra: dict) -> dict:
    spec = {k: v for k, v in vars(args).items() if k not in ("func", "progress")}
    spec.update(extra)
    return {k: serialize._jsonable(v) for k, v in sorted(spec.items())}


def _estimate_row(est: Estimate) -> list:
    return [est.p_hat, est.n, est.ci_low, est.ci_high]


def _out(args, suffix: str) -> str:
    return f"{args.out}.{suffix}"


def cmd_sample(args) -> int:
    law = laws.parse_law(args.law)
    window = Rect(-args.window / 2, -args.window / 2, args.window / 2, args.window / 2)
    config = sampler.sample_configuration(
        law, args.lam, window, args.seed, eps=args.eps, pad=args.pad
    )
    serialize.save_configuration(config, _out(args, "csv"), _out(args, "json"))
    print(_out(args, "csv"))
    print(_out(args, "json"))
    return EXIT_OK


def cmd_cross(args) -> int:
    law = laws.parse_law(args.law)
    event = estimators.CrossingEvent(args.l, args.aspect, args.phase)
    run = estimators.mc_estimate(
        law, args.lam, event, args.n, args.seed, eps=args.eps, threads=args.threads
    )
    est = run.estimate
    serialize.write_csv(
        _out(args, "csv"),
        ["p_hat", "n", "ci_low", "ci_high"],
        [_estimate_row(est)],
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "cross"}),
         "summary": {"p_hat": est.p_hat, "n": est.n, "ci_low": est.ci_low,
                     "ci_high": est.ci_high, "window_retries": run.window_retries}},
    )
    print(_out(args, "csv"))
    return EXIT_OK


def cmd_threshold(args) -> int:
    law = laws.parse_law(args.law)
    rows = []
    results = {}
    for phase in ("occupied", "vacant"):
        _progress(args, f"bisecting {phase} threshold")
        res = estimators.threshold_bisect(
            law, args.l, phase=phase, aspect=args.aspect, target=args.target,
            n_per_probe=args.n, tol=args.tol, seed=args.seed,
            lam_hi=args.lam_hi, eps=args.eps, threads=args.threads,
        )
        results[phase] = res.as_dict()
        rows.append([phase, res.lambda_hat, res.ci_width_at_root, len(res.iterations)])
    serialize.write_csv(
        _out(args, "csv"),
        ["phase", "lambda_hat", "ci_width_at_root", "iterations"],
        rows,
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "threshold"}), "summary": results},
    )
    print(_out(args, "csv"))
    return EXIT_OK


def cmd_decay(args) -> int:
    law = laws.parse_law(args.law)
    L_list = [float(v) for v in args.L.split(",")]
    profile = estimators.decay_profile(
        law, args.lam, args.l, L_list, args.cap, args.n, args.seed,
        eps=args.eps, threads=args.threads,
    )
    rows = [
        [p.L, p.estimate.p_hat, p.estimate.n, p.estimate.ci_low, p.estimate.ci_high]
        for p in profile.points
    ]
    serialize.write_csv(
        _out(args, "csv"), ["L", "p_hat", "n", "ci_low", "ci_high"], rows
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "decay"}),
         "summary": {"slope": profile.slope, "intercept": profile.intercept,
                     "censored": profile.censored}},
    )
    print(_out(args, "csv"))
    return EXIT_OK


def cmd_eevent(args) -> int:
    law = laws.parse_law(args.law)
    event = estimators.EscapeEventSpec(args.l, args.L)
    run = estimators.mc_estimate(
        law, args.lam, event, args.n, args.seed, eps=args.eps, threads=args.threads
    )
    est = run.estimate
    serialize.write_csv(
        _out(args, "csv"), ["p_hat", "n", "ci_low", "ci_high"], [_estimate_row(est)]
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "eevent"}),
         "summary": {"p_hat": est.p_hat, "n": est.n,
                     "window_retries": run.window_retries}},
    )
    print(_out(args, "csv"))
    return EXIT_OK


def cmd_necklace(args) -> int:
    law = laws.parse_law(args.law)
    window = Rect(-args.window / 2, -args.window / 2, args.window / 2, args.window / 2)
    config = sampler.sample_configuration(law, args.lam, window, args.seed, eps=args.eps)
    neck = topology.extract_necklace(config, args.L, order=args.order)
    if neck is None:
        serialize.write_json(
            _out(args, "json"),
            {"spec": _echo(args, {"command": "necklace"}), "summary": {"found": False}},
        )
        print(_out(args, "json"))
        return EXIT_OK
    report = topology.validate_necklace(neck, config, grid_h=args.grid_h)
    serialize.write_csv(
        _out(args, "csv"),
        ["cx", "cy", "radius"],
        [[float(a), float(b), float(c)] for a, b, c in zip(neck.x, neck.y, neck.r)],
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "necklace"}),
         "summary": {
             "found": True,
             "k": neck.k,
             "second_radius": topology.second_radius(neck),
             "radii": [float(v) for v in neck.r],
             "two_components": report.two_components,
             "avoids_and_surrounds": report.avoids_and_surrounds,
             "minimal": report.minimal,
             "n_pockets": report.n_pockets,
         }},
    )
    print(_out(args, "json"))
    return EXIT_OK


def cmd_formulas(args) -> int:
    law = laws.parse_law(args.law)
    if isinstance(law, laws.SlicedLaw):
        raise DivergentMomentError("closed-form tables need a base radius law")
    rows = []
    for r in [float(v) for v in args.r.split(",")]:
        nu = laws.big_disc_rate(law, args.lam, r, args.s) if args.s else None
        rows.append([
            r,
            laws.tail_mass(law, r),
            laws.partial_moment(law, r, 1),
            laws.partial_moment(law, r, 2),
            laws.circuit_weight(law, r),
            nu if nu is not None else "",
        ])
    ts = laws.circuit_weight_tail(law, args.L) if law.moment_is_finite(2) else None
    serialize.write_csv(
        _out(args, "csv"),
        ["r", "tail_mass", "partial_moment_1", "partial_moment_2",
         "circuit_weight", "big_disc_rate"],
        rows,
    )
    summary = {"second_moment_finite": law.moment_is_finite(2)}
    if ts is not None:
        summary["tail_sum"] = serialize._jsonable(ts.total)
        summary["tail_bound"] = serialize._jsonable(ts.bound)
        summary["j0"] = ts.j0
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "formulas"}), "summary": summary},
    )
    for row in rows:
        print(",".join(serialize.fmt_float(v) if isinstance(v, float) else str(v)
                       for v in row))
    return EXIT_OK


def cmd_gof(args) -> int:
    law = laws.parse_law(args.law)
    res = estimators.poisson_gof(
        law, args.lam, args.r, args.s, args.n, args.seed,
        eps=args.eps, threads=args.threads,
    )
    serialize.write_csv(
        _out(args, "csv"),
        ["count", "frequency"],
        [[int(k), int(v)] for k, v in enumerate(res.counts)],
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "gof"}),
         "summary": {"nu": res.nu, "method": res.method, "p_value": res.p_value,
                     "statistic": res.statistic,
                     "pair_freq": res.pair_freq.p_hat,
                     "pair_bound": res.pair_bound,
                     "pair_bound_ok": res.pair_bound_ok}},
    )
    print(_out(args, "json"))
    return EXIT_OK


def cmd_renorm(args) -> int:
    law = laws.parse_law(args.law)
    d_list = [int(v) for v in args.d.split(",")]
    res = estimators.dependence_test(
        law, args.lam, args.l, d_list, args.n, args.seed,
        eps=args.eps, threads=args.threads,
    )
    rows = [
        [c.distance,
         c.corr if c.corr is not None else "",
         c.ci_low if c.ci_low is not None else "",
         c.ci_high if c.ci_high is not None else ""]
        for c in res.correlations
    ]
    serialize.write_csv(_out(args, "csv"), ["distance", "corr", "ci_low", "ci_high"], rows)
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "renorm"}),
         "summary": {"p_x1": res.p_x1.p_hat, "cross_p": res.cross_p.p_hat,
                     "union_bound_ok": res.union_bound_ok}},
    )
    print(_out(args, "csv"))
    return EXIT_OK


def cmd_coverage(args) -> int:
    law = laws.parse_law(args.law)
    window = Rect(-args.window / 2, -args.window / 2, args.window / 2, args.window / 2)
    rows = []
    k = max(args.n_configs, 1)
    fractions = []
    for i in range(k):
        seed_i = estimators.derive_seed(args.seed, i)
        config = sampler.sample_configuration(
            law, args.lam, window, seed_i, eps=args.eps, pad=args.pad
        )
        rng = sampler.replicate_rng(seed_i, 1)
        est = sampler.vacant_fraction(config, window, args.n_probe, rng)
        fractions.append(est.p_hat)
        rows.append([i, est.p_hat, est.n, est.ci_low, est.ci_high])
    if isinstance(law, laws.SlicedLaw):
        # slice of a 3D model: a planar point is vacant iff no 3D ball
        # covers it, so the exponent is the mean ball volume
        ez3 = law.base.partial_moment(0.0, 3)
        exponent = args.lam * (4.0 * math.pi / 3.0) * ez3
    else:
        ez2 = law.partial_moment(0.0, 2)
        exponent = args.lam * math.pi * ez2
    analytic = math.exp(-exponent) if not math.isinf(exponent) else None
    serialize.write_csv(
        _out(args, "csv"), ["config", "vacant_fraction", "n", "ci_low", "ci_high"], rows
    )
    serialize.write_json(
        _out(args, "json"),
        {"spec": _echo(args, {"command": "coverage"}),
         "summary": {"mean_vacant_fraction": float(np.mean(fractions)),
                     "analytic_void_probability": serialize._jsonable(
                         analytic if analytic is not None else "divergent"),
                     }},
    )
    print(_out(args, "csv"))
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--law", required=True, help="law spec, e.g. dirac:z=1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-3,
                   help="certified expected count of missed boundary discs")
    p.add_argument("--out", default="out", help="output path prefix")
    p.add_argument("--progress", action="store_true",
                   help="human-readable progress on stderr")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boolperc",
        description="Poisson Boolean percolation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit one configuration as CSV + JSON")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--window", type=float, default=16.0, help="window side length")
    p.add_argument("--pad", type=float, default=None,
                   help="explicit truncation radius (heavy-tail mode)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("cross", help="estimate a box crossing probability")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--l", type=float, required=True, help="short box side")
    p.add_argument("--aspect", type=float, default=3.0)
    p.add_argument("--phase", choices=["occupied", "vacant"], default="occupied")
    p.add_argument("--n", type=int, default=400)
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("threshold", help="dual bisection of both thresholds")
    _add_common(p)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--aspect", type=float, default=3.0)
    p.add_argument("--target", type=float, default=0.5)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--lam-hi", type=float, default=None)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("decay", help="capped-arm decay profile")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--L", required=True, help="comma-separated list of outer scales")
    p.add_argument("--cap", type=float, default=None)
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("eevent", help="lattice escape event probability")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--n", type=int, default=400)
    p.set_defaults(func=cmd_eevent)

    p = sub.add_parser("necklace", help="detect/extract/validate a necklace")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--L", type=float, required=True, help="protected ball radius")
    p.add_argument("--window", type=float, default=64.0)
    p.add_argument("--order", choices=["largest_first", "smallest_first"],
                   default="largest_first")
    p.add_argument("--grid-h", type=float, default=0.05)
    p.set_defaults(func=cmd_necklace)

    p = sub.add_parser("formulas", help="closed-form quantity tables")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--r", required=True, help="comma-separated radii")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--L", type=float, default=81.0)
    p.set_defaults(func=cmd_formulas)

    p = sub.add_parser("gof", help="Poisson fit of the big-disc count")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n", type=int, default=2000)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("renorm", help="coarse field and dependence test")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--d", default="1,2,11,12", help="lattice distances")
    p.add_argument("--n", type=int, default=400)
    p.set_defaults(func=cmd_renorm)

    p = sub.add_parser("coverage", help="vacant fraction vs void probability")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--window", type=float, default=32.0)
    p.add_argument("--pad", type=float, default=None)
    p.add_argument("--n-probe", type=int, default=10000)
    p.add_argument("--n-configs", type=int, default=10)
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LawSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except DivergentMomentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except WindowInsufficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except (ValueError, OSError, estimators.ThresholdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
