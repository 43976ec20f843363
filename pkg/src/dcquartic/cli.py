"""Command line interface.

Subcommands: validate | verify | sweep | baseline | chain.

Exit codes are stable for scripting: 0 success, 1 internal failure,
2 validation or parse failure.
"""

import argparse
import sys

import numpy as np

from .baseline import correspondence_report
from .critical import find_critical_pairs
from .curvature import build_bundle, verify_chain_identity
from .ensembles import generate_instance
from .errors import DualityError, ParseError, ValidationError
from .gap import epsilon_sweep
from .instancefile import dumps_canonical, load_instance
from .problem import primal_value
from .report import (
    analyze_instance,
    build_run_report,
    format_point_table,
    summarize_records,
)

MAX_SWEEP_N = 16
MAX_SWEEP_BIG_N = 8
MAX_SWEEP_COUNT = 10_000


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps_canonical(doc) + "\n")


def cmd_validate(args):
    P = load_instance(args.path)
    print(f"ok: instance valid (n={P.n}, N={P.N}, "
          f"K-A margin {P.kma_min_eig:.3e}, "
          f"coercivity margin {P.coercivity_margin:.3e}"
          f"{', override' if P.coercivity_override else ''})")
    return 0


def cmd_verify(args):
    P = load_instance(args.path)
    report = build_run_report(P, args.seeds, args.rng, args.samples)
    summary = report["summary"]
    print(f"instance {report['instance_digest'][:12]}  "
          f"n={P.n} N={P.N}  seeds={args.seeds} rng={args.rng}")
    print(f"{summary['n_points']} critical point(s), "
          f"{summary['n_dropped_starts']} start(s) dropped")
    print(format_point_table(report["critical_points"]))
    print(f"max relative gap  {summary['max_relative_gap']:.3e}")
    print(f"max chain residual {summary['max_chain_residual']:.3e}")
    if args.json:
        _write_json(args.json, report)
    return 0


def cmd_chain(args):
    P = load_instance(args.path)
    pairs = find_critical_pairs(P, args.seeds, args.rng)
    print(f"{'pt':>3} {'J(x0)':>12} {'chain residual':>15} {'asym':>11}")
    for i, pair in enumerate(pairs):
        try:
            bundle = build_bundle(P, pair)
            residual = verify_chain_identity(P, pair, bundle)
            print(f"{i:>3} {primal_value(P, pair.x0):>12.5e} "
                  f"{residual:>15.3e} {bundle.dual_hessian_asymmetry:>11.3e}")
        except DualityError as exc:
            print(f"{i:>3} {primal_value(P, pair.x0):>12.5e} error: {exc}")
    return 0


def cmd_baseline(args):
    P = load_instance(args.path)
    pairs = find_critical_pairs(P, args.seeds, args.rng)
    print(f"{'pt':>3} {'-J1*':>12} {'primal inertia':>15} "
          f"{'dual inertia':>13} {'corr':>5} {'S pd':>5}")
    for i, pair in enumerate(pairs):
        try:
            rep = correspondence_report(P, pair)
            print(f"{i:>3} {rep.minus_j1_value:>12.5e} "
                  f"{str(rep.primal_hessian_inertia):>15} "
                  f"{str(rep.baseline_hessian_inertia):>13} "
                  f"{'yes' if rep.correspondence else 'no':>5} "
                  f"{'yes' if rep.ab_matrix_pd else 'no':>5}")
        except DualityError as exc:
            print(f"{i:>3} error: {exc}")
    return 0


def _parse_eps_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"bad --eps-list: {exc}") from exc


def cmd_sweep(args):
    if not (1 <= args.n <= MAX_SWEEP_N):
        raise ParseError(f"--n must be in [1, {MAX_SWEEP_N}]")
    if not (1 <= args.big_n <= MAX_SWEEP_BIG_N):
        raise ParseError(f"--N must be in [1, {MAX_SWEEP_BIG_N}]")
    if not (0 <= args.count <= MAX_SWEEP_COUNT):
        raise ParseError(f"--count must be in [0, {MAX_SWEEP_COUNT}]")
    eps_list = _parse_eps_list(args.eps_list) if args.eps_list else None

    instances = []
    results = []
    for i in range(args.count):
        P = generate_instance(args.n, args.big_n, [args.rng, 1 + i])
        instances.append(P)
        if eps_list is None:
            records, ms = analyze_instance(P, args.seeds, args.rng,
                                           args.samples)
            summary = summarize_records(records)
            summary["n_dropped_starts"] = ms.n_dropped
            results.append({"index": i, "summary": summary,
                            "critical_points": records})
        else:
            sweep = epsilon_sweep(P, eps_list, args.rng, n_seeds=args.seeds)
            results.append({"index": i, "sweep": _sweep_doc(sweep)})

    doc = {"settings": {"n": args.n, "N": args.big_n, "count": args.count,
                        "rng": args.rng, "seeds": args.seeds,
                        "samples": args.samples,
                        "eps_list": eps_list},
           "instances": results}
    if eps_list is None:
        _print_plain_sweep(results)
    else:
        _print_eps_sweep(results)
    if args.json:
        _write_json(args.json, doc)
    return 0


def _sweep_doc(sweep):
    return {
        "eps_list": sweep.eps_list,
        "points": [{
            "eps": p.eps, "ok": p.ok, "error": p.error,
            "h1_norm": p.h1_norm,
            "pairs": [{k: (v.tolist() if isinstance(v, np.ndarray) else v)
                       for k, v in rec.items()} for rec in p.pairs],
        } for p in sweep.points],
        "slopes": sweep.slopes,
    }


def _print_plain_sweep(results):
    total_points = 0
    max_gap = 0.0
    max_chain = 0.0
    max_alpha1 = 0.0
    corr_false = 0
    for r in results:
        s = r["summary"]
        total_points += s["n_points"]
        max_gap = max(max_gap, s["max_relative_gap"])
        max_chain = max(max_chain, s["max_chain_residual"])
        corr_false += s["correspondence_false"]
        for rec in r["critical_points"]:
            if rec["alpha1_norm"] is not None:
                max_alpha1 = max(max_alpha1, rec["alpha1_norm"])
    print(f"instances           {len(results)}")
    print(f"critical points     {total_points}")
    print(f"max relative gap    {max_gap:.3e}")
    print(f"max chain residual  {max_chain:.3e}")
    print(f"max |alpha1|        {max_alpha1:.3e}")
    print(f"correspondence-false pairs {corr_false}")


def _print_eps_sweep(results):
    n_slopes = 0
    min_slope = None
    for r in results:
        for entry in r["sweep"]["slopes"]:
            if entry["slope"] is not None:
                n_slopes += 1
                min_slope = (entry["slope"] if min_slope is None
                             else min(min_slope, entry["slope"]))
    print(f"instances      {len(results)}")
    print(f"fitted slopes  {n_slopes}")
    if min_slope is not None:
        print(f"min slope      {min_slope:.4f}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dcquartic",
        description="Duality certificates for quadratic-plus-quartic "
                    "functionals: critical points, dual lifts, curvature "
                    "chains, gap and extremality verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("verify", help="full verification of one instance")
    p.add_argument("path")
    p.add_argument("--seeds", type=int, default=32,
                   help="multistart seed count (default 32)")
    p.add_argument("--rng", type=int, default=7,
                   help="random seed (default 7)")
    p.add_argument("--samples", type=int, default=1000,
                   help="extremality probe samples per point (default 1000)")
    p.add_argument("--json", help="write the machine report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="seeded random ensemble runs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", dest="big_n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--rng", type=int, default=3)
    p.add_argument("--seeds", type=int, default=12)
    p.add_argument("--samples", type=int, default=0,
                   help="probe samples per point (default 0: skip probes)")
    p.add_argument("--eps-list",
                   help="comma separated; drives K = A + eps I per instance")
    p.add_argument("--json", help="write the machine report here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline",
                       help="literature-dual correspondence per pair")
    p.add_argument("path")
    p.add_argument("--seeds", type=int, default=32)
    p.add_argument("--rng", type=int, default=7)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("chain",
                       help="curvature bundle and chain residual per pair")
    p.add_argument("path")
    p.add_argument("--seeds", type=int, default=32)
    p.add_argument("--rng", type=int, default=7)
    p.set_defaults(func=cmd_chain)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        reason = getattr(exc, "reason", "parse-error")
        print(f"error ({reason}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error (parse-error): {exc}", file=sys.stderr)
        return 2
    except DualityError as exc:
        print(f"internal failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
