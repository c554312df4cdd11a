"""Command-line interface: ``python -m motifscale <subcommand> ...``.

Exit codes: 0 on success, 2 on a precondition or parse error, 3 when an
enumeration aborts at the resource ceiling.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

from .census import (
    CensusResourceError,
    count_induced,
    count_subgraph,
    count_with_windows,
)
from .constants import SqrtClassError, estimate_A
from .experiments import (
    PlanError,
    emit_atlas_table,
    parse_plan,
    run_ratio_experiment,
    run_scaling_experiment,
    self_averaging_probe,
    write_atlas_csv,
)
from .generate import (
    check_Jn,
    degrees_from_values,
    derive_seed,
    generate_rank1,
    pair_half_edges,
    read_degrees,
    read_edge_list,
    sample_degrees,
    write_degrees,
    write_edge_list,
)
from .motifs import MotifError, motif_by_name
from .optimize import optimize, parse_tau


# --- subcommand handlers ------------------------------------------------------


def _cmd_atlas(args) -> int:
    rows = emit_atlas_table(args.k, args.tau, args.mode)
    if args.out:
        path = write_atlas_csv(rows, args.out)
        print(f"wrote {path} ({len(rows)} rows)")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([str(v).lower() if isinstance(v, bool) else v
                             for v in r.values()])
    return 0


def _cmd_optimize(args) -> int:
    h = motif_by_name(args.motif)
    out = optimize(h, parse_tau(args.tau), mode=args.mode)
    print(f"motif {h.canonical_key.hex()} k={h.k} m={h.m}")
    print(f"mode {out.mode} tau {out.tau}")
    print(f"B {out.B} = {out.value}")
    print(f"exponent {out.exponent.text} = {out.exponent_value}")
    print(f"alpha {' '.join(str(a) for a in out.alpha)}")
    print(f"unique {str(out.unique).lower()}")
    for p in out.optimizers:
        print(f"optimizer {p.assignment_text(h)}")
    return 0


def _cmd_generate(args) -> int:
    tau = parse_tau(args.tau)
    d = sample_degrees(args.n, tau, derive_seed(args.seed, 0))
    build = generate_rank1 if args.rank1 else pair_half_edges
    g = build(d, derive_seed(args.seed, 1))
    write_edge_list(g, args.out)
    print(f"wrote {args.out}: n={g.n} edges={g.simple_edge_count} "
          f"self_loops_erased={g.erased_self_loops} "
          f"multi_edges_erased={g.erased_multi_edges} "
          f"jn={str(check_Jn(d)).lower()}")
    if args.degrees_out:
        write_degrees(d, args.degrees_out)
        print(f"wrote {args.degrees_out}")
    return 0


def _parse_windows(tokens, k: int) -> list[tuple[float, float]]:
    wins = [(0.0, math.inf)] * k
    for tok in tokens:
        parts = tok.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad window {tok!r}, expected vertex:lo:hi")
        try:
            v = int(parts[0])
            lo, hi = float(parts[1]), float(parts[2])
        except ValueError:
            raise ValueError(f"bad window {tok!r}, expected vertex:lo:hi") from None
        if not 0 <= v < k:
            raise ValueError(f"window vertex {v} outside 0..{k - 1}")
        wins[v] = (lo, hi)
    return wins


def _cmd_census(args) -> int:
    g = read_edge_list(args.graph)
    h = motif_by_name(args.motif)
    if args.window:
        wins = _parse_windows(args.window, h.k)
        if args.degrees:
            d = read_degrees(args.degrees)
        else:
            d = degrees_from_values(g.degrees)
        rep = count_with_windows(g, d, h, wins, mode=args.mode,
                                 ceiling=args.ceiling)
    elif args.mode == "sub":
        rep = count_subgraph(g, h, ceiling=args.ceiling)
    else:
        rep = count_induced(g, h, ceiling=args.ceiling)
    record = {
        "motif": rep.motif_key.hex(),
        "mode": rep.mode,
        "count": rep.count,
        "labeled_embeddings": rep.labeled_embeddings,
        "engine": rep.engine,
        "aut_normalized": rep.aut_normalized,
    }
    if rep.windows is not None:
        record["windows"] = [[lo, hi] for lo, hi in rep.windows]
    print(json.dumps(record))
    return 0


def _cmd_constant(args) -> int:
    h = motif_by_name(args.motif)
    eps = Fraction(args.eps) if args.eps is not None else None
    est = estimate_A(h, args.mode, parse_tau(args.tau), args.samples,
                     args.seed, eps=eps, workers=args.workers)
    print(est.to_json())
    return 0


def _cmd_experiment(args) -> int:
    plan = parse_plan(args.plan)
    if plan.kind == "scaling":
        res = run_scaling_experiment(plan)
        for (tok, mode), fit in sorted(res.slopes.items()):
            print(f"{tok} {mode}: slope {fit.slope:.4f} "
                  f"+/- {fit.stderr:.4f} over {fit.n_points} sizes")
        paths = [res.csv_path, res.manifest_path, *res.figure_paths]
    elif plan.kind == "ratio":
        h = motif_by_name(plan.motifs[0])
        res = run_ratio_experiment(plan, h, plan.alpha_star, plan.alpha_alt)
        for n, r in zip(plan.n_grid, res.ratios):
            print(f"n={n}: ratio {r:.6g}")
        verdict = "yes" if res.strictly_decreasing else "no"
        print(f"{res.motif}: strictly decreasing {verdict} "
              f"(trend {res.trend:+.3f})")
        paths = [res.csv_path, res.manifest_path, res.figure_path]
    else:
        h = motif_by_name(plan.motifs[0])
        rep = self_averaging_probe(plan, h)
        for n in plan.n_grid:
            print(f"n={n}: var/mean^2 fixed {rep.ratio_fixed[n]:.6g} "
                  f"iid {rep.ratio_iid[n]:.6g}")
        paths = [rep.csv_path, rep.manifest_path, rep.figure_path]
    for p in paths:
        print(f"wrote {p}")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motifscale",
        description="Motif counts and scaling constants for heavy-tailed "
                    "erased configuration models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("atlas", help="emit the k-vertex exponent table")
    p.add_argument("--k", type=int, required=True, choices=(3, 4, 5))
    p.add_argument("--tau", required=True, help="degree exponent, e.g. 5/2")
    p.add_argument("--mode", required=True, choices=("sub", "ind"))
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_atlas)

    p = sub.add_parser("optimize", help="maximize the partition objective")
    p.add_argument("--motif", required=True,
                   help="built-in name, inline k=..;edges=.. spec, or @file")
    p.add_argument("--tau", required=True)
    p.add_argument("--mode", required=True, choices=("sub", "ind"))
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("generate", help="sample an erased configuration model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rank1", action="store_true",
                   help="independent-edge graph instead of half-edge pairing")
    p.add_argument("--out", required=True, help="edge-list output path")
    p.add_argument("--degrees-out", default=None,
                   help="also write the pre-erasure degree sequence")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("census", help="count copies of a motif in a graph")
    p.add_argument("--graph", required=True, help="edge-list path")
    p.add_argument("--motif", required=True)
    p.add_argument("--mode", required=True, choices=("sub", "ind"))
    p.add_argument("--window", action="append", default=None,
                   metavar="V:LO:HI",
                   help="degree window for motif vertex V (repeatable; "
                   "hi may be inf)")
    p.add_argument("--degrees", default=None,
                   help="degree-sequence file the windows refer to "
                   "(default: the graph's own degrees)")
    p.add_argument("--ceiling", type=int, default=None,
                   help="abort when the projected enumeration exceeds this")
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("constant", help="Monte Carlo limit-constant estimate")
    p.add_argument("--motif", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--mode", required=True, choices=("sub", "ind"))
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--eps", default=None,
                   help="truncate every axis to [eps, 1/eps] (default: none)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_constant)

    p = sub.add_parser("experiment", help="run a plan file end to end")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CensusResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (MotifError, PlanError, SqrtClassError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
