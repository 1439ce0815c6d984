"""Command-line front end: ``gen``, ``run`` and ``sweep``.

Exit codes: 0 ok, 2 verification failure, 3 invariant violation, 4 protocol error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import RunReport, family_for_size, run_instance
from .graph import (
    FAMILIES,
    GraphError,
    GraphFamily,
    dumps_edge_list,
    generate,
    read_edge_list,
    write_edge_list,
)
from .sim import SimError

EXIT_OK, EXIT_UNVERIFIED, EXIT_INVARIANT, EXIT_PROTOCOL = 0, 2, 3, 4


def _family_args(p):
    p.add_argument("--family", choices=FAMILIES + ("gnm",))
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=0)
    p.add_argument("--cols", type=int, default=0)
    p.add_argument("--clique", type=int, default=0)
    p.add_argument("--tail", type=int, default=0)


def _family(args) -> GraphFamily:
    name = "gnm_connected" if args.family == "gnm" else args.family
    return GraphFamily(
        name, n=args.n, m=args.m, rows=args.rows, cols=args.cols,
        clique=args.clique, tail=args.tail, seed=args.seed,
    )


def _emit(reports, path):
    lines = "".join(r.to_json() + "\n" for r in reports)
    if path in (None, "-"):
        sys.stdout.write(lines)
    else:
        with open(path, "a") as fh:
            fh.write(lines)


def _status(report: RunReport) -> int:
    if not report.verified:
        return EXIT_UNVERIFIED
    if report.invariant_violations:
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_gen(args) -> int:
    g = generate(_family(args))
    if args.out in (None, "-"):
        sys.stdout.write(dumps_edge_list(g))
    else:
        write_edge_list(g, args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    if args.input:
        graph, family, seed = read_edge_list(args.input), "file", None
    elif args.family:
        fam = _family(args)
        graph, family, seed = generate(fam), fam.name, fam.seed
    else:
        raise GraphError("run needs an input file or --family")
    report = run_instance(
        graph, args.b, k=args.k, root=args.root, check=args.check_invariants,
        round_cap=args.round_cap, family=family, seed=seed,
    )
    _emit([report], args.json_out)
    return _status(report)


def cmd_sweep(args) -> int:
    cells = [
        (fam, n, seed, b)
        for fam in args.families
        for n in args.sizes
        for seed in args.seeds
        for b in args.bs
    ]
    if not cells:
        raise GraphError("empty sweep grid")
    reports = []
    for fam, n, seed, b in cells:
        graph = generate(family_for_size(fam, n, seed, args.m_factor))
        reports.append(run_instance(
            graph, b, k=args.k, check=args.check_invariants,
            round_cap=args.round_cap, family=fam, seed=seed,
        ))
    _emit(reports, args.json_out)
    worst = max(_status(r) for r in reports)
    print(
        f"cells={len(reports)} verified={sum(r.verified for r in reports)} "
        f"max_round_ratio={max(r.round_ratio for r in reports):.3f} "
        f"max_message_ratio={max(r.message_ratio for r in reports):.3f}",
        file=sys.stderr,
    )
    return worst


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="congest-mst", description="Distributed MST simulator and bench.")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a generated instance as an edge list")
    _family_args(gen)
    gen.add_argument("--out", "-o", default="-")
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run the protocol on one instance and verify it")
    run.add_argument("input", nargs="?", help="edge-list file (instead of --family)")
    _family_args(run)
    run.add_argument("--b", type=int, default=1)
    run.add_argument("--k", type=int, default=None)
    run.add_argument("--root", type=int, default=None)
    run.add_argument("--check-invariants", action="store_true")
    run.add_argument("--json-out", default="-")
    run.add_argument("--round-cap", type=int, default=None)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run a grid of families x sizes x seeds x b")
    sweep.add_argument("--families", nargs="*", default=["gnm"])
    sweep.add_argument("--sizes", nargs="*", type=int, default=[64])
    sweep.add_argument("--seeds", nargs="*", type=int, default=[0])
    sweep.add_argument("--b", dest="bs", nargs="*", type=int, default=[1])
    sweep.add_argument("--m-factor", type=int, default=4)
    sweep.add_argument("--k", type=int, default=None)
    sweep.add_argument("--check-invariants", action="store_true")
    sweep.add_argument("--json-out", default="-")
    sweep.add_argument("--round-cap", type=int, default=None)
    sweep.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimError, RuntimeError, ValueError) as exc:
        stage = getattr(exc, "stage", "?")
        print(f"protocol error in stage {stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
