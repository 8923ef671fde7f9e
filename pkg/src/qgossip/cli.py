"""Command-line front end: ``qgossip {gen,conductance,simulate,plan,compare}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

from . import conductance as cond
from .errors import CapacityError, DisconnectedGraph, InvalidParameter, ResourceExhausted
from .gossip import (
    GossipConfig,
    bound_multi,
    bound_single,
    estimate_time,
    run_to_completion,
    thread_count,
)
from .graph import make_graph
from .quantum import apply_update, plan_update, run_quantum_gossip
from .transition import make_matrix

SIMULATE_COLUMNS = ["graph", "n", "matrix", "mode", "epsilon", "trials", "t_estimate",
                    "ci_low", "ci_high", "censored", "bound_single", "bound_multi"]
COMPARE_COLUMNS = ["n", "mode", "epsilon", "trials", "t_ring", "t_updated", "ratio",
                   "locc_edges", "locc_swaps", "locc_swaps_with_replicas", "max_draw"]


class UsageError(Exception):
    pass


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n expects a comma-separated list of integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("--n needs at least one size")
    return sorted(set(sizes))


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _csv(rows: list[dict], columns: list[str], timestamp: bool) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(round(x, 10))
    return str(x)


def _single_size(args) -> int:
    if len(args.n) != 1:
        raise UsageError(f"{args.command} takes a single --n")
    return args.n[0]


def cmd_gen(args) -> int:
    g = make_graph(args.family, _single_size(args), args.p, args.seed)
    _emit(json.dumps(g.to_json()) + "\n", args.out)
    return 0


def cmd_conductance(args) -> int:
    n = _single_size(args)
    P = make_matrix(args.matrix, make_graph(args.family, n, args.p, args.seed))
    if args.circulant:
        report = cond.circulant_arc_conductance(P)
        mean = cond.circulant_mean_conductance(P)
    else:
        report = cond.conductance(P)
        mean = cond.mean_conductance(P)
    out = report.to_json()
    out["mean_conductance"] = mean
    _emit(json.dumps(out) + "\n", args.out)
    return 0


def _conductance_pair(P, family: str):
    """(Phi, mean Phi) when computable: exhaustive up to the cap, arcs for rings."""
    if family == "ring":
        return cond.circulant_arc_conductance(P).value, cond.circulant_mean_conductance(P)
    if P.n <= cond.ENUMERATION_CAP:
        return cond.conductance(P).value, cond.mean_conductance(P)
    return None, None


def _simulate_row(args, n: int, workers: int) -> dict:
    g = make_graph(args.family, n, args.p, args.seed)
    P = make_matrix(args.matrix, g)
    cfg = GossipConfig(g, P, args.mode, 0, args.seed)
    est = estimate_time(cfg, args.epsilon, args.trials, args.max_rounds,
                        vertex_transitive=args.vertex_transitive, workers=workers)
    phi, mphi = _conductance_pair(P, args.family)
    return {
        "graph": args.family, "n": n, "matrix": P.name, "mode": args.mode,
        "epsilon": _fmt(args.epsilon), "trials": args.trials, "t_estimate": est.t_estimate,
        "ci_low": est.quantile_ci[0], "ci_high": est.quantile_ci[1],
        "censored": str(est.censored).lower(),
        "bound_single": _fmt(bound_single(P, args.epsilon, phi) if phi else None),
        "bound_multi": _fmt(bound_multi(P, args.epsilon, mphi) if mphi else None),
    }


def _sweep(fn, sizes: list[int]) -> list[dict]:
    threads = thread_count()
    if threads <= 1 or len(sizes) == 1:
        return [fn(n, None) for n in sizes]
    with ThreadPoolExecutor(min(threads, len(sizes))) as pool:
        rows = list(pool.map(lambda n: fn(n, 1), sizes))
    return sorted(rows, key=lambda r: r["n"])


def cmd_simulate(args) -> int:
    rows = _sweep(lambda n, w: _simulate_row(args, n, w), args.n)
    if args.emit_trace:
        n = args.n[0]
        g = make_graph(args.family, n, args.p, args.seed)
        trace = run_to_completion(GossipConfig(g, make_matrix(args.matrix, g), args.mode, 0, args.seed),
                                  args.max_rounds)
        with open(args.emit_trace, "w") as fh:
            json.dump(trace.to_json(), fh)
            fh.write("\n")
    _emit(_csv(rows, SIMULATE_COLUMNS, not args.no_timestamp), args.out)
    return 0


def cmd_plan(args) -> int:
    g = make_graph(args.family, _single_size(args), args.p, args.seed)
    plan = plan_update(g, args.mode)
    apply_update(g, plan)
    _emit(json.dumps(plan.to_json()) + "\n", args.out)
    t = plan.totals
    print(f"{'n':>6} {'replicas':>9} {'edges':>8} {'swaps':>10} {'swaps_x_replicas':>17}", file=sys.stderr)
    print(f"{g.n:>6} {plan.replicas:>9} {t['edges']:>8} {t['swaps']:>10} {t['swaps_with_replicas']:>17}",
          file=sys.stderr)
    return 0


def _compare_row(args, n: int, workers: int) -> dict:
    ring = make_graph("ring", n)
    est = estimate_time(GossipConfig(ring, make_matrix("ring", ring), args.mode, 0, args.seed),
                        args.epsilon, args.trials, args.max_rounds,
                        vertex_transitive=args.vertex_transitive, workers=workers)
    q = run_quantum_gossip(ring, args.mode, args.epsilon, args.trials, args.seed, args.max_rounds,
                           vertex_transitive=args.vertex_transitive, workers=workers)
    t = q.plan.totals
    return {
        "n": n, "mode": args.mode, "epsilon": _fmt(args.epsilon), "trials": args.trials,
        "t_ring": est.t_estimate, "t_updated": q.estimate.t_estimate,
        "ratio": _fmt(est.t_estimate / q.estimate.t_estimate),
        "locc_edges": t["edges"], "locc_swaps": t["swaps"],
        "locc_swaps_with_replicas": t["swaps_with_replicas"],
        "max_draw": int(q.max_draw.max()) if q.max_draw.size else 0,
    }


def cmd_compare(args) -> int:
    rows = _sweep(lambda n, w: _compare_row(args, n, w), args.n)
    _emit(_csv(rows, COMPARE_COLUMNS, not args.no_timestamp), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=["ring", "complete", "chain", "random"], default="ring")
    common.add_argument("--n", type=_sizes, default=[8], help="size or comma list of sizes")
    common.add_argument("--p", type=float, default=0.0, help="extra-edge probability (random family)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--mode", choices=["single", "multi"], default="single")
    common.add_argument("--no-timestamp", action="store_true", help="omit the CSV timestamp header")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--epsilon", type=float, default=0.1)
    sim.add_argument("--trials", type=int, default=1000)
    sim.add_argument("--max-rounds", type=int, default=None)
    sim.add_argument("--vertex-transitive", action="store_true",
                     help="run one source only (valid for ring/complete)")

    parser = argparse.ArgumentParser(prog="qgossip", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="write a graph as JSON")
    c = sub.add_parser("conductance", parents=[common], help="conductance report")
    c.add_argument("--matrix", choices=["default", "ring", "complete", "lazy"], default="default")
    c.add_argument("--circulant", action="store_true", help="O(n) arc scan (rings only)")
    s = sub.add_parser("simulate", parents=[common, sim], help="Monte Carlo dissemination time")
    s.add_argument("--matrix", choices=["default", "ring", "complete", "lazy"], default="default")
    s.add_argument("--emit-trace", metavar="PATH", default=None, help="write one trial's trace JSON")
    sub.add_parser("plan", parents=[common], help="LOCC update plan")
    sub.add_parser("compare", parents=[common, sim], help="ring vs updated-network sweep")
    return parser


COMMANDS = {"gen": cmd_gen, "conductance": cmd_conductance, "simulate": cmd_simulate,
            "plan": cmd_plan, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"qgossip {args.command}: error: {e}", file=sys.stderr)
        return 2
    except InvalidParameter as e:
        parser.print_usage(sys.stderr)
        print(f"qgossip {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (CapacityError, DisconnectedGraph, ResourceExhausted) as e:
        print(f"qgossip {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
