# Operator command line: simulate runs, compute metrics, generate
# fixtures, and serve interactive sessions.
#
# Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import fixtures as fixtures_mod
from .engine import CONDITIONS
from .instructor import load_landmarks
from .metrics import (
    aggregate,
    load_run_record,
    save_run_record,
    write_event_log,
    write_summary_csv,
    write_summary_json,
)
from .route import load_route, route_metrics
from .simkit import AgentConfig, run_sim


def _parse_seeds(args) -> list[int]:
    if args.seeds:
        lo, _, hi = args.seeds.partition("..")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise SystemExit2(f"bad --seeds range {args.seeds!r}, expected A..B")
        if hi_i < lo_i:
            raise SystemExit2(f"empty --seeds range {args.seeds!r}")
        return list(range(lo_i, hi_i + 1))
    return [args.seed]


class SystemExit2(Exception):
    """Usage/config error; turned into exit code 2."""


def _load_route_file(path: str):
    if not os.path.exists(path):
        raise SystemExit2(f"route file not found: {path}")
    with open(path, "rb") as fh:
        return load_route(fh.read())


def cmd_run(args) -> int:
    route = _load_route_file(args.route)
    if route.graph is None:
        raise SystemExit2(f"route {route.id!r} has no intersection graph")
    if args.landmarks:
        if not os.path.exists(args.landmarks):
            raise SystemExit2(f"landmark file not found: {args.landmarks}")
        db = load_landmarks(open(args.landmarks, "rb").read())
    else:
        db = fixtures_mod.gen_landmark_db(route)

    os.makedirs(args.out, exist_ok=True)
    agent = AgentConfig()
    for seed in _parse_seeds(args):
        record, events = run_sim(
            route, args.condition, replace(agent, seed=seed), landmark_db=db,
            pose_log_stride=args.pose_stride,
        )
        stem = f"{route.id}_{args.condition}_{seed}"
        write_event_log(os.path.join(args.out, f"events_{stem}.jsonl"), events)
        save_run_record(os.path.join(args.out, f"record_{stem}.json"), record)
        status = "ok" if record.completed else "incomplete"
        print(f"{stem}: {status}, {record.deviation_count} deviations, "
              f"{record.distance_walked_m:.1f} m walked")
    return 0


def cmd_metrics_route(args) -> int:
    route = _load_route_file(args.route)
    m = route_metrics(route)
    print(f"route {route.id}")
    print(f"distance_m {m.distance_m:.3f}")
    print(f"intersections {m.n_intersections}")
    print(f"turns {m.n_turns}")
    print(f"alt_paths_mean {m.mean_alt_paths:.4f}")
    print(f"alt_paths_sd {m.sd_alt_paths:.4f}")
    print(f"turn_angle_mean {m.mean_turn_angle_deg:.4f}")
    print(f"turn_angle_sd {m.sd_turn_angle_deg:.4f}")
    return 0


def cmd_metrics_runs(args) -> int:
    if not os.path.isdir(args.in_dir):
        raise SystemExit2(f"not a directory: {args.in_dir}")
    records = []
    for name in sorted(os.listdir(args.in_dir)):
        if name.startswith("record_") and name.endswith(".json"):
            records.append(load_run_record(os.path.join(args.in_dir, name)))
    if not records:
        raise SystemExit2(f"no record_*.json files in {args.in_dir}")
    rows = aggregate(records)
    write_summary_csv(args.csv, rows)
    if args.json:
        write_summary_json(args.json, rows)
    print(f"aggregated {len(records)} runs into {len(rows)} summary rows -> {args.csv}")
    return 0


def cmd_fixtures(args) -> int:
    written = fixtures_mod.write_replica_fixtures(args.out)
    for path in written:
        print(path)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    return serve(routes_dir=args.routes, landmarks_path=args.landmarks,
                 bind=args.bind, out_dir=args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nav",
        description="Audio-first pedestrian guidance engine and simulation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate walks and write event logs")
    run_p.add_argument("--route", required=True, help="route JSON file")
    run_p.add_argument("--condition", required=True, choices=sorted(CONDITIONS))
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--seeds", help="inclusive range A..B, overrides --seed")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--landmarks", help="landmark DB JSON (default: generated)")
    run_p.add_argument("--pose-stride", type=int, default=1, dest="pose_stride",
                       help="log every Nth pose (0 disables pose events)")
    run_p.set_defaults(fn=cmd_run)

    metrics_p = sub.add_parser("metrics", help="route characteristics and run summaries")
    msub = metrics_p.add_subparsers(dest="metrics_command", required=True)
    mr = msub.add_parser("route", help="print complexity metrics for a route file")
    mr.add_argument("--route", required=True)
    mr.set_defaults(fn=cmd_metrics_route)
    ms = msub.add_parser("runs", help="aggregate run records to CSV/JSON")
    ms.add_argument("--in", required=True, dest="in_dir")
    ms.add_argument("--csv", required=True)
    ms.add_argument("--json")
    ms.set_defaults(fn=cmd_metrics_runs)

    fx = sub.add_parser("fixtures", help="write the replica route/landmark fixtures")
    fx.add_argument("--out", required=True)
    fx.set_defaults(fn=cmd_fixtures)

    serve_p = sub.add_parser("serve", help="interactive session server")
    serve_p.add_argument("--routes", required=True, help="directory of route JSON files")
    serve_p.add_argument("--landmarks", help="landmark DB JSON (default: generated per route)")
    serve_p.add_argument("--bind", default=os.environ.get("NAV_BIND", "127.0.0.1:8787"))
    serve_p.add_argument("--out", default="runs", help="directory for session records")
    serve_p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit2 as exc:
        print(f"nav: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"nav: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
