#!/usr/bin/env python3
"""Replica routes and their complexity profile.

Builds the three bundled study-style routes and prints the
characteristics that make them comparable yet distinct: length,
intersections, branching factor, and turn-angle statistics. Route r1 is
the interesting one: fewer intersections but more alternatives per
intersection, and its dead end sits at an intersection instead of
mid-block.
"""

from navkit.fixtures import gen_replica_routes
from navkit.route import route_metrics

routes = gen_replica_routes()

header = f"{'':24}" + "".join(f"{rid:>14}" for rid in routes)
print(header)
print("-" * len(header))

rows = [
    ("distance (m)", lambda m: f"{m.distance_m:.0f}"),
    ("intersections", lambda m: f"{m.n_intersections}"),
    ("turns", lambda m: f"{m.n_turns}"),
    ("alt paths (mean)", lambda m: f"{m.mean_alt_paths:.2f}"),
    ("alt paths (sd)", lambda m: f"{m.sd_alt_paths:.2f}"),
    ("turn angle (mean)", lambda m: f"{m.mean_turn_angle_deg:.2f}"),
    ("turn angle (sd)", lambda m: f"{m.sd_turn_angle_deg:.2f}"),
]

metrics = {rid: route_metrics(r) for rid, r in routes.items()}
for label, fmt in rows:
    print(f"{label:24}" + "".join(f"{fmt(metrics[rid]):>14}" for rid in routes))

print()
for rid, route in routes.items():
    where = "at an intersection" if rid == "r1" else "mid-block"
    print(f"{rid}: dead end {where}, "
          f"{len(route.steps)} steps, {len(route.pois)} POIs "
          f"({', '.join(name for name, _ in route.pois)})")
