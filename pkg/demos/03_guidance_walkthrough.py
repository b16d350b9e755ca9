#!/usr/bin/env python3
"""One simulated walk, narrated.

Runs a single seeded walk on route r1 under the full system (landmark
instructions plus spatial beacon) and prints the guidance timeline:
prompts firing, instructions arriving after their sampled latency, the
beacon switching on and off, turns being reached, and any conductor
interventions.
"""

import sys

from navkit.engine import AI_SA
from navkit.fixtures import gen_landmark_db, gen_replica_routes
from navkit.simkit import AgentConfig, run_sim

condition = sys.argv[1] if len(sys.argv) > 1 else AI_SA
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 12

route = gen_replica_routes()["r1"]
db = gen_landmark_db(route)
record, events = run_sim(route, condition, AgentConfig(seed=seed),
                         landmark_db=db, pose_log_stride=0)

print(f"route r1, condition {condition}, seed {seed}\n")
for ev in events:
    t, kind, p = ev["t"], ev["kind"], ev["payload"]
    if kind == "prompt_fired":
        why = "stationary look-around" if p["scenario"] == 1 else "approaching the turn"
        print(f"{t:7.1f}s  prompt ({why}) for waypoint {p['waypoint_index']}")
    elif kind == "utterance":
        lat = f" after {p['latency_s']:.2f}s" if p["latency_s"] else ""
        print(f"{t:7.1f}s  \"{p['text']}\"{lat}")
    elif kind == "beacon_on":
        side = "right" if p["azimuth_deg"] > 0 else "left"
        print(f"{t:7.1f}s  beacon ON, waypoint {abs(p['azimuth_deg']):.0f} deg to the {side}")
    elif kind == "beacon_off":
        print(f"{t:7.1f}s  beacon off")
    elif kind == "turn_reached":
        print(f"{t:7.1f}s  reached waypoint {p['waypoint_index']} ({p['maneuver']})")
    elif kind == "deviation_start":
        print(f"{t:7.1f}s  ** off route ({p['off_route_m']:.1f} m): conductor steps in")
    elif kind == "deviation_end":
        print(f"{t:7.1f}s  ** back on route after {p['duration_s']:.1f}s "
              f"(peak {p['max_off_m']:.1f} m off)")

print(f"\nwalked {record.distance_walked_m:.0f} m "
      f"(route is {route.length_m():.0f} m), "
      f"{record.deviation_count} deviations, completed={record.completed}")
if record.pointing_errors_deg:
    errs = ", ".join(f"{e:.0f}" for e in record.pointing_errors_deg)
    print(f"pointing errors at the end: [{errs}] deg")
