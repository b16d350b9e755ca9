#!/usr/bin/env python3
"""What the walker hears, side by side.

Takes a handful of situations along route r1 and shows the provider-style
cardinal phrasing next to the landmark-anchored egocentric phrasing the
instruction mock produces, including the wrong-facing correction and the
left/right consistency check on the reported bounding box.
"""

from dataclasses import replace

from navkit.fixtures import gen_landmark_db, gen_replica_routes
from navkit.geo import HeadingDeg, bearing_deg, distance_m, signed_delta
from navkit.instructor import baseline_instruction, synthesize_mock, validate_side
from navkit.prompting import ContextPacket
from navkit.tracking import PoseSample, Tracker

route = gen_replica_routes()["r1"]
db = gen_landmark_db(route)
waypoints = route.turn_waypoints()


def packet_at(waypoint_index, back_m, heading_offset=0.0):
    """A context packet standing back_m before the waypoint on its bearing."""
    target, _, step_i = waypoints[waypoint_index]
    prev = waypoints[waypoint_index - 1][0] if waypoint_index else route.origin
    approach = bearing_deg(prev, target)
    import math
    from navkit.geo import project_local, unproject_local
    px, py = project_local(route.origin, target)
    h = math.radians(approach.value)
    pos = unproject_local(route.origin, px - back_m * math.sin(h), py - back_m * math.cos(h))
    heading = HeadingDeg(approach.value + heading_offset)
    return ContextPacket(
        image_ref="", pos=pos, heading=heading,
        delta_to_turn=signed_delta(heading, bearing_deg(pos, target)),
        dist_to_turn_m=distance_m(pos, target),
        step=route.steps[step_i], waypoint_index=waypoint_index,
    )


scenes = [
    ("25 m before the first turn", packet_at(0, 25.0)),
    ("25 m before a later turn", packet_at(5, 25.0)),
    ("same spot, facing 60 deg off", packet_at(5, 25.0, heading_offset=-60.0)),
    ("75 m out (too far to turn yet)", packet_at(6, 75.0)),
    ("approaching the turnaround", packet_at(3, 20.0)),
]

for label, packet in scenes:
    base = baseline_instruction(packet)
    mock = synthesize_mock(packet, db)
    verdict, checked = validate_side(mock)
    print(f"{label}:")
    print(f"  provider : {base.utterance}")
    print(f"  landmark : {checked.utterance}  [side check: {verdict}]")
    print()

print("injected left/right reversal and its correction:")
mock = synthesize_mock(packet_at(5, 25.0), db)
if mock.landmark_side in ("left", "right"):
    wrong_side = "right" if mock.landmark_side == "left" else "left"
    broken = replace(
        mock,
        landmark_side=wrong_side,
        utterance=mock.utterance.replace(f"on your {mock.landmark_side}",
                                         f"on your {wrong_side}"),
    )
    verdict, fixed = validate_side(broken)
    print(f"  model said : {broken.utterance}")
    print(f"  bbox center x = {(broken.bbox[0] + broken.bbox[2]) / 2:.2f} -> {verdict}")
    print(f"  delivered  : {fixed.utterance}")
