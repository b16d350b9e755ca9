# Replica route, graph, and landmark fixtures.
#
# The three routes are synthetic, laid out on a flat local patch near
# (37.42, -122.08). Their aggregate characteristics (length, intersection
# count, turn count, alternative-path and turn-angle means/sds) are the
# binding contract; the street geometry itself is invented. Alternative
# and angle multisets were found by moment matching:
#   r1 alternatives {2,2,2,2,3,3,3,4,4}  -> 2.78 +/- 0.83
#   r2 alternatives {2 x5, 3 x5}         -> 2.50 +/- 0.53
#   r3 alternatives {2 x7, 3 x2, 4 x1}   -> 2.40 +/- 0.70
# Angle lists are symmetric pairs about the target mean on a 0.01-degree
# grid. Generation is fully deterministic (no rng).

from __future__ import annotations

import json
import math
import os

from .geo import GeoPoint, bearing_deg, normalize_heading, unproject_local
from .instructor import Landmark
from .route import Route, load_route

R1_BASE = GeoPoint(37.4200, -122.0800)
R2_BASE = GeoPoint(37.4230, -122.0760)
R3_BASE = GeoPoint(37.4170, -122.0745)

# turn-angle multisets matched to the published per-route means/sds
R1_ANGLES = [87.28, 77.28, 97.28, 106.44, 57.28, 47.28, 28.12, 37.28]
R2_ANGLES = [92.97, 86.97, 79.97, 93.85, 72.97, 56.97, 36.09, 49.97, 42.97, 36.97]
R3_ANGLES = [85.65, 92.65, 88.65, 95.65, 75.65, 72.65, 97.22, 68.65, 64.08, 65.65]

_UNIQUE_NAMES = [
    "fountain", "stairs", "bank sign", "silver sculpture", "clock tower",
    "red awning", "glass arches", "ticket booth", "mosaic wall",
    "bronze statue", "flower stall", "neon sign",
]
_COMMON_NAMES = [
    "bus shelter", "trash can", "bench", "lamppost",
    "mailbox", "bike rack", "fire hydrant", "planter box",
]


class _Turtle:
    """Flat-patch path builder: walk legs, record vertices and maneuvers."""

    def __init__(self):
        self.x = 0.0
        self.y = 0.0
        self.heading = 0.0  # degrees, 0 = local north
        self.vertices = [(0.0, 0.0)]
        # (vertex_index, maneuver) in route order; 'straight' marks
        # pass-through/bend vertices that do not end a step
        self.marks = []

    def walk(self, length_m: float):
        h = math.radians(self.heading)
        self.x += length_m * math.sin(h)
        self.y += length_m * math.cos(h)
        self.vertices.append((self.x, self.y))

    def mark(self, maneuver: str, turn_to: float | None = None):
        self.marks.append((len(self.vertices) - 1, maneuver))
        if turn_to is not None:
            self.heading = normalize_heading(turn_to)

    def right(self):
        self.mark("turn-right", self.heading + 90.0)

    def left(self):
        self.mark("turn-left", self.heading - 90.0)

    def u_turn(self):
        self.mark("u-turn", self.heading + 180.0)

    def bend(self, delta_deg: float):
        self.marks.append((len(self.vertices) - 1, "straight"))
        self.heading = normalize_heading(self.heading + delta_deg)


def _route_document(route_id: str, base: GeoPoint, turtle: _Turtle,
                    poi_names: list[str], poi_vertices: list[int],
                    instructions: list[str]) -> dict:
    """Assemble the route-file JSON for a finished turtle walk."""
    pts = [unproject_local(base, x, y) for x, y in turtle.vertices]

    steps = []
    dead_end_index = None
    start_vi = 0
    step_i = 0
    for vi, maneuver in turtle.marks:
        if maneuver == "straight":
            continue  # bend or pass-through: no step boundary
        dist = 0.0
        for k in range(start_vi, vi):
            ax, ay = turtle.vertices[k]
            bx, by = turtle.vertices[k + 1]
            dist += math.hypot(bx - ax, by - ay)
        steps.append(
            {
                "instruction": instructions[step_i],
                "start": [pts[start_vi].lat_deg, pts[start_vi].lon_deg],
                "end": [pts[vi].lat_deg, pts[vi].lon_deg],
                "distance_m": dist,
                "maneuver": maneuver,
            }
        )
        if maneuver == "u-turn":
            dead_end_index = len(steps) - 1
        start_vi = vi
        step_i += 1

    return {
        "id": route_id,
        "polyline": [[p.lat_deg, p.lon_deg] for p in pts],
        "steps": steps,
        "pois": [
            {"name": name, "lat": pts[vi].lat_deg, "lon": pts[vi].lon_deg}
            for name, vi in zip(poi_names, poi_vertices)
        ],
        "dead_end_index": dead_end_index,
    }


def _graph_section(base: GeoPoint, nodes_xy: list[tuple[float, float]],
                   edges: list[tuple[int, int]],
                   on_route: list[tuple[int, int, float]]) -> dict:
    pts = [unproject_local(base, x, y) for x, y in nodes_xy]
    return {
        "nodes": [[p.lat_deg, p.lon_deg] for p in pts],
        "edges": [list(e) for e in edges],
        "on_route": [
            {"node": n, "alternatives": alt, "turn_angle_deg": ang}
            for n, alt, ang in on_route
        ],
    }


def _r1_document() -> dict:
    t = _Turtle()
    t.walk(70); t.right()          # X1 (0,70)
    t.walk(60); t.left()           # X2 (60,70)
    t.walk(80); t.right()          # X3 (60,150)
    t.walk(50); t.bend(0.0)        # X4 (110,150) pass-through into the spur
    t.walk(45); t.u_turn()         # D  (155,150) dead end at an intersection
    t.walk(45); t.right()          # back at X4, continue north
    t.walk(70); t.left()           # X5 (110,220)
    t.walk(55); t.right()          # X6 (55,220)
    t.walk(60); t.right()          # X7 (55,280)
    t.walk(65); t.left()           # X8 (120,280)
    t.walk(50); t.mark("arrive")   # end (120,330)

    instructions = [
        "Walk 70 m, then turn right",
        "Walk 60 m, then turn left",
        "Walk 80 m, then turn right",
        "Walk 95 m to the closed end, then turn around",
        "Walk 45 m back, then turn right",
        "Walk 70 m, then turn left",
        "Walk 55 m, then turn right",
        "Walk 60 m, then turn right",
        "Walk 65 m, then turn left",
        "Walk 50 m to arrive",
    ]
    doc = _route_document(
        "r1", R1_BASE, t,
        ["Corner Cafe", "Fountain Plaza", "Old Library", "Market Hall", "Garden Gate"],
        [0, 2, 7, 9, 11],
        instructions,
    )

    # on-route intersections 0..8 = X1..X8, D; then endpoints and stubs
    nodes = [
        (0, 70), (60, 70), (60, 150), (110, 150), (155, 150),   # X1..X4, D
        (110, 220), (55, 220), (55, 280), (120, 280),           # X5..X8
        (0, 0), (120, 330),                                     # start, end
        (-45, 70),                                              # 11 X1 W
        (105, 25),                                              # 12 X2 S
        (60, 195), (15, 150),                                   # 13,14 X3 N,W
        (110, 105),                                             # 15 X4 S
        (155, 220),                                             # 16 X5 E
        (10, 220),                                              # 17 X6 W
        (55, 325), (10, 280),                                   # 18,19 X7 N,W
        (165, 280), (120, 235), (152, 312),                     # 20-22 X8 E,S,NE
        (155, 195), (155, 105), (200, 150), (187, 182),         # 23-26 D N,S,E,NE
    ]
    edges = [
        (9, 0), (0, 1), (1, 2), (2, 3), (3, 4), (3, 5), (5, 6), (6, 7), (7, 8), (8, 10),
        (0, 11), (1, 12), (2, 13), (2, 14), (3, 15), (5, 16), (6, 17),
        (7, 18), (7, 19), (8, 20), (8, 21), (8, 22),
        (4, 23), (4, 24), (4, 25), (4, 26),
    ]
    on_route = [
        (0, 2, R1_ANGLES[0]), (1, 2, R1_ANGLES[1]), (2, 3, R1_ANGLES[2]),
        (3, 3, R1_ANGLES[3]), (4, 4, 180.0),
        (5, 2, R1_ANGLES[4]), (6, 2, R1_ANGLES[5]), (7, 3, R1_ANGLES[6]),
        (8, 4, R1_ANGLES[7]),
    ]
    doc["graph"] = _graph_section(R1_BASE, nodes, edges, on_route)
    return doc


def _r2_document() -> dict:
    t = _Turtle()
    t.walk(50); t.right()          # Y1 (0,50)
    t.walk(45); t.left()           # Y2 (45,50)
    t.walk(55); t.right()          # Y3 (45,105)
    t.walk(45); t.bend(0.0)        # Y4 (90,105) pass-through into the spur
    t.walk(30); t.u_turn()         # T (120,105) mid-block dead end
    t.walk(30); t.right()          # back at Y4, continue north
    t.walk(50); t.left()           # Y5 (90,155)
    t.walk(45); t.right()          # Y6 (45,155)
    t.walk(45); t.bend(36.09)      # Y7 (45,200): street bends, no maneuver
    t.walk(40); t.right()          # Y8
    t.walk(35); t.left()           # Y9
    t.walk(35); t.right()          # Y10
    t.walk(45); t.mark("arrive")   # end

    instructions = [
        "Walk 50 m, then turn right",
        "Walk 45 m, then turn left",
        "Walk 55 m, then turn right",
        "Walk 75 m to the closed end, then turn around",
        "Walk 30 m back, then turn right",
        "Walk 50 m, then turn left",
        "Walk 45 m, then turn right",
        "Follow the curving street 85 m, then turn right",
        "Walk 35 m, then turn left",
        "Walk 35 m, then turn right",
        "Walk 45 m to arrive",
    ]
    doc = _route_document(
        "r2", R2_BASE, t,
        ["Transit Shelter", "Book Kiosk", "Clock Tower Court", "Rose Courtyard", "Brick Archway"],
        [0, 3, 8, 11, 13],
        instructions,
    )

    v = t.vertices
    y8, y9, y10 = v[10], v[11], v[12]
    nodes = [
        (0, 50), (45, 50), (45, 105), (90, 105),                # Y1..Y4
        (90, 155), (45, 155), (45, 200), y8, y9, y10,           # Y5..Y10
        (120, 105),                                             # 10 T
        (0, 0), v[13],                                          # 11 start, 12 end
        (-40, 50),                                              # 13 Y1 W
        (90, 50),                                               # 14 Y2 E
        (5, 105), (45, 145),                                    # 15,16 Y3 W,N
        (90, 65),                                               # 17 Y4 S
        (90, 195), (130, 155),                                  # 18,19 Y5 N,E
        (5, 155),                                               # 20 Y6 W
        (5, 200),                                               # 21 Y7 W
        (y8[0], y8[1] + 40), (y8[0] - 40, y8[1]),               # 22,23 Y8 N,W
        (y9[0], y9[1] - 40),                                    # 24 Y9 S
        (y10[0], y10[1] + 40), (y10[0] + 40, y10[1]),           # 25,26 Y10 N,E
    ]
    edges = [
        (11, 0), (0, 1), (1, 2), (2, 3), (3, 10), (3, 4), (4, 5), (5, 6),
        (6, 7), (7, 8), (8, 9), (9, 12),
        (0, 13), (1, 14), (2, 15), (2, 16), (3, 17), (4, 18), (4, 19),
        (5, 20), (6, 21), (7, 22), (7, 23), (8, 24), (9, 25), (9, 26),
    ]
    on_route = [
        (0, 2, R2_ANGLES[0]), (1, 2, R2_ANGLES[1]), (2, 3, R2_ANGLES[2]),
        (3, 3, R2_ANGLES[3]), (4, 3, R2_ANGLES[4]), (5, 2, R2_ANGLES[5]),
        (6, 2, R2_ANGLES[6]), (7, 3, R2_ANGLES[7]), (8, 2, R2_ANGLES[8]),
        (9, 3, R2_ANGLES[9]),
    ]
    doc["graph"] = _graph_section(R2_BASE, nodes, edges, on_route)
    return doc


def _r3_document() -> dict:
    t = _Turtle()
    t.walk(60); t.right()          # Z1 (0,60)
    t.walk(45); t.left()           # Z2 (45,60)
    t.walk(50); t.right()          # Z3 (45,110)
    t.walk(45); t.bend(0.0)        # Z4 (90,110) pass-through into the spur
    t.walk(30); t.u_turn()         # T (120,110) mid-block dead end
    t.walk(30); t.right()          # back at Z4, continue north
    t.walk(45); t.left()           # Z5 (90,155)
    t.walk(45); t.right()          # Z6 (45,155)
    t.walk(45); t.right()          # Z7 (45,200)
    t.walk(40); t.left()           # Z8 (85,200)
    t.walk(50); t.right()          # Z9 (85,250)
    t.walk(50); t.left()           # Z10 (135,250)
    t.walk(65); t.mark("arrive")   # end (135,315)

    instructions = [
        "Walk 60 m, then turn right",
        "Walk 45 m, then turn left",
        "Walk 50 m, then turn right",
        "Walk 75 m to the closed end, then turn around",
        "Walk 30 m back, then turn right",
        "Walk 45 m, then turn left",
        "Walk 45 m, then turn right",
        "Walk 45 m, then turn right",
        "Walk 40 m, then turn left",
        "Walk 50 m, then turn right",
        "Walk 50 m, then turn left",
        "Walk 65 m to arrive",
    ]
    doc = _route_document(
        "r3", R3_BASE, t,
        ["Bakery Door", "Mural Wall", "Stone Bridge", "Glass Atrium", "Harbor Steps"],
        [0, 2, 8, 11, 13],
        instructions,
    )

    nodes = [
        (0, 60), (45, 60), (45, 110), (90, 110),                # Z1..Z4
        (90, 155), (45, 155), (45, 200), (85, 200),             # Z5..Z8
        (85, 250), (135, 250),                                  # Z9, Z10
        (120, 110),                                             # 10 T
        (0, 0), (135, 315),                                     # 11 start, 12 end
        (-40, 60), (0, 100),                                    # 13,14 Z1 W,N
        (45, 20),                                               # 15 Z2 S
        (5, 110),                                               # 16 Z3 W
        (90, 70),                                               # 17 Z4 S
        (130, 155),                                             # 18 Z5 E
        (5, 155),                                               # 19 Z6 W
        (5, 200),                                               # 20 Z7 W
        (125, 200),                                             # 21 Z8 E
        (85, 290), (45, 250), (115, 290),                       # 22-24 Z9 N,W,NE
        (175, 250),                                             # 25 Z10 E
    ]
    edges = [
        (11, 0), (0, 1), (1, 2), (2, 3), (3, 10), (3, 4), (4, 5), (5, 6),
        (6, 7), (7, 8), (8, 9), (9, 12),
        (0, 13), (0, 14), (1, 15), (2, 16), (3, 17), (4, 18), (5, 19),
        (6, 20), (7, 21), (8, 22), (8, 23), (8, 24), (9, 25),
    ]
    on_route = [
        (0, 3, R3_ANGLES[0]), (1, 2, R3_ANGLES[1]), (2, 2, R3_ANGLES[2]),
        (3, 3, R3_ANGLES[3]), (4, 2, R3_ANGLES[4]), (5, 2, R3_ANGLES[5]),
        (6, 2, R3_ANGLES[6]), (7, 2, R3_ANGLES[7]), (8, 4, R3_ANGLES[8]),
        (9, 2, R3_ANGLES[9]),
    ]
    doc["graph"] = _graph_section(R3_BASE, nodes, edges, on_route)
    return doc


def gen_replica_routes() -> dict[str, Route]:
    """Build the three replica routes as validated Route objects."""
    return {
        "r1": load_route(_r1_document()),
        "r2": load_route(_r2_document()),
        "r3": load_route(_r3_document()),
    }


def gen_landmark_db(route: Route) -> list[Landmark]:
    """Deterministic landmark set for a route.

    Every left/right turn waypoint gets three landmarks on its approach
    with mixed uniqueness (one singular, one middling, one generic tree).
    The dead-end turnaround deliberately gets only generic trees: route
    users reported unique landmarks as helpful and common ones as
    confusing, and the dead end is where that ambiguity bites.
    """
    landmarks: list[Landmark] = []
    waypoints = route.turn_waypoints()
    origin = route.polyline[0]

    # polyline vertex index for each waypoint, honoring revisited vertices
    cursor = 0
    wp_vertex: list[int] = []
    from .geo import distance_m as _dist
    for point, _, _ in waypoints:
        for i in range(cursor, len(route.polyline)):
            if _dist(route.polyline[i], point) < 0.5:
                wp_vertex.append(i)
                cursor = i + 1
                break
        else:
            raise ValueError(f"waypoint {point} not found on polyline")

    uniq_i = 0
    common_i = 0
    tree_n = 0
    for (point, maneuver, _), vi in zip(waypoints, wp_vertex):
        approach = bearing_deg(route.polyline[vi - 1], route.polyline[vi]).value

        def place(back_m: float, side_m: float, tag: float = approach):
            h = math.radians(tag)
            fx = math.sin(h) * -back_m
            fy = math.cos(h) * -back_m
            hp = math.radians(normalize_heading(tag + 90.0))
            sx = math.sin(hp) * side_m
            sy = math.cos(hp) * side_m
            from .geo import project_local
            px, py = project_local(origin, point)
            return unproject_local(origin, px + fx + sx, py + fy + sy)

        if maneuver == "u-turn":
            for back, side in ((5.0, 8.0), (10.0, -10.0), (-6.0, 6.0)):
                landmarks.append(
                    Landmark(name="tree", pos=place(back, side), uniqueness=0.2,
                             tags=("vegetation",))
                )
                tree_n += 1
        elif maneuver == "arrive":
            landmarks.append(
                Landmark(name="red door", pos=place(4.0, 6.0), uniqueness=0.9,
                         tags=("destination",))
            )
        else:
            side_sign = -1.0 if maneuver == "turn-left" else 1.0
            landmarks.append(
                Landmark(name=_UNIQUE_NAMES[uniq_i % len(_UNIQUE_NAMES)],
                         pos=place(5.0, 8.0 * side_sign), uniqueness=0.9,
                         tags=("singular",))
            )
            uniq_i += 1
            landmarks.append(
                Landmark(name=_COMMON_NAMES[common_i % len(_COMMON_NAMES)],
                         pos=place(10.0, -12.0 * side_sign), uniqueness=0.5,
                         tags=("street",))
            )
            common_i += 1
            landmarks.append(
                Landmark(name="tree", pos=place(18.0, 14.0 * side_sign), uniqueness=0.2,
                         tags=("vegetation",))
            )
            tree_n += 1
    return landmarks


def landmarks_to_document(landmarks: list[Landmark]) -> list[dict]:
    return [
        {
            "name": lm.name,
            "lat": lm.pos.lat_deg,
            "lon": lm.pos.lon_deg,
            "uniqueness": lm.uniqueness,
            "tags": list(lm.tags),
        }
        for lm in landmarks
    ]


def write_replica_fixtures(out_dir: str) -> list[str]:
    """Write r1/r2/r3 route files plus per-route landmark databases."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for route_id, doc_fn in (("r1", _r1_document), ("r2", _r2_document), ("r3", _r3_document)):
        doc = doc_fn()
        path = os.path.join(out_dir, f"{route_id}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)

        route = load_route(doc)
        lm_path = os.path.join(out_dir, f"landmarks_{route_id}.json")
        with open(lm_path, "w") as fh:
            json.dump(landmarks_to_document(gen_landmark_db(route)), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(lm_path)
    return written
