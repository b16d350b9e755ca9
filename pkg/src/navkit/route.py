# Route data model, route-file ingestion, directions-client adapters, and
# per-route complexity metrics (intersection counts, alternative paths,
# turn angles).

from __future__ import annotations

import json
import math
import os
import statistics
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import requests

from .geo import GeoPoint, HeadingDeg, bearing_deg, distance_m, project_local

MANEUVERS = ("turn-left", "turn-right", "straight", "u-turn", "arrive")
TURN_MANEUVERS = ("turn-left", "turn-right")
# Maneuvers whose endpoint the tracker and beacon target in sequence.
WAYPOINT_MANEUVERS = ("turn-left", "turn-right", "u-turn", "arrive")

# Step chains and polyline membership are validated to well under GPS noise.
_CONTINUITY_TOL_M = 0.5

DIRECTIONS_URL_ENV = "NAV_DIRECTIONS_URL"
DIRECTIONS_KEY_ENV = "NAV_DIRECTIONS_KEY"


class RouteError(ValueError):
    pass


class SchemaError(RouteError):
    """Route document is missing or mistypes a required field."""


class ContinuityError(RouteError):
    """Consecutive steps do not chain end-to-start."""


class DeadEndError(RouteError):
    """dead_end_index does not point at a u-turn step."""


class CoverageError(RouteError):
    """An on-route intersection has no graph data."""


class TransportError(RouteError):
    """Directions provider could not be reached."""


class ProviderSchemaError(RouteError):
    """Directions provider returned an unusable payload."""


@dataclass(frozen=True)
class Step:
    """One walking leg. The maneuver is performed at the step's end point."""

    instruction_text: str
    start: GeoPoint
    end: GeoPoint
    distance_m: float
    maneuver: str

    def __post_init__(self):
        if self.maneuver not in MANEUVERS:
            raise SchemaError(f"unknown maneuver {self.maneuver!r}")
        if not self.distance_m > 0:
            raise SchemaError(f"step distance must be positive, got {self.distance_m}")


@dataclass(frozen=True)
class OnRouteNode:
    """Graph annotation for one intersection the route traverses."""

    node_index: int
    alternatives: int
    turn_angle_deg: float

    def __post_init__(self):
        if self.alternatives < 1:
            raise SchemaError("on-route intersection must offer at least one alternative")
        if not 0.0 <= self.turn_angle_deg <= 180.0:
            raise SchemaError(f"turn angle {self.turn_angle_deg} outside [0, 180]")


@dataclass(frozen=True)
class IntersectionGraph:
    """Street graph covering a route: nodes, edges, and on-route annotations."""

    nodes: tuple[GeoPoint, ...]
    edges: tuple[tuple[int, int], ...]
    on_route: tuple[OnRouteNode, ...]

    def degree(self, node_index: int) -> int:
        return sum(1 for a, b in self.edges if node_index in (a, b))

    def neighbors(self, node_index: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == node_index:
                out.append(b)
            elif b == node_index:
                out.append(a)
        return out


@dataclass(frozen=True)
class Route:
    """An ordered walking route with POIs and an optional dead-end marker."""

    id: str
    steps: tuple[Step, ...]
    pois: tuple[tuple[str, GeoPoint], ...]
    polyline: tuple[GeoPoint, ...]
    dead_end_index: Optional[int] = None
    graph: Optional[IntersectionGraph] = None

    def turn_waypoints(self) -> list[tuple[GeoPoint, str, int]]:
        """Maneuver targets in route order as (point, maneuver, step_index)."""
        cached = self.__dict__.get("_turn_waypoints")
        if cached is None:
            cached = [
                (s.end, s.maneuver, i)
                for i, s in enumerate(self.steps)
                if s.maneuver in WAYPOINT_MANEUVERS
            ]
            self.__dict__["_turn_waypoints"] = cached
        return cached

    def length_m(self) -> float:
        return sum(
            distance_m(self.polyline[i], self.polyline[i + 1])
            for i in range(len(self.polyline) - 1)
        )

    @property
    def origin(self) -> GeoPoint:
        return self.polyline[0]

    @property
    def destination(self) -> GeoPoint:
        return self.polyline[-1]

    def dead_end_point(self) -> Optional[GeoPoint]:
        """The u-turn turnaround point, when the route has one."""
        if self.dead_end_index is None:
            return None
        return self.steps[self.dead_end_index].end


@dataclass(frozen=True)
class RouteMetrics:
    distance_m: float
    n_intersections: int
    mean_alt_paths: float
    sd_alt_paths: float
    mean_turn_angle_deg: float
    sd_turn_angle_deg: float
    n_turns: int


def _parse_point(obj, what: str) -> GeoPoint:
    try:
        if isinstance(obj, dict):
            return GeoPoint(float(obj["lat"]), float(obj["lon"]))
        lat, lon = obj
        return GeoPoint(float(lat), float(lon))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad {what}: {obj!r}") from exc


def _require(doc: dict, key: str, what: str = "route document"):
    if key not in doc:
        raise SchemaError(f"{what} missing field {key!r}")
    return doc[key]


def parse_graph(doc: dict) -> IntersectionGraph:
    nodes = tuple(_parse_point(n, "graph node") for n in _require(doc, "nodes", "graph"))
    edges = []
    for e in _require(doc, "edges", "graph"):
        a, b = int(e[0]), int(e[1])
        if not (0 <= a < len(nodes) and 0 <= b < len(nodes)):
            raise SchemaError(f"edge {e!r} references unknown node")
        edges.append((a, b))
    on_route = tuple(
        OnRouteNode(int(_require(r, "node", "on_route entry")),
                    int(_require(r, "alternatives", "on_route entry")),
                    float(_require(r, "turn_angle_deg", "on_route entry")))
        for r in _require(doc, "on_route", "graph")
    )
    for entry in on_route:
        if not 0 <= entry.node_index < len(nodes):
            raise SchemaError(f"on_route entry references unknown node {entry.node_index}")
    return IntersectionGraph(nodes, tuple(edges), on_route)


def load_route(document: bytes | str | dict) -> Route:
    """Parse and validate a route file.

    Raises:
        SchemaError: required field missing or malformed.
        ContinuityError: consecutive steps do not chain.
        DeadEndError: dead_end_index does not point at a u-turn.
    """
    if isinstance(document, (bytes, str)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"route document is not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("route document must be a JSON object")

    route_id = str(_require(doc, "id"))
    polyline = tuple(_parse_point(p, "polyline point") for p in _require(doc, "polyline"))
    if len(polyline) < 2:
        raise SchemaError("polyline needs at least two points")

    steps = []
    for raw in _require(doc, "steps"):
        steps.append(
            Step(
                instruction_text=str(_require(raw, "instruction", "step")),
                start=_parse_point(_require(raw, "start", "step"), "step start"),
                end=_parse_point(_require(raw, "end", "step"), "step end"),
                distance_m=float(_require(raw, "distance_m", "step")),
                maneuver=str(_require(raw, "maneuver", "step")),
            )
        )
    if not steps:
        raise SchemaError("route needs at least one step")

    for i in range(len(steps) - 1):
        gap = distance_m(steps[i].end, steps[i + 1].start)
        if gap > _CONTINUITY_TOL_M:
            raise ContinuityError(
                f"step {i} ends {gap:.1f} m away from step {i + 1} start"
            )

    for s in steps:
        for p, what in ((s.start, "start"), (s.end, "end")):
            if min(distance_m(p, v) for v in polyline) > _CONTINUITY_TOL_M:
                raise ContinuityError(f"step {what} {p} not on the polyline")

    dead_end_index = doc.get("dead_end_index")
    if dead_end_index is not None:
        dead_end_index = int(dead_end_index)
        if not 0 <= dead_end_index < len(steps):
            raise DeadEndError(f"dead_end_index {dead_end_index} out of range")
        if steps[dead_end_index].maneuver != "u-turn":
            raise DeadEndError(
                f"dead_end_index step has maneuver {steps[dead_end_index].maneuver!r}, expected u-turn"
            )

    pois = tuple(
        (str(_require(p, "name", "poi")), _parse_point(p, "poi"))
        for p in _require(doc, "pois")
    )

    graph = parse_graph(doc["graph"]) if doc.get("graph") else None

    return Route(
        id=route_id,
        steps=tuple(steps),
        pois=pois,
        polyline=polyline,
        dead_end_index=dead_end_index,
        graph=graph,
    )


def route_to_document(route: Route) -> dict:
    """Serialize a Route back to the route-file JSON layout."""
    doc = {
        "id": route.id,
        "polyline": [[p.lat_deg, p.lon_deg] for p in route.polyline],
        "steps": [
            {
                "instruction": s.instruction_text,
                "start": [s.start.lat_deg, s.start.lon_deg],
                "end": [s.end.lat_deg, s.end.lon_deg],
                "distance_m": s.distance_m,
                "maneuver": s.maneuver,
            }
            for s in route.steps
        ],
        "pois": [{"name": n, "lat": p.lat_deg, "lon": p.lon_deg} for n, p in route.pois],
        "dead_end_index": route.dead_end_index,
    }
    if route.graph is not None:
        doc["graph"] = {
            "nodes": [[p.lat_deg, p.lon_deg] for p in route.graph.nodes],
            "edges": [list(e) for e in route.graph.edges],
            "on_route": [
                {
                    "node": r.node_index,
                    "alternatives": r.alternatives,
                    "turn_angle_deg": r.turn_angle_deg,
                }
                for r in route.graph.on_route
            ],
        }
    return doc


class DirectionsClient(Protocol):
    def get_directions(self, waypoints: Sequence[GeoPoint]) -> dict: ...


class OfflineDirectionsClient:
    """Serves route documents from a directory of fixture files.

    Looks for <id>.json by matching waypoints against each fixture's POIs;
    with a forced id it returns that fixture regardless of waypoints.
    """

    def __init__(self, fixtures_dir: str, route_id: Optional[str] = None):
        self.fixtures_dir = fixtures_dir
        self.route_id = route_id

    def get_directions(self, waypoints: Sequence[GeoPoint]) -> dict:
        if self.route_id is not None:
            path = os.path.join(self.fixtures_dir, f"{self.route_id}.json")
            if not os.path.exists(path):
                raise TransportError(f"no offline fixture {self.route_id!r} in {self.fixtures_dir}")
            with open(path, "rb") as fh:
                return json.load(fh)
        raise TransportError("offline client needs a fixture id")


class StubDirectionsClient:
    """Generates a minimal straight-leg route through the given waypoints."""

    def get_directions(self, waypoints: Sequence[GeoPoint]) -> dict:
        if len(waypoints) < 2:
            raise ProviderSchemaError("need at least two waypoints")
        steps = []
        for i in range(len(waypoints) - 1):
            a, b = waypoints[i], waypoints[i + 1]
            maneuver = "arrive" if i == len(waypoints) - 2 else "straight"
            steps.append(
                {
                    "instruction": f"Walk to waypoint {i + 1}",
                    "start": [a.lat_deg, a.lon_deg],
                    "end": [b.lat_deg, b.lon_deg],
                    "distance_m": distance_m(a, b),
                    "maneuver": maneuver,
                }
            )
        return {
            "id": "stub",
            "polyline": [[p.lat_deg, p.lon_deg] for p in waypoints],
            "steps": steps,
            "pois": [
                {"name": f"waypoint-{i}", "lat": p.lat_deg, "lon": p.lon_deg}
                for i, p in enumerate(waypoints)
            ],
            "dead_end_index": None,
        }


class HttpDirectionsClient:
    """Thin GET adapter for a remote directions endpoint."""

    def __init__(self, url: str, api_key: str = "", timeout_s: float = 10.0):
        self.url = url
        self.api_key = api_key
        self.timeout_s = timeout_s

    def get_directions(self, waypoints: Sequence[GeoPoint]) -> dict:
        params = {
            "waypoints": "|".join(f"{p.lat_deg},{p.lon_deg}" for p in waypoints),
            "key": self.api_key,
        }
        try:
            resp = requests.get(self.url, params=params, timeout=self.timeout_s)
            resp.raise_for_status()
            return resp.json()
        except requests.RequestException as exc:
            raise TransportError(f"directions request failed: {exc}") from exc
        except ValueError as exc:
            raise ProviderSchemaError(f"directions reply is not JSON: {exc}") from exc


def default_directions_client(fixtures_dir: str = "fixtures", route_id: Optional[str] = None) -> DirectionsClient:
    """HTTP client when NAV_DIRECTIONS_URL is set, offline fixtures otherwise."""
    url = os.environ.get(DIRECTIONS_URL_ENV)
    if url:
        return HttpDirectionsClient(url, os.environ.get(DIRECTIONS_KEY_ENV, ""))
    return OfflineDirectionsClient(fixtures_dir, route_id)


def fetch_directions(client: DirectionsClient, waypoints: Sequence[GeoPoint]) -> Route:
    """Query a directions provider and translate its reply into a Route.

    Raises:
        TransportError: provider unreachable.
        ProviderSchemaError: provider payload does not parse as a route.
    """
    payload = client.get_directions(waypoints)
    try:
        return load_route(payload)
    except RouteError as exc:
        if isinstance(exc, TransportError):
            raise
        raise ProviderSchemaError(f"provider payload invalid: {exc}") from exc


def nearest_on_route(route: Route, p: GeoPoint) -> tuple[float, int]:
    """Minimum distance from p to the route polyline.

    Returns (distance_m, segment_index); ties go to the lower index.
    """
    origin = route.polyline[0]
    px, py = project_local(origin, p)
    verts = [project_local(origin, v) for v in route.polyline]
    best_d = math.inf
    best_seg = 0
    for i in range(len(verts) - 1):
        d = math.sqrt(_point_segment_dist2((px, py), verts[i], verts[i + 1]))
        # micrometer tie window: projection round-trip jitter must not
        # steal a tie from the lower index
        if d < best_d - 1e-6:
            best_d = d
            best_seg = i
    return best_d, best_seg


def _point_segment_dist2(p: tuple[float, float], a: tuple[float, float], b: tuple[float, float]) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    abx, aby = bx - ax, by - ay
    ab2 = abx * abx + aby * aby
    if ab2 == 0.0:
        dx, dy = px - ax, py - ay
        return dx * dx + dy * dy
    t = ((px - ax) * abx + (py - ay) * aby) / ab2
    t = max(0.0, min(1.0, t))
    cx, cy = ax + t * abx, ay + t * aby
    dx, dy = px - cx, py - cy
    return dx * dx + dy * dy


def route_metrics(route: Route, graph: Optional[IntersectionGraph] = None) -> RouteMetrics:
    """Complexity metrics for a route over its intersection graph.

    Turn-angle statistics skip the intersection at the dead-end u-turn; the
    u-turn maneuver itself is not counted as a turn. Alternative-path counts
    cover every on-route intersection. Standard deviations are sample (n-1).

    Raises:
        CoverageError: no graph, or an on-route annotation is missing/off-route.
    """
    g = graph or route.graph
    if g is None or not g.on_route:
        raise CoverageError(f"route {route.id!r} has no intersection graph data")

    from .geo import OutOfPatch

    for entry in g.on_route:
        node = g.nodes[entry.node_index]
        try:
            d, _ = nearest_on_route(route, node)
        except OutOfPatch as exc:
            raise CoverageError(
                f"graph node {entry.node_index} is outside the route patch"
            ) from exc
        if d > 2.0:
            raise CoverageError(
                f"graph node {entry.node_index} is {d:.1f} m off the route polyline"
            )

    dead_end = route.dead_end_point()
    angles = []
    for entry in g.on_route:
        node = g.nodes[entry.node_index]
        if dead_end is not None and distance_m(node, dead_end) < 2.0:
            continue  # the 180-degree turnaround is excluded from angle stats
        angles.append(entry.turn_angle_deg)

    alts = [entry.alternatives for entry in g.on_route]
    n_turns = sum(1 for s in route.steps if s.maneuver in TURN_MANEUVERS)

    return RouteMetrics(
        distance_m=route.length_m(),
        n_intersections=len(g.on_route),
        mean_alt_paths=statistics.fmean(alts),
        sd_alt_paths=statistics.stdev(alts) if len(alts) > 1 else 0.0,
        mean_turn_angle_deg=statistics.fmean(angles) if angles else 0.0,
        sd_turn_angle_deg=statistics.stdev(angles) if len(angles) > 1 else 0.0,
        n_turns=n_turns,
    )


def step_initial_bearing(step: Step) -> HeadingDeg:
    """Bearing of a step taken as the straight line from start to end."""
    return bearing_deg(step.start, step.end)
