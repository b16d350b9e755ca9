# World-tracking state machine: progress along the route, turn-reached
# detection, off-route deviation intervals, and walked-distance
# accumulation over smoothed GPS fixes.

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .geo import AngleDelta, GeoPoint, HeadingDeg, bearing_deg, project_local, signed_delta
from .route import Route


class TrackingError(ValueError):
    pass


class OutOfOrderSample(TrackingError):
    """Pose sample timestamp did not increase."""


class RouteComplete(TrackingError):
    """No turn waypoint remains."""


@dataclass(frozen=True)
class PoseSample:
    """One tracked fix: time since run start, position, facing, speed."""

    t: float
    pos: GeoPoint
    heading: HeadingDeg
    speed_mps: float = 0.0

    def __post_init__(self):
        if self.speed_mps < 0:
            raise TrackingError(f"negative speed {self.speed_mps}")


@dataclass(frozen=True)
class TrackerConfig:
    turn_reach_radius_m: float = 8.0
    deviation_threshold_m: float = 10.0
    rejoin_threshold_m: float = 10.0
    gps_smoothing_window: int = 5

    def __post_init__(self):
        if min(self.turn_reach_radius_m, self.deviation_threshold_m,
               self.rejoin_threshold_m) <= 0 or self.gps_smoothing_window < 1:
            raise TrackingError("tracker config values must be positive")
        if self.rejoin_threshold_m > self.deviation_threshold_m:
            raise TrackingError("rejoin threshold must not exceed deviation threshold")


@dataclass
class TrackerState:
    """Snapshot of tracking progress; value-copied outward."""

    current_waypoint_index: int = 0
    off_route: bool = False
    deviation_count: int = 0
    distance_walked_m: float = 0.0
    deviation_intervals: list[tuple[float, float, float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "current_waypoint_index": self.current_waypoint_index,
            "off_route": self.off_route,
            "deviation_count": self.deviation_count,
            "distance_walked_m": self.distance_walked_m,
            "deviation_intervals": [list(iv) for iv in self.deviation_intervals],
        }


@dataclass(frozen=True)
class TurnReached:
    t: float
    waypoint_index: int
    maneuver: str


@dataclass(frozen=True)
class DeviationStarted:
    t: float
    pos: GeoPoint
    off_route_m: float


@dataclass(frozen=True)
class DeviationEnded:
    t: float
    duration_s: float
    max_off_m: float


TrackerEvent = TurnReached | DeviationStarted | DeviationEnded


class Tracker:
    """Single-writer tracker for one session over one route.

    Feeding the same sample sequence into a fresh instance reproduces the
    same state exactly; there is no hidden clock or randomness.
    """

    def __init__(self, route: Route, cfg: TrackerConfig = TrackerConfig()):
        self.route = route
        self.cfg = cfg
        self.waypoints = route.turn_waypoints()
        self._origin = route.polyline[0]
        self._poly_xy = [project_local(self._origin, p) for p in route.polyline]
        self._wp_xy = [project_local(self._origin, p) for p, _, _ in self.waypoints]
        self._wp_segment = self._waypoint_segments()

        self._state = TrackerState()
        self._window: deque[tuple[float, float]] = deque(maxlen=cfg.gps_smoothing_window)
        self._last_t: Optional[float] = None
        self._last_smoothed: Optional[tuple[float, float]] = None
        self._progress_seg = 0
        self._open_deviation: Optional[tuple[float, float]] = None  # (t_start, max_off)

    def _waypoint_segments(self) -> list[int]:
        """Polyline segment index each waypoint sits at, walking forward."""
        out = []
        cursor = 0
        for wx, wy in [project_local(self._origin, p) for p, _, _ in self.waypoints]:
            for i in range(cursor, len(self._poly_xy)):
                px, py = self._poly_xy[i]
                if math.hypot(px - wx, py - wy) < 0.5:
                    out.append(max(0, i - 1))
                    cursor = i
                    break
            else:
                out.append(len(self._poly_xy) - 2)
        return out

    @property
    def state(self) -> TrackerState:
        s = self._state
        return TrackerState(
            current_waypoint_index=s.current_waypoint_index,
            off_route=s.off_route,
            deviation_count=s.deviation_count,
            distance_walked_m=s.distance_walked_m,
            deviation_intervals=list(s.deviation_intervals),
        )

    @property
    def complete(self) -> bool:
        return self._state.current_waypoint_index >= len(self.waypoints)

    def current_waypoint(self) -> tuple[GeoPoint, str, int]:
        if self.complete:
            raise RouteComplete(f"route {self.route.id!r} has no waypoint left")
        return self.waypoints[self._state.current_waypoint_index]

    def finalize(self, t: float) -> list[TrackerEvent]:
        """Close any open deviation interval at end of run."""
        if self._open_deviation is None:
            return []
        t0, max_off = self._open_deviation
        self._open_deviation = None
        self._state.off_route = False
        self._state.deviation_intervals.append((t0, t, max_off))
        self._state.deviation_count += 1
        return [DeviationEnded(t=t, duration_s=t - t0, max_off_m=max_off)]

    def ingest(self, sample: PoseSample) -> list[TrackerEvent]:
        """Advance the tracker by one pose sample.

        Raises:
            OutOfOrderSample: when sample.t does not strictly increase.
        """
        if self._last_t is not None and sample.t <= self._last_t:
            raise OutOfOrderSample(f"t {sample.t} after {self._last_t}")
        self._last_t = sample.t

        events: list[TrackerEvent] = []
        xy = project_local(self._origin, sample.pos)
        self._window.append(xy)
        sx = sum(p[0] for p in self._window) / len(self._window)
        sy = sum(p[1] for p in self._window) / len(self._window)

        if self._last_smoothed is not None:
            self._state.distance_walked_m += math.hypot(
                sx - self._last_smoothed[0], sy - self._last_smoothed[1]
            )
        self._last_smoothed = (sx, sy)

        events.extend(self._check_waypoints(sample.t, sx, sy))
        events.extend(self._check_deviation(sample.t, sample.pos, sx, sy))
        return events

    def _check_waypoints(self, t: float, sx: float, sy: float) -> list[TrackerEvent]:
        events: list[TrackerEvent] = []
        # several waypoints can fall inside the radius on short legs
        while not self.complete:
            idx = self._state.current_waypoint_index
            wx, wy = self._wp_xy[idx]
            reached = math.hypot(sx - wx, sy - wy) <= self.cfg.turn_reach_radius_m
            if not reached:
                # noise fallback: count the waypoint reached once the matched
                # route progress has clearly moved past its segment
                seg = self._windowed_segment(sx, sy)
                off = self._segment_distance(sx, sy, seg)
                reached = (
                    seg > self._wp_segment[idx]
                    and off <= self.cfg.deviation_threshold_m
                )
            if not reached:
                break
            _, maneuver, _ = self.waypoints[idx]
            self._state.current_waypoint_index += 1
            self._progress_seg = max(self._progress_seg, self._wp_segment[idx])
            events.append(TurnReached(t=t, waypoint_index=idx, maneuver=maneuver))
        return events

    def _windowed_segment(self, sx: float, sy: float) -> int:
        """Nearest polyline segment, searched forward of current progress.

        The spur out-and-back overlaps itself geometrically, so progress
        matching is restricted to a forward window instead of the global
        minimum the deviation check uses.
        """
        hi = len(self._poly_xy) - 1
        if not self.complete:
            # one segment past the current waypoint's, so passing it is visible
            hi = min(hi, self._wp_segment[self._state.current_waypoint_index] + 2)
        best, best_d = self._progress_seg, math.inf
        for i in range(self._progress_seg, hi):
            d = self._segment_distance(sx, sy, i)
            if d < best_d - 1e-9:
                best, best_d = i, d
        return best

    def _segment_distance(self, px: float, py: float, i: int) -> float:
        ax, ay = self._poly_xy[i]
        bx, by = self._poly_xy[i + 1]
        abx, aby = bx - ax, by - ay
        ab2 = abx * abx + aby * aby
        if ab2 == 0.0:
            return math.hypot(px - ax, py - ay)
        u = max(0.0, min(1.0, ((px - ax) * abx + (py - ay) * aby) / ab2))
        return math.hypot(px - (ax + u * abx), py - (ay + u * aby))

    def _min_route_distance(self, sx: float, sy: float, early_out: Optional[float]) -> float:
        """Distance to the nearest polyline segment.

        With early_out set, returns the first distance found at or below it
        (the exact minimum does not matter for a threshold test). The
        progress segment is tried first since it usually wins.
        """
        n = len(self._poly_xy) - 1
        best = self._segment_distance(sx, sy, min(self._progress_seg, n - 1))
        if early_out is not None and best <= early_out:
            return best
        for i in range(n):
            d = self._segment_distance(sx, sy, i)
            if d < best:
                best = d
                if early_out is not None and best <= early_out:
                    return best
        return best

    def _check_deviation(self, t: float, raw_pos: GeoPoint, sx: float, sy: float) -> list[TrackerEvent]:
        events: list[TrackerEvent] = []
        off = self._min_route_distance(
            sx, sy,
            self.cfg.deviation_threshold_m if self._open_deviation is None else None,
        )
        if self._open_deviation is None:
            if off > self.cfg.deviation_threshold_m:
                self._open_deviation = (t, off)
                self._state.off_route = True
                events.append(DeviationStarted(t=t, pos=raw_pos, off_route_m=off))
        else:
            t0, max_off = self._open_deviation
            max_off = max(max_off, off)
            if off <= self.cfg.rejoin_threshold_m:
                self._open_deviation = None
                self._state.off_route = False
                self._state.deviation_intervals.append((t0, t, max_off))
                self._state.deviation_count += 1
                events.append(DeviationEnded(t=t, duration_s=t - t0, max_off_m=max_off))
            else:
                self._open_deviation = (t0, max_off)
        return events

    def smoothed_position(self) -> Optional[GeoPoint]:
        if self._last_smoothed is None:
            return None
        from .geo import unproject_local

        return unproject_local(self._origin, *self._last_smoothed)

    def off_route_distance(self) -> float:
        if self._last_smoothed is None:
            return 0.0
        sx, sy = self._last_smoothed
        return self._min_route_distance(sx, sy, None)

    @property
    def state_view(self) -> TrackerState:
        """The live state object, for read-only hot paths; never mutate it."""
        return self._state


def facing_delta(sample: PoseSample, route: Route, state: TrackerState) -> AngleDelta:
    """Signed rotation from the walker's heading to the current waypoint bearing.

    Raises:
        RouteComplete: every waypoint has been consumed.
    """
    waypoints = route.turn_waypoints()
    if state.current_waypoint_index >= len(waypoints):
        raise RouteComplete(f"route {route.id!r} complete")
    target, _, _ = waypoints[state.current_waypoint_index]
    return signed_delta(sample.heading, bearing_deg(sample.pos, target))
