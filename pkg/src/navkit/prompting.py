# Prompt triggering and context-packet assembly: decides when the
# instruction model should be queried and gathers what it needs.

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .geo import AngleDelta, GeoPoint, HeadingDeg, distance_m, signed_delta
from .route import Route, Step
from .tracking import PoseSample, RouteComplete, TrackerState, facing_delta


@dataclass(frozen=True)
class PromptTriggerConfig:
    align_deg: float = 25.0
    proximity_m: float = 30.0
    stationary_speed_mps: float = 0.3
    stationary_window_s: float = 2.0
    look_around_min_sweep_deg: float = 40.0
    cooldown_s: float = 15.0
    per_waypoint_max: int = 2

    def __post_init__(self):
        vals = (self.align_deg, self.proximity_m, self.stationary_speed_mps,
                self.stationary_window_s, self.look_around_min_sweep_deg,
                self.cooldown_s, self.per_waypoint_max)
        if min(vals) <= 0:
            raise ValueError("prompt trigger config values must be positive")


@dataclass(frozen=True)
class ContextPacket:
    """Everything that accompanies one model query."""

    image_ref: str
    pos: GeoPoint
    heading: HeadingDeg
    delta_to_turn: AngleDelta
    dist_to_turn_m: float
    step: Step
    waypoint_index: int

    def __post_init__(self):
        if self.dist_to_turn_m < 0:
            raise ValueError(f"negative distance {self.dist_to_turn_m}")


@dataclass(frozen=True)
class TriggerFired:
    scenario: int  # 1 = stationary look-around, 2 = approaching the turn
    t: float
    waypoint_index: int


@dataclass(frozen=True)
class PromptState:
    """Replayable trigger memory: last firing time and per-waypoint counts."""

    last_fired_t: Optional[float] = None
    fired_counts: tuple[tuple[int, int], ...] = ()

    def count_for(self, waypoint_index: int) -> int:
        for wp, n in self.fired_counts:
            if wp == waypoint_index:
                return n
        return 0

    def bump(self, t: float, waypoint_index: int) -> "PromptState":
        counts = dict(self.fired_counts)
        counts[waypoint_index] = counts.get(waypoint_index, 0) + 1
        return PromptState(last_fired_t=t, fired_counts=tuple(sorted(counts.items())))


def heading_sweep_deg(samples: Sequence[PoseSample]) -> float:
    """Total heading range covered by a window, unwrapped across 0/360."""
    if len(samples) < 2:
        return 0.0
    cum = 0.0
    lo = hi = 0.0
    prev = samples[0].heading
    for s in samples[1:]:
        cum += signed_delta(prev, s.heading).value
        prev = s.heading
        lo = min(lo, cum)
        hi = max(hi, cum)
    return hi - lo


def step_trigger(
    state: PromptState,
    history: Sequence[PoseSample],
    tracker: TrackerState,
    route: Route,
    cfg: PromptTriggerConfig = PromptTriggerConfig(),
) -> tuple[PromptState, Optional[TriggerFired]]:
    """Decide whether to query the instructor at the newest sample.

    Scenario 1: stationary, looking around, and currently facing the turn
    waypoint within align_deg. Scenario 2: walking and within proximity_m
    of the turn waypoint. One trigger at most per call; firings respect
    the cooldown and the per-waypoint cap. Pure function of its inputs.

    Raises:
        RouteComplete: the tracker has consumed every waypoint.
    """
    if not history:
        return state, None
    now = history[-1]
    waypoints = route.turn_waypoints()
    wp_index = tracker.current_waypoint_index
    if wp_index >= len(waypoints):
        raise RouteComplete(f"route {route.id!r} complete")

    if state.last_fired_t is not None and now.t - state.last_fired_t < cfg.cooldown_s:
        return state, None
    if state.count_for(wp_index) >= cfg.per_waypoint_max:
        return state, None

    cutoff = now.t - cfg.stationary_window_s
    window = []
    for s in reversed(history):
        if s.t < cutoff:
            break
        window.append(s)
    window.reverse()
    mean_speed = sum(s.speed_mps for s in window) / len(window)
    # stationary means the whole window, not just its mean: one walking
    # sample anywhere in it disqualifies scenario 1
    stationary = (
        mean_speed < cfg.stationary_speed_mps
        and all(s.speed_mps < cfg.stationary_speed_mps for s in window)
    )

    if stationary:
        if (
            now.t - history[0].t >= cfg.stationary_window_s
            and heading_sweep_deg(window) >= cfg.look_around_min_sweep_deg
            and abs(facing_delta(now, route, tracker).value) <= cfg.align_deg
        ):
            return state.bump(now.t, wp_index), TriggerFired(1, now.t, wp_index)
        return state, None

    if now.speed_mps >= cfg.stationary_speed_mps:
        target, _, _ = waypoints[wp_index]
        if distance_m(now.pos, target) < cfg.proximity_m:
            return state.bump(now.t, wp_index), TriggerFired(2, now.t, wp_index)
    return state, None


def build_packet(
    sample: PoseSample,
    tracker: TrackerState,
    route: Route,
    image_ref: str = "",
) -> ContextPacket:
    """Assemble the model context for the current waypoint.

    In simulation there is no camera; image_ref stays empty and all
    metadata is still populated.

    Raises:
        RouteComplete: no waypoint remains.
    """
    waypoints = route.turn_waypoints()
    if tracker.current_waypoint_index >= len(waypoints):
        raise RouteComplete(f"route {route.id!r} complete")
    target, _, step_index = waypoints[tracker.current_waypoint_index]
    return ContextPacket(
        image_ref=image_ref,
        pos=sample.pos,
        heading=sample.heading,
        delta_to_turn=facing_delta(sample, route, tracker),
        dist_to_turn_m=distance_m(sample.pos, target),
        step=route.steps[step_index],
        waypoint_index=tracker.current_waypoint_index,
    )
