# Per-session guidance orchestration: one tracker, one beacon, prompt
# triggering, and condition-specific utterance scheduling. Both the
# simulator and the session server drive this engine one pose at a time.

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

from .beacon import BeaconConfig, BeaconState, step_beacon
from .geo import bearing_deg, distance_m, signed_delta
from .instructor import (
    InstructionResult,
    Landmark,
    SystemInstruction,
    baseline_instruction,
    synthesize_mock,
    validate_side,
)
from .metrics import make_event
from .prompting import PromptState, PromptTriggerConfig, build_packet, step_trigger
from .route import Route
from .tracking import (
    DeviationEnded,
    DeviationStarted,
    PoseSample,
    Tracker,
    TrackerConfig,
    TurnReached,
)

GMAPS = "gmaps"
AI_ONLY = "ai-only"
AI_SA = "ai-sa"
CONDITIONS = (GMAPS, AI_ONLY, AI_SA)

# A second provider announcement fires this close to the turn.
GMAPS_REMINDER_M = 30.0


@dataclass(frozen=True, order=True)
class ScheduledUtterance:
    # arrival_t then insertion order drive the heap; later fields never compare
    arrival_t: float
    order: int
    waypoint_index: int
    result: InstructionResult = field(compare=False)


class GuidanceEngine:
    """Runs the guidance pipeline for one session under one condition."""

    def __init__(
        self,
        route: Route,
        condition: str,
        landmark_db: Sequence[Landmark] = (),
        latency_sampler=None,
        tracker_cfg: TrackerConfig = TrackerConfig(),
        beacon_cfg: BeaconConfig = BeaconConfig(),
        prompt_cfg: PromptTriggerConfig = PromptTriggerConfig(),
        instruction_cfg: SystemInstruction = SystemInstruction(),
    ):
        if condition not in CONDITIONS:
            raise ValueError(f"unknown condition {condition!r}")
        self.route = route
        self.condition = condition
        self.db = list(landmark_db)
        self.latency_sampler = latency_sampler
        self.beacon_cfg = beacon_cfg
        self.prompt_cfg = prompt_cfg
        self.instruction_cfg = instruction_cfg

        self.tracker = Tracker(route, tracker_cfg)
        self.beacon_state = BeaconState()
        self.prompt_state = PromptState()
        self.guidance_arrived: dict[int, bool] = {}
        self.last_instruction: dict[int, InstructionResult] = {}
        self.latency_samples: list[float] = []
        self._history: deque[PoseSample] = deque(maxlen=64)
        self._pending: list[ScheduledUtterance] = []
        self._pending_order = 0
        self._announced: dict[int, int] = {}

    @property
    def complete(self) -> bool:
        return self.tracker.complete

    @property
    def utterance_pending(self) -> bool:
        """A prompt has fired and its reply has not arrived yet."""
        return bool(self._pending)

    def _facing_delta_value(self, sample: PoseSample) -> float:
        target, _, _ = self.tracker.current_waypoint()
        return signed_delta(sample.heading, bearing_deg(sample.pos, target)).value

    def step(self, sample: PoseSample) -> list[dict]:
        """Advance every pipeline stage by one pose; returns event records."""
        records: list[dict] = []
        t = sample.t
        self._history.append(sample)

        for ev in self.tracker.ingest(sample):
            if isinstance(ev, TurnReached):
                records.append(make_event(t, "turn_reached",
                                          waypoint_index=ev.waypoint_index,
                                          maneuver=ev.maneuver))
            elif isinstance(ev, DeviationStarted):
                records.append(make_event(t, "deviation_start",
                                          pos=[ev.pos.lat_deg, ev.pos.lon_deg],
                                          off_route_m=ev.off_route_m))
            elif isinstance(ev, DeviationEnded):
                records.append(make_event(t, "deviation_end",
                                          duration_s=ev.duration_s,
                                          max_off_m=ev.max_off_m))

        while self._pending and self._pending[0].arrival_t <= t:
            item = heapq.heappop(self._pending)
            self.guidance_arrived[item.waypoint_index] = True
            self.last_instruction[item.waypoint_index] = item.result
            records.append(make_event(t, "utterance",
                                      text=item.result.utterance,
                                      latency_s=item.result.latency_s,
                                      waypoint_index=item.waypoint_index))

        if self.condition == GMAPS:
            records.extend(self._gmaps_announcements(sample))
        else:
            records.extend(self._ai_prompting(sample))

        records.extend(self._step_beacon(sample))
        return records

    def _gmaps_announcements(self, sample: PoseSample) -> list[dict]:
        """Provider behavior: announce each leg as it starts, repeat near the turn."""
        records = []
        if self.complete:
            return records
        wp = self.tracker.state.current_waypoint_index
        n = self._announced.get(wp, 0)
        target, _, _ = self.tracker.current_waypoint()
        announce = False
        if n == 0:
            announce = True
        elif n == 1 and distance_m(sample.pos, target) < GMAPS_REMINDER_M:
            announce = True
        if announce:
            packet = build_packet(sample, self.tracker.state_view, self.route)
            result = baseline_instruction(packet)
            self._announced[wp] = n + 1
            self.guidance_arrived[wp] = True
            self.last_instruction[wp] = result
            records.append(make_event(sample.t, "utterance",
                                      text=result.utterance,
                                      latency_s=0.0,
                                      waypoint_index=wp))
        return records

    def _ai_prompting(self, sample: PoseSample) -> list[dict]:
        records = []
        if self.complete:
            return records
        self.prompt_state, fired = step_trigger(
            self.prompt_state, self._history, self.tracker.state_view,
            self.route, self.prompt_cfg,
        )
        if fired is None:
            return records
        records.append(make_event(sample.t, "prompt_fired",
                                  scenario=fired.scenario,
                                  waypoint_index=fired.waypoint_index))
        packet = build_packet(sample, self.tracker.state_view, self.route)
        result = synthesize_mock(packet, self.db, self.instruction_cfg)
        _, result = validate_side(result)
        latency = self.latency_sampler() if self.latency_sampler is not None else 0.0
        result = replace(result, latency_s=latency)
        self.latency_samples.append(latency)
        heapq.heappush(self._pending, ScheduledUtterance(
            arrival_t=sample.t + latency,
            order=self._pending_order,
            waypoint_index=fired.waypoint_index,
            result=result,
        ))
        self._pending_order += 1
        return records

    def _step_beacon(self, sample: PoseSample) -> list[dict]:
        records = []
        if self.condition != AI_SA:
            return records
        was_active = self.beacon_state.active
        if self.complete:
            if was_active:
                self.beacon_state = BeaconState()
                records.append(make_event(sample.t, "beacon_off"))
            return records
        delta = signed_delta(
            sample.heading,
            bearing_deg(sample.pos, self.tracker.current_waypoint()[0]),
        )
        self.beacon_state = step_beacon(self.beacon_state, delta, self.beacon_cfg)
        if self.beacon_state.active and not was_active:
            records.append(make_event(sample.t, "beacon_on",
                                      azimuth_deg=delta.value))
        elif was_active and not self.beacon_state.active:
            records.append(make_event(sample.t, "beacon_off"))
        return records

    def finalize(self, t: float) -> list[dict]:
        """Close any open deviation at end of run."""
        records = []
        for ev in self.tracker.finalize(t):
            records.append(make_event(t, "deviation_end",
                                      duration_s=ev.duration_s,
                                      max_off_m=ev.max_off_m))
        if self.beacon_state.active:
            self.beacon_state = BeaconState()
            records.append(make_event(t, "beacon_off"))
        return records
