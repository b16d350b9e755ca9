# Deterministic simulated pedestrian, noise and latency models, and the
# three-condition experiment harness.
#
# The agent walks the planned polyline exactly; randomness enters through
# the reported pose (GPS + heading noise) and through branch choices at
# intersections. Choice error follows the comprehension model
#
#   err = comprehension_error_base * (alternatives - 1)
#
# for instruction-guided decisions, scaled up when the instruction was
# anchored to a generic landmark (walkers reported unique landmarks clear
# and common ones confusing), and drops to BEACON_GUIDED_ERR whenever the
# spatial beacon resolves the choice: either actively pointing within 10
# degrees of a branch, or silent because the walker already faces the
# waypoint (silence is the on-course cue). An unguided walker at a turn
# picks uniformly and never guesses a turnaround.
#
# A true excursion beyond the deviation threshold triggers the conductor:
# the agent pauses, is told it went wrong, walks back to the decision
# point, and chooses again among the branches it has not tried.
#
# Deviations in the run record and event log are judged on the walker's
# TRUE position, the way the study conductor noted them (GPS-artifact
# crossings were explicitly not annotated as deviations there). The
# online tracker still runs on the noisy reported pose; its view ends up
# in the run_end payload and is what log replay reproduces.

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional, Sequence

from .beacon import BeaconConfig
from .engine import AI_ONLY, AI_SA, CONDITIONS, GMAPS, GuidanceEngine
from .geo import GeoPoint, HeadingDeg, normalize_heading, project_local, signed_delta, unproject_local
from .instructor import Landmark, SystemInstruction
from .metrics import RunRecord, make_event, pointing_error, pointing_truth
from .prompting import PromptTriggerConfig
from .route import IntersectionGraph, Route
from .tracking import PoseSample, Tracker, TrackerConfig

# Fitted offline by moment-matching the truncated log-normal to the
# measured prompt latency (mean 3.31 s, sd 0.81 s on [1.48, 11.29]);
# fit_latency_model() reproduces these.
LATENCY_MU = 1.167372590280
LATENCY_SIGMA = 0.241616430330
LATENCY_MIN_S = 1.48
LATENCY_MAX_S = 11.29

BEACON_GUIDED_ERR = 0.02
BEACON_BRANCH_ALIGN_DEG = 10.0
MAX_CHOICE_ERR = 0.9
TIME_CAP_FACTOR = 3.0

# geometry thresholds for classifying branches at a decision vertex
_BRANCH_MATCH_DEG = 15.0
_PROBE_AHEAD_M = 15.0
_DIVERGE_MARGIN_M = 2.0

_PAUSE_S = 2.5
_PAUSE_SWEEP_DPS = 60.0
_EXCURSION_CAP_M = 60.0
_END_DWELL_S = 3.0

_ND = NormalDist()


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class AgentConfig:
    """Simulated pedestrian parameters. Defaults model the study walker."""

    speed_mps: float = 1.38
    heading_noise_deg_sd: float = 6.0
    gps_noise_m_sd: float = 3.0
    gps_noise_tau_s: float = 45.0
    comprehension_error_base: float = 0.15
    landmark_ambiguity_weight: float = 1.0
    pointing_noise_deg_sd: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.comprehension_error_base <= 1.0:
            raise SimError(f"error base {self.comprehension_error_base} outside [0, 1]")
        if min(self.heading_noise_deg_sd, self.gps_noise_m_sd,
               self.landmark_ambiguity_weight, self.pointing_noise_deg_sd) < 0:
            raise SimError("noise parameters must be nonnegative")
        if self.speed_mps <= 0 or self.gps_noise_tau_s <= 0:
            raise SimError("speed and noise time constant must be positive")


@dataclass(frozen=True)
class LatencyModel:
    """Log-normal prompt-to-response latency, truncated to [min_s, max_s]."""

    mu: float = LATENCY_MU
    sigma: float = LATENCY_SIGMA
    min_s: float = LATENCY_MIN_S
    max_s: float = LATENCY_MAX_S

    def __post_init__(self):
        if not self.min_s < self.max_s:
            raise SimError(f"need min_s < max_s, got [{self.min_s}, {self.max_s}]")
        if self.sigma < 0:
            raise SimError(f"negative sigma {self.sigma}")


def sample_latency(model: LatencyModel, rng: random.Random) -> float:
    """One latency draw via the inverse CDF; always within the bounds."""
    if model.sigma == 0.0:
        return min(model.max_s, max(model.min_s, math.exp(model.mu)))
    alpha = _ND.cdf((math.log(model.min_s) - model.mu) / model.sigma)
    beta = _ND.cdf((math.log(model.max_s) - model.mu) / model.sigma)
    u = alpha + (beta - alpha) * rng.random()
    x = math.exp(model.mu + model.sigma * _ND.inv_cdf(u))
    return min(model.max_s, max(model.min_s, x))


def truncated_lognormal_moments(mu: float, sigma: float, a: float, b: float) -> tuple[float, float]:
    """Mean and sd of a log-normal truncated to [a, b], in closed form."""
    la, lb = math.log(a), math.log(b)
    alpha, beta = (la - mu) / sigma, (lb - mu) / sigma
    z = _ND.cdf(beta) - _ND.cdf(alpha)
    m1 = math.exp(mu + sigma ** 2 / 2) * (_ND.cdf(beta - sigma) - _ND.cdf(alpha - sigma)) / z
    m2 = math.exp(2 * mu + 2 * sigma ** 2) * (_ND.cdf(beta - 2 * sigma) - _ND.cdf(alpha - 2 * sigma)) / z
    return m1, math.sqrt(m2 - m1 * m1)


def fit_latency_model(mean_s: float = 3.31, sd_s: float = 0.81,
                      min_s: float = LATENCY_MIN_S, max_s: float = LATENCY_MAX_S) -> LatencyModel:
    """Moment-match (mu, sigma) so the truncated distribution hits mean/sd."""
    from scipy import optimize

    def eqs(x):
        m, s = truncated_lognormal_moments(x[0], x[1], min_s, max_s)
        return [m - mean_s, s - sd_s]

    sigma0 = math.sqrt(math.log(1.0 + (sd_s / mean_s) ** 2))
    mu0 = math.log(mean_s) - sigma0 ** 2 / 2.0
    sol = optimize.fsolve(eqs, [mu0, sigma0], full_output=True)
    (mu, sigma), _, ier, msg = sol
    if ier != 1:
        raise SimError(f"latency fit did not converge: {msg}")
    return LatencyModel(mu=float(mu), sigma=float(sigma), min_s=min_s, max_s=max_s)


def reaction_distance(speed_mps: float, latency_s: float) -> float:
    """Meters traveled while waiting out one prompt latency."""
    if speed_mps < 0 or latency_s < 0:
        raise SimError("speed and latency must be nonnegative")
    return speed_mps * latency_s


@dataclass(frozen=True)
class _DecisionVertex:
    vertex: int
    alternatives: Optional[int]
    correct_bearing: float
    back_bearing: float
    wrong_branches: tuple[float, ...]  # diverging wrong-branch bearings
    is_turnaround: bool
    waypoint_index: Optional[int]


def _polyline_xy(route: Route) -> list[tuple[float, float]]:
    origin = route.polyline[0]
    return [project_local(origin, p) for p in route.polyline]


def _min_poly_dist(xy: tuple[float, float], poly: list[tuple[float, float]],
                   early_out: Optional[float] = None, hint: int = 0) -> float:
    """Distance to the nearest segment; with early_out, any value at or
    below it is returned as soon as one is found (threshold tests only)."""
    px, py = xy
    n = len(poly) - 1
    best = math.inf
    first = min(max(hint, 0), n - 1)
    for i in [first, *range(n)]:
        ax, ay = poly[i]
        bx, by = poly[i + 1]
        abx, aby = bx - ax, by - ay
        ab2 = abx * abx + aby * aby
        if ab2 == 0.0:
            d = math.hypot(px - ax, py - ay)
        else:
            u = max(0.0, min(1.0, ((px - ax) * abx + (py - ay) * aby) / ab2))
            d = math.hypot(px - (ax + u * abx), py - (ay + u * aby))
        if d < best:
            best = d
            if early_out is not None and best <= early_out:
                return best
    return best


def _bearing_xy(a: tuple[float, float], b: tuple[float, float]) -> float:
    return normalize_heading(math.degrees(math.atan2(b[0] - a[0], b[1] - a[1])))


def _decision_vertices(route: Route, graph: Optional[IntersectionGraph],
                       deviation_threshold_m: float) -> dict[int, _DecisionVertex]:
    """Precompute choice geometry at every interior vertex that needs one."""
    origin = route.polyline[0]
    poly = _polyline_xy(route)
    g = graph or route.graph

    node_xy = [project_local(origin, p) for p in g.nodes] if g else []
    on_route_by_node = {e.node_index: e for e in g.on_route} if g else {}

    # waypoint vertex indices, walking the polyline forward
    wp_vertices: dict[int, int] = {}
    cursor = 0
    for w, (point, _, _) in enumerate(route.turn_waypoints()):
        wxy = project_local(origin, point)
        for i in range(cursor, len(poly)):
            if math.hypot(poly[i][0] - wxy[0], poly[i][1] - wxy[1]) < 0.5:
                wp_vertices[i] = w
                cursor = i + 1
                break

    out: dict[int, _DecisionVertex] = {}
    for vi in range(1, len(poly) - 1):
        vxy = poly[vi]
        node_i = None
        for ni, nxy in enumerate(node_xy):
            if ni in on_route_by_node and math.hypot(nxy[0] - vxy[0], nxy[1] - vxy[1]) < 0.5:
                node_i = ni
                break
        correct = _bearing_xy(vxy, poly[vi + 1])
        back = _bearing_xy(vxy, poly[vi - 1])
        is_turnaround = abs(signed_delta(correct, back).value) < _BRANCH_MATCH_DEG

        if node_i is None and vi not in wp_vertices:
            continue  # plain bend in the street, nothing to decide

        wrong: list[float] = []
        alternatives = None
        if node_i is not None:
            alternatives = on_route_by_node[node_i].alternatives
            for nb in (g.neighbors(node_i) if g else []):
                b = _bearing_xy(vxy, node_xy[nb])
                if abs(signed_delta(b, correct).value) < _BRANCH_MATCH_DEG:
                    continue
                if abs(signed_delta(b, back).value) < _BRANCH_MATCH_DEG:
                    continue
                rad = math.radians(b)
                probe = (vxy[0] + _PROBE_AHEAD_M * math.sin(rad),
                         vxy[1] + _PROBE_AHEAD_M * math.cos(rad))
                if _min_poly_dist(probe, poly) > deviation_threshold_m + _DIVERGE_MARGIN_M:
                    wrong.append(b)
        out[vi] = _DecisionVertex(
            vertex=vi,
            alternatives=alternatives,
            correct_bearing=correct,
            back_bearing=back,
            wrong_branches=tuple(sorted(wrong)),
            is_turnaround=is_turnaround,
            waypoint_index=wp_vertices.get(vi),
        )
    return out


class _Agent:
    """Walks the plan arc exactly; excursions and returns are side trips."""

    WALK, PAUSE, EXCURSION, RETURN, DWELL = range(5)

    def __init__(self, route: Route, speed: float):
        self.poly = _polyline_xy(route)
        self.cum = [0.0]
        for i in range(1, len(self.poly)):
            a, b = self.poly[i - 1], self.poly[i]
            self.cum.append(self.cum[-1] + math.hypot(b[0] - a[0], b[1] - a[1]))
        self.speed = speed
        self.mode = self.WALK
        self.s = 0.0
        self.next_vertex = 1
        self.pos = self.poly[0]
        self.heading = _bearing_xy(self.poly[0], self.poly[1])
        self.pause_left = 0
        self.after_pause = self.WALK
        self.return_vertex: Optional[int] = None
        self.excursion_dir = 0.0
        self.excursion_from: Optional[int] = None
        self.excursion_len = 0.0
        self.pending_decision: Optional[int] = None
        self.arrived = False

    def command_speed(self) -> float:
        return 0.0 if self.mode in (self.PAUSE, self.DWELL) else self.speed

    def tick(self, dt: float, decisions: dict[int, _DecisionVertex]):
        if self.mode == self.PAUSE:
            want = self.after_pause_heading
            d = signed_delta(self.heading, want).value
            step = _PAUSE_SWEEP_DPS * dt
            self.heading = normalize_heading(
                self.heading + (d if abs(d) <= step else math.copysign(step, d))
            )
            self.pause_left -= 1
            if self.pause_left <= 0:
                self.mode = self.after_pause
            return

        step = self.speed * dt
        if self.mode == self.WALK:
            target_s = min(self.s + step, self.cum[-1])
            while self.next_vertex < len(self.poly) and target_s >= self.cum[self.next_vertex] - 1e-9:
                vi = self.next_vertex
                if vi in decisions and vi < len(self.poly) - 1:
                    # stop on the vertex for this tick and decide
                    self.s = self.cum[vi]
                    self.pos = self.poly[vi]
                    self.pending_decision = vi
                    return
                self.next_vertex += 1
            self.s = target_s
            if self.s >= self.cum[-1] - 1e-9:
                self.pos = self.poly[-1]
                self.mode = self.DWELL
                self.arrived = True
                return
            a = self.poly[self.next_vertex - 1]
            b = self.poly[self.next_vertex]
            seg_len = self.cum[self.next_vertex] - self.cum[self.next_vertex - 1]
            u = (self.s - self.cum[self.next_vertex - 1]) / seg_len
            self.pos = (a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]))
            self.heading = _bearing_xy(a, b)
        elif self.mode == self.EXCURSION:
            rad = math.radians(self.excursion_dir)
            self.pos = (self.pos[0] + step * math.sin(rad), self.pos[1] + step * math.cos(rad))
            self.heading = self.excursion_dir
            self.excursion_len += step
        elif self.mode == self.RETURN:
            target = self.poly[self.return_vertex]
            dx, dy = target[0] - self.pos[0], target[1] - self.pos[1]
            dist = math.hypot(dx, dy)
            if dist <= step:
                self.pos = target
                self.pending_decision = self.return_vertex
                self.mode = self.WALK
                self.return_vertex = None
            else:
                self.heading = normalize_heading(math.degrees(math.atan2(dx, dy)))
                self.pos = (self.pos[0] + step * dx / dist, self.pos[1] + step * dy / dist)

    def begin_pause(self, ticks: int, face_toward: float, then: int):
        self.mode = self.PAUSE
        self.pause_left = ticks
        self.after_pause = then
        self.after_pause_heading = face_toward

    def proceed_from(self, vi: int):
        self.s = self.cum[vi]
        self.next_vertex = vi + 1
        self.mode = self.WALK
        self.pending_decision = None
        if vi + 1 < len(self.poly):
            self.heading = _bearing_xy(self.poly[vi], self.poly[vi + 1])

    def take_wrong_branch(self, vi: int, bearing: float):
        self.mode = self.EXCURSION
        self.excursion_dir = bearing
        self.excursion_from = vi
        self.excursion_len = 0.0
        self.heading = bearing
        self.pending_decision = None


def run_sim(
    route: Route,
    condition: str,
    agent: AgentConfig = AgentConfig(),
    landmark_db: Sequence[Landmark] = (),
    graph: Optional[IntersectionGraph] = None,
    tick_hz: float = 10.0,
    latency_model: LatencyModel = LatencyModel(),
    tracker_cfg: TrackerConfig = TrackerConfig(),
    beacon_cfg: BeaconConfig = BeaconConfig(),
    prompt_cfg: PromptTriggerConfig = PromptTriggerConfig(),
    instruction_cfg: SystemInstruction = SystemInstruction(),
    pose_log_stride: int = 1,
) -> tuple[RunRecord, list[dict]]:
    """Closed-loop simulation of one walk; returns the record and event log.

    Fully deterministic for a given (route, condition, configs, seed): one
    rng drives noise, latency draws, and branch choices in a fixed order.
    pose_log_stride  0 suppresses per-tick pose events (counters and
    decision events are unaffected); 1 logs every tick.
    """
    if condition not in CONDITIONS:
        raise SimError(f"unknown condition {condition!r}")
    g = graph or route.graph
    rng = random.Random(agent.seed)
    dt = 1.0 / tick_hz
    origin = route.polyline[0]

    engine = GuidanceEngine(
        route, condition, landmark_db,
        latency_sampler=(lambda: sample_latency(latency_model, rng)) if condition != GMAPS else None,
        tracker_cfg=tracker_cfg, beacon_cfg=beacon_cfg,
        prompt_cfg=prompt_cfg, instruction_cfg=instruction_cfg,
    )
    decisions = _decision_vertices(route, g, tracker_cfg.deviation_threshold_m)
    walker = _Agent(route, agent.speed_mps)
    tried: dict[int, set[float]] = {}
    poly = walker.poly

    # first-order Gauss-Markov GPS error; per-tick white noise is not how
    # receivers drift and would swamp the walked-distance measure
    rho = math.exp(-dt / agent.gps_noise_tau_s)
    white = agent.gps_noise_m_sd * math.sqrt(1.0 - rho * rho)
    nx = ny = 0.0

    time_cap = TIME_CAP_FACTOR * route.length_m() / agent.speed_mps
    events: list[dict] = []
    t = 0.0
    tick_i = 0
    dwell_ticks = 0
    capped = False
    # ground-truth deviation meter (what the conductor sees and notes)
    true_open: Optional[tuple[float, float]] = None
    true_intervals: list[tuple[float, float, float]] = []

    while True:
        t = round((tick_i + 1) * dt, 6)
        tick_i += 1
        walker.tick(dt, decisions)

        if agent.gps_noise_m_sd > 0.0:
            nx = rho * nx + white * rng.gauss(0.0, 1.0)
            ny = rho * ny + white * rng.gauss(0.0, 1.0)
        rep_heading = walker.heading
        if agent.heading_noise_deg_sd > 0.0:
            rep_heading += rng.gauss(0.0, agent.heading_noise_deg_sd)
        sample = PoseSample(
            t=t,
            pos=unproject_local(origin, walker.pos[0] + nx, walker.pos[1] + ny),
            heading=HeadingDeg(rep_heading),
            speed_mps=walker.command_speed(),
        )

        step_records = engine.step(sample)
        if pose_log_stride and tick_i % pose_log_stride == 0:
            events.append(make_event(
                t, "pose",
                pos=[sample.pos.lat_deg, sample.pos.lon_deg],
                heading_deg=sample.heading.value,
                speed_mps=sample.speed_mps,
            ))
        # the tracker's own deviation view is noise-driven belief; the log
        # carries the conductor's ground-truth annotations instead
        events.extend(r for r in step_records
                      if r["kind"] not in ("deviation_start", "deviation_end"))

        true_off = _min_poly_dist(
            walker.pos, poly,
            early_out=tracker_cfg.deviation_threshold_m if true_open is None else None,
            hint=walker.next_vertex - 1,
        )
        conductor_steps_in = False
        if true_open is None:
            if true_off > tracker_cfg.deviation_threshold_m:
                true_open = (t, true_off)
                conductor_steps_in = True
                true_pt = unproject_local(origin, walker.pos[0], walker.pos[1])
                events.append(make_event(t, "deviation_start",
                                         pos=[true_pt.lat_deg, true_pt.lon_deg],
                                         off_route_m=true_off))
        else:
            t0, max_off = true_open
            max_off = max(max_off, true_off)
            if true_off <= tracker_cfg.rejoin_threshold_m:
                true_open = None
                true_intervals.append((t0, t, max_off))
                events.append(make_event(t, "deviation_end",
                                         duration_s=t - t0, max_off_m=max_off))
            else:
                true_open = (t0, max_off)

        if conductor_steps_in or (walker.mode == _Agent.EXCURSION
                                  and walker.excursion_len > _EXCURSION_CAP_M):
            # conductor: stop the walker, tell it to go back, let it re-choose
            if walker.mode == _Agent.EXCURSION:
                back_to = walker.excursion_from
                walker.return_vertex = back_to
                face = _bearing_xy(walker.pos, poly[back_to])
                walker.begin_pause(int(_PAUSE_S / dt), face, _Agent.RETURN)

        if walker.pending_decision is not None:
            vi = walker.pending_decision
            dv = decisions[vi]
            _resolve_decision(walker, dv, tried, engine, agent, condition, rng, origin)

        if walker.arrived:
            dwell_ticks += 1
            if engine.complete or dwell_ticks > _END_DWELL_S / dt:
                break
        if t > time_cap:
            capped = True
            break

    events.extend(engine.finalize(t))
    if true_open is not None:
        t0, max_off = true_open
        true_intervals.append((t0, t, max_off))
        events.append(make_event(t, "deviation_end",
                                 duration_s=t - t0, max_off_m=max_off))

    state = engine.tracker.state
    completed = engine.complete or walker.arrived
    note = None
    if capped and not completed:
        completed = False
        note = f"time cap exceeded after {t:.1f} s (cap {time_cap:.1f} s)"

    pointing_errors: list[float] = []
    if completed and len(route.pois) >= 2:
        task = pointing_truth(route)
        pointed = [
            HeadingDeg(b.value + rng.gauss(0.0, agent.pointing_noise_deg_sd))
            for b in task.true_bearings
        ]
        pointing_errors = pointing_error(task, pointed)

    record = RunRecord(
        route_id=route.id,
        condition=condition,
        seed=agent.seed,
        distance_walked_m=state.distance_walked_m,
        deviation_count=len(true_intervals),
        deviation_intervals=true_intervals,
        pointing_errors_deg=pointing_errors,
        latency_samples_s=list(engine.latency_samples),
        completed=completed,
        note=note,
    )
    events.append(make_event(
        t, "run_end",
        route_id=route.id, condition=condition, seed=agent.seed,
        completed=completed, tracker=state.as_dict(),
        note=note,
    ))
    return record, events


def _resolve_decision(walker: _Agent, dv: _DecisionVertex, tried: dict[int, set[float]],
                      engine: GuidanceEngine, agent: AgentConfig, condition: str,
                      rng: random.Random, origin: GeoPoint) -> None:
    candidates = [b for b in dv.wrong_branches if b not in tried.get(dv.vertex, set())]
    err = _choice_error(walker, dv, len(candidates), engine, agent, condition, origin)

    wrong = False
    if candidates and err > 0.0:
        wrong = rng.random() < err
    if not wrong:
        tried.pop(dv.vertex, None)
        walker.proceed_from(dv.vertex)
        return
    branch = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
    tried.setdefault(dv.vertex, set()).add(branch)
    walker.take_wrong_branch(dv.vertex, branch)


def _choice_error(walker: _Agent, dv: _DecisionVertex, n_candidates: int,
                  engine: GuidanceEngine, agent: AgentConfig,
                  condition: str, origin: GeoPoint) -> float:
    """Probability of taking a wrong branch at this vertex."""
    if n_candidates == 0:
        return 0.0

    if condition == AI_SA and not engine.complete:
        wp_point, _, _ = engine.tracker.current_waypoint()
        wpxy = project_local(origin, wp_point)
        if math.hypot(wpxy[0] - walker.pos[0], wpxy[1] - walker.pos[1]) > 1.0:
            wp_bearing = _bearing_xy(walker.pos, wpxy)
            align = abs(signed_delta(dv.correct_bearing, wp_bearing).value)
            if engine.beacon_state.active:
                # audible beacon points at the waypoint down the correct branch
                if align <= BEACON_BRANCH_ALIGN_DEG:
                    return BEACON_GUIDED_ERR
            elif align <= engine.beacon_cfg.activate_deg:
                # silence is the on-course cue: the walker already faces it
                return BEACON_GUIDED_ERR

    wp = dv.waypoint_index
    if wp is not None and not engine.guidance_arrived.get(wp, False):
        # no instruction yet: guess among visible ways forward, and nobody
        # guesses a turnaround
        if dv.is_turnaround:
            return 1.0
        return n_candidates / (n_candidates + 1.0)

    alt = dv.alternatives if dv.alternatives is not None else 1
    err = agent.comprehension_error_base * (alt - 1)
    if condition in (AI_ONLY, AI_SA) and wp is not None:
        result = engine.last_instruction.get(wp)
        uniq = 1.0
        if result is not None and result.landmark is not None:
            uniq = result.landmark.uniqueness
        err *= 1.0 + agent.landmark_ambiguity_weight * (1.0 - uniq)
    # re-choices after an intervention are better informed: the conductor
    # eliminated the tried branches, so ambiguity shrinks proportionally
    if dv.wrong_branches:
        err *= n_candidates / len(dv.wrong_branches)
    return min(err, MAX_CHOICE_ERR)


def replay_tracker(route: Route, events: Sequence[dict],
                   tracker_cfg: TrackerConfig = TrackerConfig()) -> dict:
    """Re-ingest a log's pose events through a fresh tracker.

    Returns the final state dict; identical input logs give identical
    output, which is what makes event logs replayable.
    """
    tracker = Tracker(route, tracker_cfg)
    last_t = 0.0
    for ev in events:
        if ev["kind"] == "pose":
            p = ev["payload"]
            sample = PoseSample(
                t=ev["t"],
                pos=GeoPoint(p["pos"][0], p["pos"][1]),
                heading=HeadingDeg(p["heading_deg"]),
                speed_mps=p["speed_mps"],
            )
            tracker.ingest(sample)
            last_t = ev["t"]
        elif ev["kind"] == "run_end":
            last_t = ev["t"]
    tracker.finalize(last_t)
    return tracker.state.as_dict()
