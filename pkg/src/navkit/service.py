# Interactive session server: drives the guidance engine for one client
# per websocket at a fixed tick rate, replays recorded logs, and runs the
# post-route pointing task. The protocol is documented in
# docs/protocol.md; SessionCore is the transport-free core the tests and
# the socket layer share.

from __future__ import annotations

import asyncio
import json
import logging
import math
import os
import random
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .engine import CONDITIONS, GMAPS, GuidanceEngine
from .geo import GeoPoint, HeadingDeg, normalize_heading, project_local, unproject_local
from .instructor import Landmark, load_landmarks
from .metrics import RunRecord, make_event, pointing_error, pointing_truth, save_run_record, write_event_log
from .route import Route, load_route
from .simkit import LatencyModel, sample_latency
from .tracking import PoseSample
from .beacon import BeaconConfig

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
DEFAULT_BIND = "127.0.0.1:8787"
MAX_TIME_SCALE = 200.0
MAX_SPEED_MPS = 10.0
MAX_TURN_RATE_DPS = 360.0

CLOSE_PROTOCOL_ERROR = 4400


class ProtocolError(ValueError):
    pass


class RouteIncomplete(ValueError):
    pass


def _msg(msg_type: str, **fields) -> dict:
    out = {"v": PROTOCOL_VERSION, "type": msg_type}
    out.update(fields)
    return out


class SessionCore:
    """Server-authoritative session state: pose integration plus the engine.

    The client steers with (turn_rate_dps, speed_mps); the server owns the
    pose so client clock skew cannot corrupt tracking. One instance per
    session, driven from a single task.
    """

    def __init__(self, route: Route, condition: str, landmark_db=(),
                 seed: int = 0, tick_hz: float = 10.0, mono: bool = False):
        if condition not in CONDITIONS:
            raise ProtocolError(f"unknown condition {condition!r}")
        self.route = route
        self.condition = condition
        self.seed = seed
        self.dt = 1.0 / tick_hz
        self.rng = random.Random(seed)
        latency_model = LatencyModel()
        self.engine = GuidanceEngine(
            route, condition, landmark_db,
            latency_sampler=(
                (lambda: sample_latency(latency_model, self.rng))
                if condition != GMAPS else None
            ),
            beacon_cfg=BeaconConfig(mono_fallback=mono),
        )
        self._origin = route.polyline[0]
        start_xy = project_local(self._origin, route.polyline[0])
        self.x, self.y = start_xy
        self.heading = self._initial_heading()
        self.speed = 0.0
        self.turn_rate = 0.0
        self.t = 0.0
        self.tick_i = 0
        self.events: list[dict] = []
        self.pointing_errors: Optional[list[float]] = None

    def _initial_heading(self) -> float:
        from .geo import bearing_deg

        return bearing_deg(self.route.polyline[0], self.route.polyline[1]).value

    @property
    def complete(self) -> bool:
        return self.engine.complete

    def set_input(self, turn_rate_dps: float, speed_mps: float) -> None:
        if not (-MAX_TURN_RATE_DPS <= turn_rate_dps <= MAX_TURN_RATE_DPS):
            raise ProtocolError(f"turn_rate_dps {turn_rate_dps} out of range")
        if not (0.0 <= speed_mps <= MAX_SPEED_MPS):
            raise ProtocolError(f"speed_mps {speed_mps} out of range")
        self.turn_rate = float(turn_rate_dps)
        self.speed = float(speed_mps)

    def tick(self) -> list[dict]:
        """Advance one tick; returns messages to send to the client."""
        self.tick_i += 1
        self.t = round(self.tick_i * self.dt, 6)
        self.heading = normalize_heading(self.heading + self.turn_rate * self.dt)
        rad = math.radians(self.heading)
        self.x += self.speed * self.dt * math.sin(rad)
        self.y += self.speed * self.dt * math.cos(rad)
        sample = PoseSample(
            t=self.t,
            pos=unproject_local(self._origin, self.x, self.y),
            heading=HeadingDeg(self.heading),
            speed_mps=self.speed,
        )
        return self._ingest(sample)

    def replay_step(self, pose_event: dict) -> list[dict]:
        """Advance from a recorded pose event instead of integrating."""
        p = pose_event["payload"]
        sample = PoseSample(
            t=pose_event["t"],
            pos=GeoPoint(p["pos"][0], p["pos"][1]),
            heading=HeadingDeg(p["heading_deg"]),
            speed_mps=p["speed_mps"],
        )
        self.t = pose_event["t"]
        return self._ingest(sample)

    def _ingest(self, sample: PoseSample) -> list[dict]:
        records = self.engine.step(sample)
        self.events.append(make_event(
            sample.t, "pose",
            pos=[sample.pos.lat_deg, sample.pos.lon_deg],
            heading_deg=sample.heading.value,
            speed_mps=sample.speed_mps,
        ))
        self.events.extend(records)

        out = [self.state_update(sample)]
        for rec in records:
            if rec["kind"] == "utterance":
                out.append(_msg("utterance", t=rec["t"],
                                text=rec["payload"]["text"],
                                latency_s=rec["payload"]["latency_s"]))
        return out

    def state_update(self, sample: PoseSample) -> dict:
        bs = self.engine.beacon_state
        ts = self.engine.tracker.state_view
        beacon = {
            "active": bs.active,
            "azimuth_deg": bs.azimuth_deg.value,
            "gain_l": bs.render.gain_left,
            "gain_r": bs.render.gain_right,
            "itd_s": bs.render.itd_s,
            "behind": bs.render.behind,
        }
        if bs.render.pulse_period_ms is not None:
            beacon["pulse_period_ms"] = bs.render.pulse_period_ms
            beacon["pulse_pattern"] = bs.render.pulse_pattern
        return _msg(
            "state",
            t=sample.t,
            pose={
                "lat": sample.pos.lat_deg,
                "lon": sample.pos.lon_deg,
                "heading_deg": sample.heading.value,
                "speed_mps": sample.speed_mps,
            },
            beacon=beacon,
            tracker={
                "waypoint_index": ts.current_waypoint_index,
                "off_route": ts.off_route,
                "deviation_count": ts.deviation_count,
                "distance_walked_m": ts.distance_walked_m,
                "complete": self.engine.complete,
            },
            thinking=self.engine.utterance_pending,
        )

    def pointing_prompt(self) -> dict:
        task = pointing_truth(self.route)
        return _msg("pointing_prompt",
                    targets=list(task.target_names),
                    origin={"lat": task.origin.lat_deg, "lon": task.origin.lon_deg})

    def submit_pointing(self, headings: list[float]) -> list[float]:
        if not self.complete:
            raise RouteIncomplete("pointing requires a completed route")
        task = pointing_truth(self.route)
        if len(headings) != len(task.true_bearings):
            raise ProtocolError(
                f"expected {len(task.true_bearings)} headings, got {len(headings)}"
            )
        self.pointing_errors = pointing_error(task, [HeadingDeg(h) for h in headings])
        return self.pointing_errors

    def build_record(self) -> RunRecord:
        state = self.engine.tracker.state
        return RunRecord(
            route_id=self.route.id,
            condition=self.condition,
            seed=self.seed,
            distance_walked_m=state.distance_walked_m,
            deviation_count=state.deviation_count,
            deviation_intervals=list(state.deviation_intervals),
            pointing_errors_deg=self.pointing_errors or [],
            latency_samples_s=list(self.engine.latency_samples),
            completed=self.complete,
            note=None if self.complete else "session closed before arrival",
        )

    def finalize(self) -> None:
        self.events.extend(self.engine.finalize(self.t))
        self.events.append(make_event(
            self.t, "run_end",
            route_id=self.route.id, condition=self.condition, seed=self.seed,
            completed=self.complete, tracker=self.engine.tracker.state.as_dict(),
            note=None,
        ))

    def run_end_message(self) -> dict:
        return _msg("run_end", record=self.build_record().to_dict())


def _parse_client_message(raw: str) -> dict:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"frame is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProtocolError("frame must be a JSON object")
    if doc.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {doc.get('v')!r}")
    if "type" not in doc:
        raise ProtocolError("frame missing type")
    return doc


def create_app(routes: dict[str, Route],
               landmark_dbs: dict[str, list[Landmark]],
               out_dir: str = "runs"):
    """FastAPI app exposing the fixture endpoint and the session socket."""
    from .route import route_to_document

    app = FastAPI(title="navkit session server")
    os.makedirs(out_dir, exist_ok=True)
    counters = {"session": 0}

    @app.get("/routes")
    def list_routes():
        return {"routes": sorted(routes)}

    @app.get("/routes/{route_id}")
    def get_route(route_id: str):
        if route_id not in routes:
            return JSONResponse({"error": f"unknown route {route_id!r}"}, status_code=404)
        return route_to_document(routes[route_id])

    async def _fail(ws: WebSocket, message: str):
        await ws.send_text(json.dumps(_msg("error", code="protocol", message=message)))
        await ws.close(code=CLOSE_PROTOCOL_ERROR)

    @app.websocket("/session")
    async def session_socket(ws: WebSocket):
        await ws.accept()
        try:
            hello_raw = await ws.receive_text()
            hello = _parse_client_message(hello_raw)
            if hello["type"] != "hello":
                raise ProtocolError(f"expected hello, got {hello['type']!r}")
            route_id = hello.get("route_id")
            if route_id not in routes:
                raise ProtocolError(f"unknown route {route_id!r}")
            mode = hello.get("mode", "interactive")
            if mode not in ("interactive", "replay"):
                raise ProtocolError(f"unknown mode {mode!r}")
            condition = hello.get("condition", "ai-sa")
            if condition not in CONDITIONS:
                raise ProtocolError(f"unknown condition {condition!r}")
        except ProtocolError as exc:
            await _fail(ws, str(exc))
            return
        except WebSocketDisconnect:
            return

        counters["session"] += 1
        session_name = f"{route_id}_{condition}_s{counters['session']}"
        core = SessionCore(
            routes[route_id], condition,
            landmark_dbs.get(route_id, ()),
            seed=int(hello.get("seed", 0)),
            tick_hz=float(hello.get("tick_hz", 10.0)),
            mono=bool(hello.get("mono", False)),
        )
        try:
            if mode == "replay":
                await _run_replay(ws, core, hello)
            else:
                time_scale = float(hello.get("time_scale", 1.0))
                if not 0.01 <= time_scale <= MAX_TIME_SCALE:
                    raise ProtocolError(f"time_scale {time_scale} out of range")
                await _run_interactive(ws, core, time_scale)
        except ProtocolError as exc:
            await _fail(ws, str(exc))
        except WebSocketDisconnect:
            pass
        finally:
            core.finalize()
            try:
                write_event_log(os.path.join(out_dir, f"events_{session_name}.jsonl"),
                                core.events)
                save_run_record(os.path.join(out_dir, f"record_{session_name}.json"),
                                core.build_record())
            except OSError:
                log.exception("could not persist session %s", session_name)

    async def _run_replay(ws: WebSocket, core: SessionCore, hello: dict):
        events = hello.get("events")
        if not isinstance(events, list):
            raise ProtocolError("replay hello needs an events list")

        async def reject_input():
            raw = await ws.receive_text()
            msg = _parse_client_message(raw)
            raise ProtocolError(f"replay sessions are read-only, got {msg['type']!r}")

        guard = asyncio.create_task(reject_input())
        try:
            for ev in events:
                if not isinstance(ev, dict) or ev.get("kind") != "pose":
                    continue
                for out in core.replay_step(ev):
                    await ws.send_text(json.dumps(out))
                if guard.done():
                    guard.result()
            await ws.send_text(json.dumps(core.run_end_message()))
            if guard.done():
                guard.result()
        finally:
            guard.cancel()
        await ws.close()

    async def _run_interactive(ws: WebSocket, core: SessionCore, time_scale: float):
        inbox: asyncio.Queue = asyncio.Queue()
        closed = asyncio.Event()

        async def reader():
            try:
                while True:
                    raw = await ws.receive_text()
                    inbox.put_nowait(raw)
            except WebSocketDisconnect:
                closed.set()

        reader_task = asyncio.create_task(reader())
        prompted = False
        try:
            while not closed.is_set():
                while not inbox.empty():
                    msg = _parse_client_message(inbox.get_nowait())
                    if msg["type"] == "input":
                        core.set_input(float(msg.get("turn_rate_dps", 0.0)),
                                       float(msg.get("speed_mps", 0.0)))
                    elif msg["type"] == "pointing":
                        try:
                            core.submit_pointing(list(msg.get("headings", ())))
                        except RouteIncomplete as exc:
                            await ws.send_text(json.dumps(_msg(
                                "error", code="route_incomplete", message=str(exc))))
                        else:
                            await ws.send_text(json.dumps(core.run_end_message()))
                            await ws.close()
                            return
                    else:
                        raise ProtocolError(f"unexpected message {msg['type']!r}")

                if core.complete:
                    if not prompted:
                        prompted = True
                        await ws.send_text(json.dumps(core.pointing_prompt()))
                    await asyncio.sleep(core.dt / time_scale)
                    continue

                for out in core.tick():
                    await ws.send_text(json.dumps(out))
                await asyncio.sleep(core.dt / time_scale)
        finally:
            reader_task.cancel()

    return app


def load_route_dir(routes_dir: str) -> dict[str, Route]:
    routes = {}
    for name in sorted(os.listdir(routes_dir)):
        if name.endswith(".json") and not name.startswith("landmarks"):
            with open(os.path.join(routes_dir, name), "rb") as fh:
                route = load_route(fh.read())
            routes[route.id] = route
    if not routes:
        raise ValueError(f"no route files in {routes_dir}")
    return routes


def serve(routes_dir: str, landmarks_path: Optional[str] = None,
          bind: str = DEFAULT_BIND, out_dir: str = "runs") -> int:
    """Run the server until interrupted. Returns an exit code."""
    import uvicorn

    from . import fixtures as fixtures_mod

    try:
        routes = load_route_dir(routes_dir)
    except (OSError, ValueError) as exc:
        print(f"nav serve: {exc}")
        return 2

    landmark_dbs: dict[str, list[Landmark]] = {}
    if landmarks_path:
        shared = load_landmarks(open(landmarks_path, "rb").read())
        landmark_dbs = {rid: shared for rid in routes}
    else:
        landmark_dbs = {rid: fixtures_mod.gen_landmark_db(r) for rid, r in routes.items()}

    host, _, port_s = bind.partition(":")
    try:
        port = int(port_s or "8787")
    except ValueError:
        print(f"nav serve: bad bind address {bind!r}")
        return 2

    app = create_app(routes, landmark_dbs, out_dir=out_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="warning")
    except OSError as exc:
        print(f"nav serve: cannot bind {bind}: {exc}")
        return 2
    except SystemExit as exc:
        # uvicorn exits this way when it cannot bind
        if exc.code:
            print(f"nav serve: server failed to start on {bind}")
            return 2
    return 0
