# Instruction synthesis: guidance-model system prompt, deterministic
# landmark-anchored mock, remote model client, left/right consistency
# validation, and the cardinal-phrasing baseline generator.

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Protocol, Sequence

import requests

from .geo import GeoPoint, bearing_deg, distance_m, signed_delta
from .prompting import ContextPacket

VLM_URL_ENV = "NAV_VLM_URL"
VLM_KEY_ENV = "NAV_VLM_KEY"

# Simulated camera: landmarks are "visible" inside this cone.
FOV_HALF_ANGLE_DEG = 30.0
FOV_RANGE_M = 40.0

WRONG_FACING_DEG = 25.0

CARDINAL_WORDS = ("north", "south", "east", "west")

_SYSTEM_TEMPLATE = """\
You are the spoken guide of a hands-free walking-navigation assistant.
You receive one point-of-view photo plus metadata: the walker's position,
facing direction, and the direction and distance to their next turn.
Reply with one short spoken instruction that obeys every rule below.

Rules:
1. Speak egocentrically (left/right/ahead/behind relative to the walker);
   never use compass directions such as {cardinals}.
2. Anchor the instruction to one landmark visible in the photo, state which
   side of the walker it is on, and report its bounding box in the image so
   the side can be cross-checked against the pixels.
3. If the walker is facing the wrong way, first tell them to turn, then say
   where the landmark will end up (on their side or behind them).
4. If the next turn is more than {far_threshold_m:.0f} meters away, tell the
   walker to continue forward.
5. Say the turn guidance first; descriptive context comes after it.
6. Mention only things actually visible in the photo; never invent a
   landmark or detail.

Reply as JSON: {{"utterance": str, "landmark": str|null,
"side": "left"|"right"|"ahead"|"behind"|null,
"bbox": [x0, y0, x1, y1]|null}} with bbox coordinates normalized to [0, 1].
"""


class InstructorError(ValueError):
    pass


class TransportError(InstructorError):
    """Remote model endpoint unreachable."""


class ParseError(InstructorError):
    """Remote reply violates the structured format."""


class Timeout(TransportError):
    """Remote model did not answer within the deadline."""


@dataclass(frozen=True)
class SystemInstruction:
    """System-prompt configuration for the instruction model."""

    far_threshold_m: float = 60.0
    template_text: str = _SYSTEM_TEMPLATE

    def render(self) -> str:
        return self.template_text.format(
            far_threshold_m=self.far_threshold_m,
            cardinals="/".join(CARDINAL_WORDS),
        )


@dataclass(frozen=True)
class Landmark:
    """A named environmental feature with a visual-uniqueness score."""

    name: str
    pos: GeoPoint
    uniqueness: float
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.uniqueness <= 1.0:
            raise InstructorError(f"uniqueness {self.uniqueness} outside [0, 1]")


@dataclass(frozen=True)
class InstructionResult:
    utterance: str
    landmark: Optional[Landmark] = None
    landmark_side: Optional[str] = None
    bbox: Optional[tuple[float, float, float, float]] = None
    latency_s: float = 0.0

    def __post_init__(self):
        if self.bbox is not None and self.landmark is None:
            raise InstructorError("bbox without a landmark")


def load_landmarks(document: bytes | str | list) -> list[Landmark]:
    """Parse the landmark DB file: a JSON list of name/lat/lon/uniqueness/tags."""
    if isinstance(document, (bytes, str)):
        document = json.loads(document)
    out = []
    for item in document:
        out.append(
            Landmark(
                name=str(item["name"]),
                pos=GeoPoint(float(item["lat"]), float(item["lon"])),
                uniqueness=float(item["uniqueness"]),
                tags=tuple(item.get("tags", ())),
            )
        )
    return out


def visible_landmarks(packet: ContextPacket, db: Sequence[Landmark]) -> list[tuple[Landmark, float, float]]:
    """Landmarks inside the simulated field of view, as (landmark, rel_deg, dist_m).

    rel_deg is signed relative to the walker's heading, positive to the right.
    """
    out = []
    for lm in db:
        d = distance_m(packet.pos, lm.pos)
        if d > FOV_RANGE_M or d < 0.5:
            continue
        rel = signed_delta(packet.heading, bearing_deg(packet.pos, lm.pos)).value
        if abs(rel) <= FOV_HALF_ANGLE_DEG:
            out.append((lm, rel, d))
    return out


def _pick_landmark(candidates: list[tuple[Landmark, float, float]]):
    """Highest uniqueness wins; distance breaks ties (nearer first)."""
    return min(candidates, key=lambda c: (-c[0].uniqueness, c[2], c[0].name))


def _side_word(rel_deg: float) -> str:
    if abs(rel_deg) <= 10.0:
        return "ahead"
    if abs(rel_deg) >= 165.0:
        return "behind"
    return "right" if rel_deg > 0 else "left"


def _bbox_for(rel_deg: float) -> tuple[float, float, float, float]:
    # map the in-view angle onto the image x axis; the y band is nominal
    cx = min(0.94, max(0.06, 0.5 + rel_deg / (2.0 * FOV_HALF_ANGLE_DEG)))
    return (round(cx - 0.06, 4), 0.35, round(cx + 0.06, 4), 0.65)


def _turn_phrase(maneuver: str) -> str:
    return {
        "turn-left": "Turn left",
        "turn-right": "Turn right",
        "u-turn": "Turn around",
        "arrive": "Continue ahead to your destination",
        "straight": "Continue straight",
    }[maneuver]


def synthesize_mock(
    packet: ContextPacket,
    db: Sequence[Landmark],
    cfg: SystemInstruction = SystemInstruction(),
    latency_sampler: Optional[Callable[[], float]] = None,
) -> InstructionResult:
    """Deterministic stand-in for the remote vision model.

    Applies the same rules the system prompt imposes: egocentric wording,
    far-away means continue forward, wrong-facing means turn first and
    position the landmark, otherwise turn at the most unique visible
    landmark. The utterance is a pure function of (packet, db, cfg);
    latency comes from the sampler when one is attached.
    """
    latency = latency_sampler() if latency_sampler is not None else 0.0
    candidates = visible_landmarks(packet, db)
    chosen = _pick_landmark(candidates) if candidates else None

    if packet.dist_to_turn_m > cfg.far_threshold_m:
        if chosen is not None:
            lm, rel, _ = chosen
            side = _side_word(rel)
            detail = f" past the {lm.name} on your {side}" if side in ("left", "right") else f" past the {lm.name}"
            return InstructionResult(
                utterance=f"Continue forward{detail}.",
                landmark=lm, landmark_side=side, bbox=_bbox_for(rel), latency_s=latency,
            )
        return InstructionResult(
            utterance="Continue forward along this street.", latency_s=latency,
        )

    if abs(packet.delta_to_turn.value) > WRONG_FACING_DEG:
        correction = "around" if abs(packet.delta_to_turn.value) > 135.0 else (
            "right" if packet.delta_to_turn.value > 0 else "left"
        )
        if chosen is not None:
            lm, rel, _ = chosen
            side = _side_word(rel)
            where = f"leaving the {lm.name} on your {side}" if side in ("left", "right") else f"leaving the {lm.name} behind you"
            return InstructionResult(
                utterance=f"Turn {correction}, {where}.",
                landmark=lm, landmark_side=side, bbox=_bbox_for(rel), latency_s=latency,
            )
        return InstructionResult(
            utterance=f"Turn {correction} to face your next turn.", latency_s=latency,
        )

    phrase = _turn_phrase(packet.step.maneuver)
    if chosen is not None:
        lm, rel, _ = chosen
        side = _side_word(rel)
        at = f"at the {lm.name} on your {side}" if side in ("left", "right") else f"at the {lm.name} just ahead"
        return InstructionResult(
            utterance=f"{phrase} {at}.",
            landmark=lm, landmark_side=side, bbox=_bbox_for(rel), latency_s=latency,
        )
    return InstructionResult(
        utterance=f"{phrase} at the next corner, {packet.dist_to_turn_m:.0f} meters ahead.",
        latency_s=latency,
    )


CONSISTENT = "consistent"
CORRECTED = "corrected"
UNVERIFIABLE = "unverifiable"


def validate_side(result: InstructionResult) -> tuple[str, InstructionResult]:
    """Cross-check the claimed landmark side against the bounding box.

    A box centered left of the image midline must be called "left", at or
    right of it "right". A mismatch returns a corrected copy with the side
    and the utterance's side word swapped. Without a bbox (or with an
    ahead/behind side, which the horizontal center cannot falsify) the
    result is unverifiable.
    """
    if result.bbox is None or result.landmark_side not in ("left", "right"):
        return UNVERIFIABLE, result
    cx = (result.bbox[0] + result.bbox[2]) / 2.0
    expected = "left" if cx < 0.5 else "right"
    if result.landmark_side == expected:
        return CONSISTENT, result
    swapped_text = _swap_side_words(result.utterance)
    return CORRECTED, replace(result, landmark_side=expected, utterance=swapped_text)


def _swap_side_words(text: str) -> str:
    sentinel = "\x00"
    out = text.replace("on your left", sentinel)
    out = out.replace("on your right", "on your left")
    return out.replace(sentinel, "on your right")


_CARDINAL_BUCKETS = (
    "north", "northeast", "east", "southeast", "south", "southwest", "west", "northwest",
)


def cardinal_name(bearing: float) -> str:
    """8-way compass bucket, 45-degree sectors with edges at 22.5 + k*45."""
    idx = int(((bearing % 360.0) + 22.5) // 45.0) % 8
    return _CARDINAL_BUCKETS[idx]


def baseline_instruction(packet: ContextPacket) -> InstructionResult:
    """Provider-style audio-only phrasing with cardinal directions.

    The first step is announced as "Head <cardinal> ..."; later steps as
    "In <distance> meters, <maneuver>" with the distance rounded to the
    nearest 10 m. No landmarks, no latency.
    """
    from .route import step_initial_bearing

    if packet.waypoint_index == 0:
        heading_name = cardinal_name(step_initial_bearing(packet.step).value)
        dist = _round_10(packet.step.distance_m)
        return InstructionResult(
            utterance=f"Head {heading_name} for {dist:.0f} meters."
        )
    dist = _round_10(packet.dist_to_turn_m)
    action = {
        "turn-left": "turn left",
        "turn-right": "turn right",
        "u-turn": "make a u-turn",
        "arrive": "arrive at your destination",
        "straight": "continue straight",
    }[packet.step.maneuver]
    return InstructionResult(utterance=f"In {dist:.0f} meters, {action}.")


def _round_10(x: float) -> float:
    return round(x / 10.0) * 10.0


class ModelClient(Protocol):
    def generate(self, system_text: str, metadata: dict, image_ref: str, timeout_s: float) -> str: ...


class StubModelClient:
    """Returns canned reply payloads; used by tests and offline demos."""

    def __init__(self, replies: Sequence[str]):
        self.replies = list(replies)
        self.calls: list[dict] = []
        self._i = 0

    def generate(self, system_text: str, metadata: dict, image_ref: str, timeout_s: float) -> str:
        self.calls.append({"system": system_text, "metadata": metadata, "image_ref": image_ref})
        reply = self.replies[min(self._i, len(self.replies) - 1)]
        self._i += 1
        return reply


class HttpModelClient:
    """POSTs the prompt bundle to a remote endpoint configured by environment."""

    def __init__(self, url: Optional[str] = None, api_key: Optional[str] = None):
        self.url = url or os.environ.get(VLM_URL_ENV, "")
        self.api_key = api_key if api_key is not None else os.environ.get(VLM_KEY_ENV, "")
        if not self.url:
            raise TransportError(f"no model endpoint: set {VLM_URL_ENV}")

    def generate(self, system_text: str, metadata: dict, image_ref: str, timeout_s: float) -> str:
        body = {"system": system_text, "metadata": metadata, "image_ref": image_ref}
        try:
            resp = requests.post(
                self.url,
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=timeout_s,
            )
            resp.raise_for_status()
            return resp.text
        except requests.Timeout as exc:
            raise Timeout(f"model did not answer within {timeout_s} s") from exc
        except requests.RequestException as exc:
            raise TransportError(f"model request failed: {exc}") from exc


def parse_model_reply(text: str) -> InstructionResult:
    """Parse the structured model reply (see docs/formats.md).

    Raises:
        ParseError: reply is not the documented JSON shape.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"reply is not JSON: {exc}") from exc
    if not isinstance(doc, dict) or "utterance" not in doc:
        raise ParseError("reply missing utterance field")
    utterance = str(doc["utterance"])

    landmark = None
    name = doc.get("landmark")
    if name:
        landmark = Landmark(
            name=str(name),
            pos=GeoPoint(float(doc.get("lat", 0.0)), float(doc.get("lon", 0.0))),
            uniqueness=float(doc.get("uniqueness", 0.5)),
        )
    side = doc.get("side")
    if side is not None and side not in ("left", "right", "ahead", "behind"):
        raise ParseError(f"bad side {side!r}")
    bbox = None
    if doc.get("bbox") is not None:
        raw = doc["bbox"]
        if not (isinstance(raw, (list, tuple)) and len(raw) == 4):
            raise ParseError(f"bad bbox {raw!r}")
        bbox = tuple(float(v) for v in raw)
        if not all(0.0 <= v <= 1.0 for v in bbox):
            raise ParseError(f"bbox {bbox} outside [0, 1]")
        if landmark is None:
            raise ParseError("bbox without landmark")
    return InstructionResult(
        utterance=utterance, landmark=landmark,
        landmark_side=side, bbox=bbox,
    )


def query_remote(
    packet: ContextPacket,
    cfg: SystemInstruction,
    client: ModelClient,
    timeout_s: float = 15.0,
) -> InstructionResult:
    """Send the context packet to a remote model and parse its reply.

    Wall-clock latency of the round trip is recorded on the result.
    """
    metadata = {
        "lat": packet.pos.lat_deg,
        "lon": packet.pos.lon_deg,
        "heading_deg": packet.heading.value,
        "delta_to_turn_deg": packet.delta_to_turn.value,
        "dist_to_turn_m": packet.dist_to_turn_m,
        "maneuver": packet.step.maneuver,
        "instruction": packet.step.instruction_text,
    }
    t0 = time.monotonic()
    reply = client.generate(cfg.render(), metadata, packet.image_ref, timeout_s)
    latency = time.monotonic() - t0
    result = parse_model_reply(reply)
    return replace(result, latency_s=latency)
