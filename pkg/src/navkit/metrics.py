# Dependent measures and export formats: per-run records, the pointing
# task, event logs (JSON lines), and summary aggregation to CSV/JSON.

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geo import GeoPoint, HeadingDeg, bearing_deg, signed_delta
from .route import Route

log = logging.getLogger(__name__)

EVENT_KINDS = (
    "pose", "turn_reached", "deviation_start", "deviation_end",
    "beacon_on", "beacon_off", "prompt_fired", "utterance", "run_end",
)

CSV_HEADER = "condition,route,measure,min,q1,median,q3,max,mean,sd"


class MetricsError(ValueError):
    pass


class TooFewPois(MetricsError):
    pass


@dataclass
class RunRecord:
    """One run's measure bundle; serialized one JSON document per run."""

    route_id: str
    condition: str
    seed: int
    distance_walked_m: float = 0.0
    deviation_count: int = 0
    deviation_intervals: list[tuple[float, float, float]] = field(default_factory=list)
    pointing_errors_deg: list[float] = field(default_factory=list)
    latency_samples_s: list[float] = field(default_factory=list)
    completed: bool = True
    note: Optional[str] = None

    def __post_init__(self):
        for e in self.pointing_errors_deg:
            if not 0.0 <= e <= 180.0:
                raise MetricsError(f"pointing error {e} outside [0, 180]")
        if not self.completed and not self.note:
            raise MetricsError("incomplete run needs a note")

    def to_dict(self) -> dict:
        return {
            "route_id": self.route_id,
            "condition": self.condition,
            "seed": self.seed,
            "distance_walked_m": self.distance_walked_m,
            "deviation_count": self.deviation_count,
            "deviation_intervals": [list(iv) for iv in self.deviation_intervals],
            "pointing_errors_deg": list(self.pointing_errors_deg),
            "latency_samples_s": list(self.latency_samples_s),
            "completed": self.completed,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        return cls(
            route_id=doc["route_id"],
            condition=doc["condition"],
            seed=int(doc["seed"]),
            distance_walked_m=float(doc["distance_walked_m"]),
            deviation_count=int(doc["deviation_count"]),
            deviation_intervals=[tuple(iv) for iv in doc["deviation_intervals"]],
            pointing_errors_deg=[float(v) for v in doc["pointing_errors_deg"]],
            latency_samples_s=[float(v) for v in doc["latency_samples_s"]],
            completed=bool(doc["completed"]),
            note=doc.get("note"),
        )


def save_run_record(path: str, record: RunRecord) -> None:
    with open(path, "w") as fh:
        json.dump(record.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_run_record(path: str) -> RunRecord:
    with open(path) as fh:
        return RunRecord.from_dict(json.load(fh))


def make_event(t: float, kind: str, **payload) -> dict:
    if kind not in EVENT_KINDS:
        raise MetricsError(f"unknown event kind {kind!r}")
    return {"t": t, "kind": kind, "payload": payload}


def write_event_log(path: str, events: Sequence[dict]) -> None:
    """One event per line; key order fixed so identical inputs give identical bytes."""
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(ev, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_event_log(path: str) -> list[dict]:
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


@dataclass(frozen=True)
class PointingTask:
    """Post-run spatial probe: aim from the final POI at each earlier one."""

    origin: GeoPoint
    target_names: tuple[str, ...]
    true_bearings: tuple[HeadingDeg, ...]


def pointing_truth(route: Route) -> PointingTask:
    """True bearings from the final POI back to each earlier POI, in order.

    Raises:
        TooFewPois: the route has fewer than two POIs.
    """
    if len(route.pois) < 2:
        raise TooFewPois(f"route {route.id!r} has {len(route.pois)} POIs")
    origin_name, origin = route.pois[-1]
    targets = route.pois[:-1]
    return PointingTask(
        origin=origin,
        target_names=tuple(name for name, _ in targets),
        true_bearings=tuple(bearing_deg(origin, p) for _, p in targets),
    )


def pointing_error(task: PointingTask, pointed: Sequence[HeadingDeg | float]) -> list[float]:
    """Absolute angular error per target, degrees in [0, 180]."""
    if len(pointed) != len(task.true_bearings):
        raise MetricsError(
            f"expected {len(task.true_bearings)} headings, got {len(pointed)}"
        )
    out = []
    for truth, aim in zip(task.true_bearings, pointed):
        h = aim if isinstance(aim, HeadingDeg) else HeadingDeg(float(aim))
        out.append(abs(signed_delta(truth, h).value))
    return out


@dataclass(frozen=True)
class SummaryRow:
    condition: str
    route: str
    measure: str
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    sd: float


def _measures(record: RunRecord) -> dict[str, Optional[float]]:
    return {
        "distance_walked_m": record.distance_walked_m,
        "deviation_count": float(record.deviation_count),
        "pointing_error_deg": (
            float(np.mean(record.pointing_errors_deg)) if record.pointing_errors_deg else None
        ),
        "latency_s": (
            float(np.mean(record.latency_samples_s)) if record.latency_samples_s else None
        ),
    }


def aggregate(records: Sequence[RunRecord]) -> list[SummaryRow]:
    """Five-number summary plus mean/sd per condition, route, and measure.

    Quantiles use linear interpolation (inclusive), so min/max are exact
    sample extremes. Permutation-invariant over the input records.
    """
    if not records:
        raise MetricsError("no records to aggregate")
    cells: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        cells.setdefault((r.condition, r.route_id), []).append(r)

    rows = []
    for (condition, route_id) in sorted(cells):
        group = cells[(condition, route_id)]
        for measure in ("distance_walked_m", "deviation_count", "pointing_error_deg", "latency_s"):
            vals = [m for r in group if (m := _measures(r)[measure]) is not None]
            if not vals:
                log.warning("no %s values for condition=%s route=%s; row omitted",
                            measure, condition, route_id)
                continue
            arr = np.asarray(vals, dtype=float)
            q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
            rows.append(
                SummaryRow(
                    condition=condition,
                    route=route_id,
                    measure=measure,
                    minimum=float(q[0]), q1=float(q[1]), median=float(q[2]),
                    q3=float(q[3]), maximum=float(q[4]),
                    mean=float(arr.mean()),
                    sd=float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
                )
            )
    return rows


def write_summary_csv(path: str, rows: Sequence[SummaryRow]) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.condition},{r.route},{r.measure},"
                f"{r.minimum:.6g},{r.q1:.6g},{r.median:.6g},{r.q3:.6g},{r.maximum:.6g},"
                f"{r.mean:.6g},{r.sd:.6g}\n"
            )


def write_summary_json(path: str, rows: Sequence[SummaryRow]) -> None:
    docs = [
        {
            "condition": r.condition, "route": r.route, "measure": r.measure,
            "min": r.minimum, "q1": r.q1, "median": r.median, "q3": r.q3,
            "max": r.maximum, "mean": r.mean, "sd": r.sd,
        }
        for r in rows
    ]
    with open(path, "w") as fh:
        json.dump(docs, fh, indent=2, sort_keys=True)
        fh.write("\n")


def deviation_start_points(events: Sequence[dict]) -> list[GeoPoint]:
    """Positions where deviations began, pulled from an event log."""
    out = []
    for ev in events:
        if ev["kind"] == "deviation_start":
            p = ev["payload"]["pos"]
            out.append(GeoPoint(p[0], p[1]))
    return out
