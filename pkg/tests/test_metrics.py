import json
import logging
import math

import pytest

from navkit.fixtures import gen_replica_routes
from navkit.geo import GeoPoint, HeadingDeg, unproject_local
from navkit.metrics import (
    CSV_HEADER,
    MetricsError,
    RunRecord,
    TooFewPois,
    aggregate,
    load_run_record,
    make_event,
    pointing_error,
    pointing_truth,
    read_event_log,
    save_run_record,
    write_event_log,
    write_summary_csv,
)
from navkit.route import load_route

BASE = GeoPoint(37.42, -122.08)


def _poi(name, e, n):
    p = unproject_local(BASE, e, n)
    return {"name": name, "lat": p.lat_deg, "lon": p.lon_deg}


def route_with_pois(pois):
    a = unproject_local(BASE, 0, 0)
    b = unproject_local(BASE, 0, 100)
    return load_route(
        {
            "id": "p",
            "polyline": [[a.lat_deg, a.lon_deg], [b.lat_deg, b.lon_deg]],
            "steps": [{"instruction": "go", "start": [a.lat_deg, a.lon_deg],
                       "end": [b.lat_deg, b.lon_deg], "distance_m": 100.0,
                       "maneuver": "arrive"}],
            "pois": pois,
            "dead_end_index": None,
        }
    )


def test_pointing_truth_colinear_north():
    # earlier POIs all due north of the final one
    route = route_with_pois([
        _poi("p1", 0, 300), _poi("p2", 0, 200), _poi("p3", 0, 100), _poi("end", 0, 0),
    ])
    task = pointing_truth(route)
    assert len(task.true_bearings) == 3
    for b in task.true_bearings:
        assert b.value == pytest.approx(0.0, abs=1e-6)


def test_pointing_truth_square_layout():
    # from the final POI at the origin: west, northwest, north
    route = route_with_pois([
        _poi("w", -100, 0), _poi("nw", -100, 100), _poi("n", 0, 100), _poi("end", 0, 0),
    ])
    task = pointing_truth(route)
    got = [b.value for b in task.true_bearings]
    assert got[0] == pytest.approx(270.0, abs=0.01)
    assert got[1] == pytest.approx(315.0, abs=0.01)
    assert got[2] == pytest.approx(0.0, abs=0.01)


def test_pointing_truth_replica_has_four_targets():
    task = pointing_truth(gen_replica_routes()["r1"])
    assert len(task.true_bearings) == 4


def test_pointing_truth_too_few():
    with pytest.raises(TooFewPois):
        pointing_truth(route_with_pois([_poi("only", 0, 0)]))


def test_pointing_error_cases():
    route = route_with_pois([
        _poi("w", -100, 0), _poi("nw", -100, 100), _poi("n", 0, 100), _poi("end", 0, 0),
    ])
    task = pointing_truth(route)
    truth = [b.value for b in task.true_bearings]

    assert pointing_error(task, truth) == pytest.approx([0.0, 0.0, 0.0], abs=1e-9)
    flipped = [HeadingDeg(v + 180.0) for v in truth]
    assert pointing_error(task, flipped) == pytest.approx([180.0] * 3, abs=1e-9)
    wrapped = [HeadingDeg(v + 30.0) for v in truth]
    assert pointing_error(task, wrapped) == pytest.approx([30.0] * 3, abs=1e-9)

    with pytest.raises(MetricsError):
        pointing_error(task, truth[:-1])


def rec(condition="ai-sa", route_id="r1", seed=1, dev=0, dist=650.0, **kw):
    return RunRecord(route_id=route_id, condition=condition, seed=seed,
                     distance_walked_m=dist, deviation_count=dev, **kw)


def test_aggregate_single_record_collapses_quantiles():
    rows = aggregate([rec(dev=3)])
    row = [r for r in rows if r.measure == "deviation_count"][0]
    assert row.minimum == row.q1 == row.median == row.q3 == row.maximum == 3.0
    assert row.sd == 0.0


def test_aggregate_quantile_method():
    records = [rec(seed=i, dev=d) for i, d in enumerate([1, 2, 3, 4, 5])]
    row = [r for r in aggregate(records) if r.measure == "deviation_count"][0]
    assert (row.minimum, row.q1, row.median, row.q3, row.maximum) == (1, 2, 3, 4, 5)
    assert row.mean == 3.0


def test_aggregate_permutation_invariant():
    records = [rec(seed=i, dev=d, dist=600 + d) for i, d in enumerate([5, 1, 4, 2, 3])]
    assert aggregate(records) == aggregate(list(reversed(records)))


def test_aggregate_warns_and_omits_empty_measure(caplog):
    with caplog.at_level(logging.WARNING):
        rows = aggregate([rec()])  # no pointing errors, no latencies
    measures = {r.measure for r in rows}
    assert "pointing_error_deg" not in measures
    assert "latency_s" not in measures
    assert any("row omitted" in m for m in caplog.messages)


def test_run_record_round_trip(tmp_path):
    r = rec(dev=2, deviation_intervals=[(10.0, 14.5, 12.25), (100.0, 103.0, 11.0)],
            pointing_errors_deg=[12.5, 3.25, 90.0, 179.5],
            latency_samples_s=[2.25, 3.5])
    path = str(tmp_path / "run.json")
    save_run_record(path, r)
    again = load_run_record(path)
    assert again == r


def test_run_record_validation():
    with pytest.raises(MetricsError):
        rec(pointing_errors_deg=[200.0])
    with pytest.raises(MetricsError):
        RunRecord(route_id="r1", condition="gmaps", seed=1, completed=False)


def test_event_log_round_trip(tmp_path):
    events = [
        make_event(0.1, "pose", pos=[37.42, -122.08], heading_deg=12.5, speed_mps=1.38),
        make_event(5.0, "beacon_on", azimuth_deg=30.0),
        make_event(9.0, "run_end", completed=True),
    ]
    path = str(tmp_path / "log.jsonl")
    write_event_log(path, events)
    assert read_event_log(path) == events
    # identical content writes identical bytes
    path2 = str(tmp_path / "log2.jsonl")
    write_event_log(path2, events)
    assert open(path, "rb").read() == open(path2, "rb").read()


def test_unknown_event_kind_rejected():
    with pytest.raises(MetricsError):
        make_event(0.0, "mystery")


def test_csv_header_schema(tmp_path):
    rows = aggregate([rec(seed=i, dev=i) for i in range(5)])
    path = str(tmp_path / "summary.csv")
    write_summary_csv(path, rows)
    lines = open(path).read().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[0] == "condition,route,measure,min,q1,median,q3,max,mean,sd"
    assert len(lines) == 1 + len(rows)
