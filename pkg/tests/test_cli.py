import json
import os
import subprocess
import sys

import pytest

from navkit.cli import main


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixtures")
    assert main(["fixtures", "--out", str(d)]) == 0
    return d


def test_missing_required_arg_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--condition", "gmaps", "--out", "x"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_route_file_exits_2(tmp_path, capsys):
    code = main(["run", "--route", str(tmp_path / "nope.json"),
                 "--condition", "gmaps", "--out", str(tmp_path)])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_fixtures_written(fixture_dir):
    names = sorted(os.listdir(fixture_dir))
    assert "r1.json" in names and "landmarks_r3.json" in names


def test_metrics_route_prints_table_values(fixture_dir, capsys):
    assert main(["metrics", "route", "--route", str(fixture_dir / "r1.json")]) == 0
    out = capsys.readouterr().out
    vals = dict(line.split() for line in out.strip().splitlines())
    assert vals["intersections"] == "9"
    assert vals["turns"] == "8"
    assert abs(float(vals["distance_m"]) - 650.0) <= 1.0


def test_run_seed_range_writes_files(fixture_dir, tmp_path, capsys):
    out = tmp_path / "runs"
    code = main(["run", "--route", str(fixture_dir / "r2.json"),
                 "--condition", "ai-sa", "--seeds", "1..3",
                 "--out", str(out), "--pose-stride", "0"])
    assert code == 0
    names = sorted(os.listdir(out))
    assert sum(1 for n in names if n.startswith("events_")) == 3
    assert sum(1 for n in names if n.startswith("record_")) == 3


def test_run_is_deterministic(fixture_dir, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--route", str(fixture_dir / "r2.json"),
                     "--condition", "ai-only", "--seed", "9",
                     "--out", str(out)]) == 0
    fa = sorted(os.listdir(a))
    assert fa == sorted(os.listdir(b))
    for name in fa:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_metrics_runs_aggregates(fixture_dir, tmp_path, capsys):
    out = tmp_path / "runs"
    main(["run", "--route", str(fixture_dir / "r2.json"), "--condition", "gmaps",
          "--seeds", "1..2", "--out", str(out), "--pose-stride", "0"])
    csv_path = tmp_path / "summary.csv"
    json_path = tmp_path / "summary.json"
    assert main(["metrics", "runs", "--in", str(out),
                 "--csv", str(csv_path), "--json", str(json_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "condition,route,measure,min,q1,median,q3,max,mean,sd"
    assert len(lines) > 1
    assert json.loads(json_path.read_text())


def test_metrics_runs_empty_dir_exits_2(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["metrics", "runs", "--in", str(empty), "--csv", str(tmp_path / "x.csv")])
    assert code == 2


def test_bad_seed_range_exits_2(fixture_dir, tmp_path, capsys):
    code = main(["run", "--route", str(fixture_dir / "r1.json"),
                 "--condition", "gmaps", "--seeds", "5..1", "--out", str(tmp_path)])
    assert code == 2


def test_serve_port_busy_exits_2(fixture_dir):
    import socket

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.listen(1)
    try:
        proc = subprocess.run(
            [sys.executable, "-m", "navkit.cli", "serve",
             "--routes", str(fixture_dir), "--bind", f"127.0.0.1:{port}"],
            capture_output=True, timeout=30,
        )
        assert proc.returncode == 2
    finally:
        sock.close()
