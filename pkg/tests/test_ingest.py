import json
import math
import socket
import time

import pytest

from dtdms.city import UnknownIdError
from dtdms.ingest import (
    FeedFormatError,
    FeedServer,
    ReplayOrderError,
    SensorReading,
    TwinState,
    apply_reading,
    parse_reading,
    replay,
    replay_into,
)

from conftest import make_city


def feed_city():
    return make_city(
        nodes=[("n1", 0.0, 0.0), ("n2", 0.0, 0.01)],
        edges=[("e1", "n1", "n2", 800.0)],
        buildings=[("B1", "n1", 10, 0.0), ("B2", "n2", 20, 0.0)],
        centers=[("rc", "n2", [("t1", "search")])],
        infrastructure={"water": [("w3", "n1")], "telecom": [("tc1", "n2")]},
    )


def test_parse_wellformed_reading():
    r = parse_reading('{"ts":10,"sensor_id":"s1","kind":"occupancy","target_id":"B1","value":42}')
    assert r == SensorReading(ts=10.0, sensor_id="s1", kind="occupancy", target_id="B1", value=42)


def test_parse_negative_timestamp_rejected():
    with pytest.raises(FeedFormatError, match="negative timestamp"):
        parse_reading('{"ts":-5,"sensor_id":"s1","kind":"occupancy","target_id":"B1","value":1}')


def test_parse_garbage_reports_offset():
    with pytest.raises(FeedFormatError, match="byte offset"):
        parse_reading("not json at all")


def test_parse_unknown_kind_rejected():
    with pytest.raises(FeedFormatError, match="unknown reading kind"):
        parse_reading('{"ts":1,"sensor_id":"s","kind":"seismic","target_id":"B1","value":1}')


def test_occupancy_updates_before_disaster_only():
    state = TwinState(city=feed_city())
    apply_reading(state, SensorReading(1.0, "s1", "occupancy", "B1", 42))
    assert state.occupancy["B1"] == 42
    state.disaster_applied = True
    apply_reading(state, SensorReading(2.0, "s1", "occupancy", "B1", 99))
    assert state.occupancy["B1"] == 42  # frozen at t0
    assert state.occupancy_ignored == 1


def test_utility_reading_flips_infra():
    state = TwinState(city=feed_city())
    apply_reading(state, SensorReading(5.0, "s2", "utility", "w3", "down"))
    assert state.infra_override["w3"] == "down"


def test_structural_reading_overrides_damage():
    state = TwinState(city=feed_city())
    apply_reading(state, SensorReading(5.0, "s2", "structural", "B2", "collapsed"))
    assert state.damage_override["B2"] == "collapsed"
    with pytest.raises(FeedFormatError, match="structural"):
        apply_reading(state, SensorReading(6.0, "s2", "structural", "B2", "obliterated"))


def test_report_reading_appends_marker():
    state = TwinState(city=feed_city())
    apply_reading(state, SensorReading(5.0, "s3", "report", "old-town", 3))
    assert [(m.zone, m.count) for m in state.reports] == [("old-town", 3)]


def test_non_integer_counts_rejected():
    state = TwinState(city=feed_city())
    with pytest.raises(FeedFormatError, match="integer"):
        apply_reading(state, SensorReading(1.0, "s1", "occupancy", "B1", "lots"))
    with pytest.raises(FeedFormatError, match="integer"):
        apply_reading(state, SensorReading(2.0, "s1", "report", "zone-a", "several"))
    assert state.applied_count == 0


def test_unknown_target_rejected_without_mutation():
    state = TwinState(city=feed_city())
    before = state.state_hash()
    with pytest.raises(UnknownIdError, match="nope"):
        apply_reading(state, SensorReading(5.0, "s1", "occupancy", "nope", 1))
    assert state.state_hash() == before


def test_stale_reading_rejected_and_counted():
    state = TwinState(city=feed_city())
    apply_reading(state, SensorReading(10.0, "s1", "occupancy", "B1", 5))
    before = state.state_hash()
    apply_reading(state, SensorReading(9.0, "s1", "occupancy", "B1", 7))
    assert state.stale_count == 1
    assert state.state_hash() == before  # nothing mutated
    # equal-to-watermark is fine under zero tolerance
    apply_reading(state, SensorReading(10.0, "s1", "occupancy", "B1", 8))
    assert state.occupancy["B1"] == 8


def test_tolerance_admits_slightly_late_readings():
    state = TwinState(city=feed_city(), tolerance_s=5.0)
    apply_reading(state, SensorReading(10.0, "s1", "occupancy", "B1", 5))
    apply_reading(state, SensorReading(6.0, "s1", "occupancy", "B1", 6))
    assert state.occupancy["B1"] == 6
    assert state.stale_count == 0
    assert state.watermark == 10.0  # watermark never regresses


def test_watermark_nondecreasing():
    state = TwinState(city=feed_city())
    marks = []
    for ts in (0.0, 3.0, 3.0, 8.0, 2.0, 9.0):
        apply_reading(state, SensorReading(ts, "s", "report", "zone-a", 1))
        marks.append(state.watermark)
    assert marks == sorted(marks)


def write_feed(tmp_path, lines):
    p = tmp_path / "feed.ndjson"
    p.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return p


def reading_line(ts, kind="occupancy", target="B1", value=1, sensor="s1"):
    return json.dumps(
        {"ts": ts, "sensor_id": sensor, "kind": kind, "target_id": target, "value": value}
    )


def test_replay_passthrough_order(tmp_path):
    p = write_feed(tmp_path, [reading_line(1), reading_line(2), reading_line(3)])
    out = list(replay(p, speed=math.inf))
    assert [r.ts for r in out] == [1.0, 2.0, 3.0]


def test_replay_unsorted_names_line(tmp_path):
    p = write_feed(tmp_path, [reading_line(5), reading_line(3)])
    with pytest.raises(ReplayOrderError, match=":2"):
        list(replay(p, speed=math.inf))


def test_replay_empty_file_is_empty_stream(tmp_path):
    p = write_feed(tmp_path, [])
    assert list(replay(p, speed=math.inf)) == []


def test_replay_parse_error_names_line(tmp_path):
    p = write_feed(tmp_path, [reading_line(1), "garbage"])
    with pytest.raises(FeedFormatError, match=":2"):
        list(replay(p, speed=math.inf))


def test_replay_paces_by_speed(tmp_path):
    p = write_feed(tmp_path, [reading_line(0), reading_line(0.4)])
    t0 = time.monotonic()
    list(replay(p, speed=2.0))  # 0.4 s gap at 2x -> ~0.2 s
    elapsed = time.monotonic() - t0
    assert elapsed >= 0.15


def fixture_lines(n=200):
    lines = []
    for i in range(n):
        kind = ("occupancy", "utility", "structural", "report")[i % 4]
        if kind == "occupancy":
            lines.append(reading_line(i, "occupancy", "B1" if i % 8 else "B2", i % 50))
        elif kind == "utility":
            lines.append(reading_line(i, "utility", "w3" if i % 8 == 1 else "tc1", "down" if i % 3 else "up"))
        elif kind == "structural":
            lines.append(reading_line(i, "structural", "B2", ("damaged", "collapsed")[i % 2]))
        else:
            lines.append(reading_line(i, "report", f"zone-{i % 5}", 1 + i % 3))
    return lines


def test_replay_equals_live_socket_ingestion(tmp_path):
    lines = fixture_lines(200)
    p = write_feed(tmp_path, lines)

    replayed = TwinState(city=feed_city())
    assert replay_into(replayed, p) == 200

    live = TwinState(city=feed_city())
    server = FeedServer(live)
    server.start_background()
    try:
        with socket.create_connection(("127.0.0.1", server.port), timeout=5) as sock:
            sock.sendall(("\n".join(lines) + "\n").encode("utf-8"))
        deadline = time.monotonic() + 10
        while server.consumed < 200 and time.monotonic() < deadline:
            time.sleep(0.01)
    finally:
        server.shutdown()
    assert server.consumed == 200
    assert live.state_hash() == replayed.state_hash()


def test_socket_protocol_error_gets_error_record_and_close():
    state = TwinState(city=feed_city())
    server = FeedServer(state)
    server.start_background()
    try:
        with socket.create_connection(("127.0.0.1", server.port), timeout=5) as sock:
            sock.sendall(b"this is not json\n")
            sock.settimeout(5)
            data = sock.recv(4096)
            assert b"error" in data
            # server closes after the error record
            rest = sock.recv(4096)
            assert rest == b""
    finally:
        server.shutdown()
    assert server.protocol_errors == 1
