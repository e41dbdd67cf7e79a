"""Telemetry ingestion: newline-delimited JSON readings from files or a socket.

One grammar serves both transports; readings funnel through a single
ordered application path guarded by the watermark, so replaying a stored
file and receiving the same records live leave the twin in byte-identical
state. Rejected readings (stale or malformed) never mutate state.
"""

from __future__ import annotations

import hashlib
import json
import math
import socketserver
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .city import CityGraph, UnknownIdError
from .twin import DAMAGE_STATES, ReportMarker

READING_KINDS = ("occupancy", "structural", "utility", "report")


class FeedFormatError(ValueError):
    """A reading line failed to parse or violates the reading schema."""


class ReplayOrderError(ValueError):
    """A replay file is not sorted by timestamp."""


class StaleReadingError(ValueError):
    """Reading timestamp is behind the watermark beyond tolerance."""


@dataclass(frozen=True)
class SensorReading:
    ts: float  # seconds since scenario origin, >= 0
    sensor_id: str
    kind: str  # occupancy | structural | utility | report
    target_id: str  # building/edge/infra id, or zone name for reports
    value: float | int | str

    def to_line(self) -> str:
        return json.dumps(
            {
                "ts": self.ts,
                "sensor_id": self.sensor_id,
                "kind": self.kind,
                "target_id": self.target_id,
                "value": self.value,
            },
            separators=(",", ":"),
        )


def parse_reading(line: str) -> SensorReading:
    """Parse one feed line into a validated reading.

    Malformed lines report the byte offset of the JSON error within the
    line; schema violations name the offending field.
    """
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FeedFormatError(f"malformed line at byte offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise FeedFormatError("reading must be a JSON object")
    try:
        ts = float(raw["ts"])
        sensor_id = str(raw["sensor_id"])
        kind = str(raw["kind"])
        target_id = str(raw["target_id"])
        value = raw["value"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FeedFormatError(f"reading missing/bad field ({exc})") from exc
    if ts < 0:
        raise FeedFormatError(f"negative timestamp {ts}")
    if kind not in READING_KINDS:
        raise FeedFormatError(f"unknown reading kind {kind!r}")
    if not isinstance(value, (int, float, str)):
        raise FeedFormatError(f"value must be a number or token, got {type(value).__name__}")
    return SensorReading(ts=ts, sensor_id=sensor_id, kind=kind, target_id=target_id, value=value)


@dataclass
class TwinState:
    """Mutable ingestion-facing twin state: what sensors are allowed to touch.

    Sensor data wins over simulation: damage/infra overrides recorded here
    are merged over computed snapshots at serving time. Occupancy is only
    writable before the disaster is applied (it is captured at t0).
    Counters are diagnostics and deliberately excluded from state_hash().
    """

    city: CityGraph
    tolerance_s: float = 0.0
    watermark: float = 0.0
    disaster_applied: bool = False
    occupancy: dict[str, int] = field(default_factory=dict)
    damage_override: dict[str, str] = field(default_factory=dict)
    infra_override: dict[str, str] = field(default_factory=dict)
    reports: list[ReportMarker] = field(default_factory=list)
    applied_count: int = 0
    stale_count: int = 0
    occupancy_ignored: int = 0

    def __post_init__(self):
        if not self.occupancy:
            self.occupancy = {b.id: b.occupancy for b in self.city.buildings}

    def effective_occupancy(self) -> dict[str, int]:
        """Current occupancy per building (city defaults plus sensor updates)."""
        return dict(self.occupancy)

    def state_hash(self) -> str:
        payload = {
            "occupancy": self.occupancy,
            "damage_override": self.damage_override,
            "infra_override": self.infra_override,
            "reports": [{"zone": r.zone, "count": r.count} for r in self.reports],
            "watermark": self.watermark,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _as_count(value, what: str) -> int:
    try:
        count = int(value)
    except (TypeError, ValueError) as exc:
        raise FeedFormatError(f"{what} must be an integer, got {value!r}") from exc
    return count


def apply_reading(state: TwinState, reading: SensorReading) -> TwinState:
    """Apply one reading to the twin state, enforcing watermark order.

    Stale readings (ts < watermark - tolerance) are rejected and counted
    without touching state. Unknown targets raise before any mutation.
    Returns the same state object for call chaining.
    """
    if reading.ts < state.watermark - state.tolerance_s:
        state.stale_count += 1
        return state

    if reading.kind == "occupancy":
        if reading.target_id not in state.city.building_by_id:
            raise UnknownIdError(f"occupancy reading for unknown building {reading.target_id!r}")
        occupancy = _as_count(reading.value, "occupancy")
        if occupancy < 0:
            raise FeedFormatError(f"occupancy must be >= 0, got {occupancy}")
        if state.disaster_applied:
            state.occupancy_ignored += 1  # captured at t0; post-disaster updates ignored
        else:
            state.occupancy[reading.target_id] = occupancy
    elif reading.kind == "structural":
        if reading.target_id not in state.city.building_by_id:
            raise UnknownIdError(f"structural reading for unknown building {reading.target_id!r}")
        if reading.value not in DAMAGE_STATES:
            raise FeedFormatError(f"structural value must be one of {DAMAGE_STATES}")
        state.damage_override[reading.target_id] = str(reading.value)
    elif reading.kind == "utility":
        if reading.target_id not in state.city.infra_by_id:
            raise UnknownIdError(f"utility reading for unknown infra {reading.target_id!r}")
        if reading.value not in ("up", "down"):
            raise FeedFormatError("utility value must be 'up' or 'down'")
        state.infra_override[reading.target_id] = str(reading.value)
    elif reading.kind == "report":
        state.reports.append(
            ReportMarker(zone=reading.target_id, count=_as_count(reading.value, "report count"))
        )
    else:  # pragma: no cover - parse_reading rejects unknown kinds
        raise FeedFormatError(f"unknown reading kind {reading.kind!r}")

    state.watermark = max(state.watermark, reading.ts)
    state.applied_count += 1
    return state


def replay(file: str | Path, speed: float = math.inf) -> Iterator[SensorReading]:
    """Stream readings from a stored *.ndjson file in timestamp order.

    Inter-arrival gaps are paced by 1/speed; speed=inf emits as fast as
    possible. Unsorted files and parse failures raise, naming the line.
    """
    if speed <= 0:
        raise ValueError(f"speed must be > 0, got {speed}")
    path = Path(file)
    prev_ts: float | None = None
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                reading = parse_reading(line)
            except FeedFormatError as exc:
                raise FeedFormatError(f"{path}:{lineno}: {exc}") from exc
            if prev_ts is not None and reading.ts < prev_ts:
                raise ReplayOrderError(
                    f"{path}:{lineno}: unsorted input (ts {reading.ts} after {prev_ts})"
                )
            if prev_ts is not None and math.isfinite(speed):
                gap = (reading.ts - prev_ts) / speed
                if gap > 0:
                    time.sleep(gap)
            prev_ts = reading.ts
            yield reading


def replay_into(
    state: TwinState, file: str | Path, speed: float = math.inf, lock: threading.Lock | None = None
) -> int:
    """Replay a file into the twin state; returns the number of lines consumed."""
    count = 0
    for reading in replay(file, speed):
        if lock is not None:
            with lock:
                apply_reading(state, reading)
        else:
            apply_reading(state, reading)
        count += 1
    return count


class _FeedHandler(socketserver.StreamRequestHandler):
    """One connection of the line-oriented live feed.

    Protocol errors get a one-line JSON error record, then the connection
    closes. Stale readings are not protocol errors: they are counted and
    the connection stays open.
    """

    def handle(self):
        server: FeedServer = self.server  # type: ignore[assignment]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            try:
                reading = parse_reading(line)
                with server.apply_lock:
                    apply_reading(server.state, reading)
                    server.consumed += 1
            except (FeedFormatError, UnknownIdError, ValueError) as exc:
                err = json.dumps({"error": str(exc)}) + "\n"
                try:
                    self.wfile.write(err.encode("utf-8"))
                except OSError:
                    pass
                server.protocol_errors += 1
                return  # close connection on protocol error


class FeedServer(socketserver.ThreadingTCPServer):
    """Plain TCP ingress for the live line protocol; transport-agnostic."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        state: TwinState,
        host: str = "127.0.0.1",
        port: int = 0,
        lock: threading.Lock | None = None,
    ):
        super().__init__((host, port), _FeedHandler)
        self.state = state
        # share the session's writer lock when wired into a server process
        self.apply_lock = lock if lock is not None else threading.Lock()
        self.consumed = 0
        self.protocol_errors = 0

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
