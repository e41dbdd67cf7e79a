"""Twin snapshots and the append-only timeline.

Snapshots are immutable values: once built and published they are never
mutated, which is what makes timeline scrubbing and deterministic replay
work. The timeline holds them in increasing time order behind a single
writer; readers may keep any snapshot they were handed.
"""

from __future__ import annotations

import hashlib
import json
import threading
from bisect import bisect_right
from dataclasses import dataclass

from .city import CityGraph, UnknownIdError

DAMAGE_STATES = ("intact", "damaged", "collapsed")


@dataclass(frozen=True)
class BuildingState:
    damage: str  # intact | damaged | collapsed
    trapped: int
    saved: int


@dataclass(frozen=True)
class TeamState:
    at: str  # node id
    busy_until: float  # seconds since scenario origin


@dataclass(frozen=True)
class ReportMarker:
    """Display-only marker from an unverified report (e.g. a classified tweet)."""

    zone: str
    count: int


@dataclass(frozen=True)
class TwinSnapshot:
    """Full twin state at one instant. Treat every field as read-only."""

    t: float
    building_state: dict[str, BuildingState]
    edge_passable: dict[str, bool]
    infra_status: dict[str, str]
    team_state: dict[str, TeamState]
    reports: tuple[ReportMarker, ...] = ()

    def total_trapped(self) -> int:
        return sum(s.trapped for s in self.building_state.values())

    def total_unsaved(self) -> int:
        return sum(s.trapped - s.saved for s in self.building_state.values())

    def collapsed_buildings(self) -> list[str]:
        return [bid for bid, s in self.building_state.items() if s.damage == "collapsed"]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "building_state": {
                bid: {"damage": s.damage, "trapped": s.trapped, "saved": s.saved}
                for bid, s in sorted(self.building_state.items())
            },
            "edge_passable": {eid: p for eid, p in sorted(self.edge_passable.items())},
            "infra_status": {iid: s for iid, s in sorted(self.infra_status.items())},
            "team_state": {
                tid: {"at": s.at, "busy_until": s.busy_until}
                for tid, s in sorted(self.team_state.items())
            },
            "reports": [{"zone": r.zone, "count": r.count} for r in self.reports],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def pre_disaster_snapshot(city: CityGraph) -> TwinSnapshot:
    """Synthesize the pre-disaster state: all intact, all passable, all up.

    Fully determined by the city, so it is never stored in the city file.
    """
    return TwinSnapshot(
        t=0.0,
        building_state={b.id: BuildingState("intact", 0, 0) for b in city.buildings},
        edge_passable={e.id: True for e in city.edges},
        infra_status={
            a.id: "up" for assets in city.infrastructure.values() for a in assets
        },
        team_state={
            t.team_id: TeamState(at=c.node_ref, busy_until=0.0)
            for c in city.rescue_centers
            for t in c.teams
        },
        reports=(),
    )


def validate_snapshot(city: CityGraph, snap: TwinSnapshot) -> None:
    """Exhaustive referential-closure and bounds walk; raises on violation."""
    if snap.t < 0:
        raise ValueError(f"snapshot t must be >= 0, got {snap.t}")
    for bid, state in snap.building_state.items():
        if bid not in city.building_by_id:
            raise UnknownIdError(f"snapshot references unknown building {bid!r}")
        if state.damage not in DAMAGE_STATES:
            raise ValueError(f"building {bid!r}: bad damage state {state.damage!r}")
        if not (0 <= state.saved <= state.trapped):
            raise ValueError(
                f"building {bid!r}: saved {state.saved} out of range [0, trapped={state.trapped}]"
            )
    for eid in snap.edge_passable:
        if eid not in city.edge_by_id:
            raise UnknownIdError(f"snapshot references unknown edge {eid!r}")
    for iid in snap.infra_status:
        if iid not in city.infra_by_id:
            raise UnknownIdError(f"snapshot references unknown infra {iid!r}")
    for tid, tstate in snap.team_state.items():
        if tid not in city.team_index:
            raise UnknownIdError(f"snapshot references unknown team {tid!r}")
        if tstate.at not in city.node_by_id:
            raise UnknownIdError(f"team {tid!r} placed at unknown node {tstate.at!r}")


class Timeline:
    """Append-only, time-ordered sequence of snapshots for one scenario run.

    A single writer appends fully built snapshots; readers are lock-free
    and only ever observe a fully published state: each append/extend swaps
    in one new (snapshots, times) pair, so a whole decision's worth of
    snapshots becomes visible at once (publish-after-complete).
    """

    def __init__(self, city: CityGraph):
        self.city = city
        self.pre_disaster = pre_disaster_snapshot(city)
        self._published: tuple[tuple[TwinSnapshot, ...], tuple[float, ...]] = ((), ())
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._published[0])

    @property
    def snapshots(self) -> tuple[TwinSnapshot, ...]:
        return self._published[0]

    @property
    def end_t(self) -> float:
        times = self._published[1]
        return times[-1] if times else 0.0

    def append(self, snap: TwinSnapshot) -> None:
        self.extend([snap])

    def extend(self, snaps: list[TwinSnapshot]) -> None:
        """Publish a batch of snapshots atomically (all or nothing)."""
        if not snaps:
            return
        with self._lock:
            snapshots, times = self._published
            last = times[-1] if times else None
            for snap in snaps:
                if last is not None and snap.t < last:
                    raise ValueError(
                        f"timeline is append-only: t={snap.t} precedes last t={last}"
                    )
                last = snap.t
            self._published = (
                snapshots + tuple(snaps),
                times + tuple(s.t for s in snaps),
            )

    def at(self, t: float) -> TwinSnapshot:
        """Latest snapshot with snapshot.t <= t; pre-disaster state before that.

        Clamping contract: never raises, any t is answerable.
        """
        snapshots, times = self._published
        idx = bisect_right(times, t) - 1
        if idx < 0 or not snapshots:
            return self.pre_disaster
        return snapshots[idx]


def snapshot_at(timeline: Timeline, t: float) -> TwinSnapshot:
    """Floor lookup over the timeline (see Timeline.at)."""
    return timeline.at(t)
