"""Operational session: one city, one scenario, one decision loop.

The session is the single writer for scenario application, decisions, and
timeline appends; state queries are read-only merges of the snapshot at t
with whatever the sensor feed has overridden (sensors beat simulation).
"""

from __future__ import annotations

import json
import threading
from dataclasses import replace
from itertools import groupby
from pathlib import Path
from typing import Callable

from .city import CityGraph, load_city
from .ingest import TwinState
from .planner import (
    EMPTY_PLAN,
    DispatchPlan,
    OutcomeReport,
    PlanLimits,
    completions_for,
    evaluate_plan,
    recommend,
)
from .quake import DisasterScenario, advance, apply_earthquake, load_scenario
from .twin import Timeline, TwinSnapshot

MODES = ("education", "estimating")
DEFAULT_HORIZON_S = 72 * 3600.0


class SessionError(RuntimeError):
    """Session is not in a state where the request makes sense."""

    def __init__(self, message: str, status: int = 409):
        super().__init__(message)
        self.status = status


class Session:
    """One operator session over a loaded city.

    Education mode offers ranked plans and applies the human's pick
    verbatim; estimating mode auto-applies the top-ranked plan as soon as
    the scenario lands.
    """

    def __init__(
        self,
        city: CityGraph,
        mode: str = "education",
        limits: PlanLimits | None = None,
        horizon_s: float = DEFAULT_HORIZON_S,
        tolerance_s: float = 0.0,
    ):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.city = city
        self.mode = mode
        self.limits = limits or PlanLimits()
        self.horizon_s = horizon_s
        self.twin = TwinState(city=city, tolerance_s=tolerance_s)
        self.scenario: DisasterScenario | None = None
        self.timeline: Timeline | None = None
        self.offered_plans: dict[str, tuple[DispatchPlan, OutcomeReport]] = {}
        self._offer_snapshot: TwinSnapshot | None = None
        self.applied_decisions: list[dict] = []
        self.write_lock = threading.Lock()
        self._listeners: list[Callable[[dict], None]] = []

    # -- event wiring -------------------------------------------------

    def on_snapshot(self, listener: Callable[[dict], None]) -> None:
        self._listeners.append(listener)

    def _publish(self, event: dict) -> None:
        for listener in list(self._listeners):
            listener(event)

    # -- scenario -----------------------------------------------------

    def apply_scenario(self, scenario: DisasterScenario) -> TwinSnapshot:
        """Shock the city and reset the decision state; returns the t0 snapshot.

        Uses the occupancy the sensor feed has accumulated so far, then
        freezes it (post-disaster occupancy updates are ignored).
        """
        with self.write_lock:
            effective_city = self._city_with_occupancy()
            snap0 = apply_earthquake(effective_city, scenario)
            self.scenario = scenario
            self.timeline = Timeline(effective_city)
            self.timeline.append(snap0)
            self.twin.disaster_applied = True
            self.offered_plans = {}
            self._offer_snapshot = None
            self.applied_decisions = []
        self._publish({"t": snap0.t})
        if self.mode == "estimating":
            self._auto_decide()
        return snap0

    def _city_with_occupancy(self) -> CityGraph:
        occupancy = self.twin.effective_occupancy()
        if occupancy == {b.id: b.occupancy for b in self.city.buildings}:
            return self.city
        buildings = tuple(
            replace(b, occupancy=occupancy.get(b.id, b.occupancy)) for b in self.city.buildings
        )
        return replace(self.city, buildings=buildings)

    def _require_scenario(self) -> tuple[DisasterScenario, Timeline]:
        if self.scenario is None or self.timeline is None:
            raise SessionError("no scenario applied to this session yet", status=409)
        return self.scenario, self.timeline

    # -- queries ------------------------------------------------------

    def state_view(self, t: float) -> dict:
        """Serialized snapshot_at(t) merged with sensor overrides, plus geometry."""
        _, timeline = self._require_scenario()
        snap = timeline.at(t)
        merged = self._merge_overrides(snap)
        city = timeline.city
        node_loc = {n.id: n for n in city.nodes}
        return {
            "query_t": t,
            "t": snap.t,
            "pre_disaster": t < (timeline.snapshots[0].t if len(timeline) else 0.0),
            "horizon_s": self.horizon_s,
            "mode": self.mode,
            "nodes": [{"id": n.id, "lat": n.lat, "lon": n.lon} for n in city.nodes],
            "edges": [
                {
                    "id": e.id,
                    "a": e.a,
                    "b": e.b,
                    "length_m": e.length_m,
                    "passable": merged.edge_passable[e.id],
                }
                for e in city.edges
            ],
            "buildings": [
                {
                    "id": b.id,
                    "node_ref": b.node_ref,
                    "lat": node_loc[b.node_ref].lat,
                    "lon": node_loc[b.node_ref].lon,
                    "occupancy": b.occupancy,
                    "damage": merged.building_state[b.id].damage,
                    "trapped": merged.building_state[b.id].trapped,
                    "saved": merged.building_state[b.id].saved,
                }
                for b in city.buildings
            ],
            "rescue_centers": [
                {
                    "id": c.id,
                    "node_ref": c.node_ref,
                    "lat": node_loc[c.node_ref].lat,
                    "lon": node_loc[c.node_ref].lon,
                    "teams": [{"team_id": tm.team_id, "kind": tm.kind} for tm in c.teams],
                }
                for c in city.rescue_centers
            ],
            "teams": {
                tid: {"at": s.at, "busy_until": s.busy_until}
                for tid, s in sorted(merged.team_state.items())
            },
            "infrastructure": {
                layer: [
                    {
                        "id": a.id,
                        "node_ref": a.node_ref,
                        "lat": node_loc[a.node_ref].lat,
                        "lon": node_loc[a.node_ref].lon,
                        "status": merged.infra_status[a.id],
                    }
                    for a in assets
                ]
                for layer, assets in city.infrastructure.items()
            },
            "reports": [{"zone": r.zone, "count": r.count} for r in merged.reports],
        }

    def _merge_overrides(self, snap: TwinSnapshot) -> TwinSnapshot:
        """Sensor overrides win over simulated state; reports are appended."""
        if not (self.twin.damage_override or self.twin.infra_override or self.twin.reports):
            return snap
        building_state = dict(snap.building_state)
        for bid, damage in self.twin.damage_override.items():
            if bid in building_state:
                building_state[bid] = replace(building_state[bid], damage=damage)
        infra_status = dict(snap.infra_status)
        for iid, status in self.twin.infra_override.items():
            if iid in infra_status:
                infra_status[iid] = status
        return TwinSnapshot(
            t=snap.t,
            building_state=building_state,
            edge_passable=snap.edge_passable,
            infra_status=infra_status,
            team_state=snap.team_state,
            reports=snap.reports + tuple(self.twin.reports),
        )

    def infrastructure_view(self, layer: str, t: float) -> dict:
        state = self.state_view(t)
        if layer not in state["infrastructure"]:
            raise SessionError(f"unknown infrastructure layer {layer!r}", status=400)
        return {"layer": layer, "t": state["t"], "items": state["infrastructure"][layer]}

    # -- decision loop ------------------------------------------------

    def plan_request(self) -> dict:
        """Rank plans for the current state and store them as the open offer.

        With nothing to plan for (no collapsed buildings, or no teams) the
        offer is empty and a vacuous no-action report is attached instead.
        """
        scenario, timeline = self._require_scenario()
        if self.mode != "education":
            raise SessionError("plan offers are an education-mode feature", status=409)
        snap = timeline.at(timeline.end_t)
        ranked = recommend(timeline.city, scenario, snap, self.limits, top_n=3)
        self.offered_plans = {plan.plan_id: (plan, report) for plan, report in ranked}
        self._offer_snapshot = snap
        offers = [
            {
                "plan_id": plan.plan_id,
                "assignments": plan.to_dict()["assignments"],
                "success_rate": report.success_rate,
                "total_saved": report.total_saved,
                "total_route_cost_m": plan.total_route_cost,
            }
            for plan, report in ranked
        ]
        vacuous = None
        if not offers:
            vacuous = evaluate_plan(timeline.city, scenario, snap, EMPTY_PLAN).to_dict()
        return {"plans": offers, "report": vacuous}

    def decide(self, plan_id: str) -> OutcomeReport:
        """Apply a previously offered plan; extends the timeline, clears the offer."""
        self._require_scenario()
        if not self.offered_plans:
            raise SessionError("no plans are currently offered", status=409)
        if plan_id not in self.offered_plans:
            raise SessionError(f"unknown plan_id {plan_id!r}", status=404)
        plan, report = self.offered_plans[plan_id]
        self._apply_plan(plan, report, self._offer_snapshot)
        return report

    def _auto_decide(self) -> OutcomeReport:
        """Estimating mode: evaluate candidates and apply the top plan."""
        scenario, timeline = self._require_scenario()
        snap = timeline.at(timeline.end_t)
        ranked = recommend(timeline.city, scenario, snap, self.limits, top_n=1)
        if ranked:
            plan, report = ranked[0]
        else:
            plan, report = EMPTY_PLAN, evaluate_plan(timeline.city, scenario, snap, EMPTY_PLAN)
        self._apply_plan(plan, report, snap)
        return report

    def _apply_plan(
        self, plan: DispatchPlan, report: OutcomeReport, snap: TwinSnapshot | None
    ) -> None:
        scenario, timeline = self._require_scenario()
        base = snap if snap is not None else timeline.at(timeline.end_t)
        new_snaps: list[TwinSnapshot] = []
        with self.write_lock:
            events = completions_for(plan, scenario.params)
            current = base
            # one snapshot per distinct completion instant
            for t_done, group in groupby(events, key=lambda e: e.t_done):
                if t_done <= current.t:
                    raise SessionError(
                        f"completion at t={t_done} does not advance past t={current.t}",
                        status=400,
                    )
                current = advance(
                    timeline.city, current, t_done - current.t, list(group), scenario.params
                )
                new_snaps.append(current)
            # the decision lands atomically: readers see all of it or none
            timeline.extend(new_snaps)
            self.applied_decisions.append(
                {"plan_id": plan.plan_id, "decided_at": base.t, "report": report.to_dict()}
            )
            self.offered_plans = {}
            self._offer_snapshot = None
        for s in new_snaps:
            self._publish({"t": s.t})

    def last_report(self) -> OutcomeReport | None:
        if not self.applied_decisions:
            return None
        raw = self.applied_decisions[-1]["report"]
        return OutcomeReport(
            scenario=raw["scenario"],
            plan=raw["plan"],
            total_trapped=raw["total_trapped"],
            total_saved=raw["total_saved"],
            casualties=raw["casualties"],
            buildings=raw["buildings"],
            infra=raw["infra"],
            decisions_log=tuple(raw["decisions_log"]),
            success_rate=raw["success_rate"],
        )


def report_to_json(report: OutcomeReport) -> str:
    """Canonical report serialization: stable bytes for equal inputs."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def run_estimate(city_file: str | Path, scenario_file: str | Path, out: str | Path) -> Session:
    """Estimating mode end-to-end: load, shock, auto-decide, write the report.

    Raises on any file or validation problem without writing the output.
    Returns the finished session (report via .last_report(), final state on
    the timeline).
    """
    city = load_city(city_file)
    scenario = load_scenario(scenario_file)
    session = Session(city, mode="estimating")
    session.apply_scenario(scenario)
    report = session.last_report()
    assert report is not None  # estimating mode always decides
    Path(out).write_text(report_to_json(report), encoding="utf-8")
    return session
