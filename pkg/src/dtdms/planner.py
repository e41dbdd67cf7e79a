"""Dispatch-plan enumeration, simulation, and ranking.

A plan assigns idle rescue teams to collapsed buildings, one building per
team (injective). Candidate plans are every non-empty injective partial
assignment of teams to the ranked target list; when that space exceeds
``max_plans`` the enumerator falls back to a greedy construction and labels
the resulting plans with a ``greedy-`` id prefix so callers can tell.

Enumeration order (which fixes plan ids and the ranking tie-break):
targets are ranked by trapped count descending then id ascending and
truncated to ``max_targets``; teams are sorted by team id; plans are
emitted for assignment size k = 1..min(#teams, #targets), teams chosen in
combination order, targets in permutation order. Ids are ``plan-%06d`` in
that sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations

from .city import CityGraph
from .quake import DisasterScenario, QuakeParams, round_persons, survival_fraction
from .routing import Path, ucs_route
from .twin import TwinSnapshot


@dataclass(frozen=True)
class Assignment:
    team_id: str
    building_id: str
    route: Path
    depart: float  # seconds since scenario origin


@dataclass(frozen=True)
class DispatchPlan:
    plan_id: str
    assignments: tuple[Assignment, ...]

    @property
    def total_route_cost(self) -> float:
        return sum(a.route.cost for a in self.assignments)

    def is_greedy(self) -> bool:
        return self.plan_id.startswith("greedy-")

    def to_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "assignments": [
                {
                    "team_id": a.team_id,
                    "building_id": a.building_id,
                    "depart": a.depart,
                    "route": {
                        "nodes": list(a.route.nodes),
                        "edges": list(a.route.edges),
                        "cost": a.route.cost,
                        "hops": a.route.hops,
                    },
                }
                for a in self.assignments
            ],
        }


@dataclass(frozen=True)
class PlanLimits:
    max_targets: int = 8
    max_plans: int = 10_000


@dataclass(frozen=True)
class OutcomeReport:
    """What one simulated plan does to the city; conserved by construction."""

    scenario: dict
    plan: str
    total_trapped: int
    total_saved: int
    casualties: int
    buildings: dict[str, int]  # counts by damage state
    infra: dict[str, dict[str, int]]  # per-layer up/down counts
    decisions_log: tuple[dict, ...]
    success_rate: float

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "plan": self.plan,
            "total_trapped": self.total_trapped,
            "total_saved": self.total_saved,
            "casualties": self.casualties,
            "buildings": self.buildings,
            "infra": self.infra,
            "decisions_log": list(self.decisions_log),
            "success_rate": self.success_rate,
        }


class PlanValidationError(ValueError):
    """The plan does not fit the snapshot it is being evaluated against."""


def ranked_targets(snapshot: TwinSnapshot, max_targets: int) -> list[str]:
    """Collapsed buildings by trapped count desc, id asc, truncated."""
    collapsed = [
        (bid, s.trapped) for bid, s in snapshot.building_state.items() if s.damage == "collapsed"
    ]
    collapsed.sort(key=lambda pair: (-pair[1], pair[0]))
    return [bid for bid, _ in collapsed[:max_targets]]


def idle_teams(snapshot: TwinSnapshot) -> list[str]:
    """Teams free at the snapshot instant, sorted by team id."""
    return sorted(tid for tid, s in snapshot.team_state.items() if s.busy_until <= snapshot.t)


def _routes_for(
    city: CityGraph, snapshot: TwinSnapshot, teams: list[str], targets: list[str]
) -> dict[tuple[str, str], Path]:
    """UCS route per (team, target) pair; pairs with no route are absent."""
    routes: dict[tuple[str, str], Path] = {}
    route_cache: dict[tuple[str, str], Path | None] = {}
    for tid in teams:
        src = snapshot.team_state[tid].at
        for bid in targets:
            dst = city.building_by_id[bid].node_ref
            key = (src, dst)
            if key not in route_cache:
                route_cache[key] = ucs_route(city, snapshot, src, dst)
            route = route_cache[key]
            if route is not None:
                routes[(tid, bid)] = route
    return routes


def _assignment_space_size(n_teams: int, n_targets: int) -> int:
    k_max = min(n_teams, n_targets)
    return sum(math.comb(n_teams, k) * math.perm(n_targets, k) for k in range(1, k_max + 1))


def _expected_saved(
    params: QuakeParams, snapshot: TwinSnapshot, route: Path, building_id: str, depart: float
) -> int:
    travel = route.cost / (params.speed_kmh / 3.6)
    t_done = depart + travel + params.setup_hours * 3600.0
    trapped = snapshot.building_state[building_id].trapped
    return round_persons(trapped * survival_fraction(params, t_done))


def _greedy_plans(
    city: CityGraph,
    snapshot: TwinSnapshot,
    teams: list[str],
    targets: list[str],
    routes: dict[tuple[str, str], Path],
    params: QuakeParams,
) -> list[DispatchPlan]:
    """Greedy fallback: repeatedly take the (team, building) pair with the
    largest marginal expected saved; emit each growing prefix as a plan."""
    depart = snapshot.t
    free_teams = set(teams)
    free_targets = set(targets)
    chosen: list[Assignment] = []
    plans: list[DispatchPlan] = []
    while free_teams and free_targets:
        best = None
        for tid in sorted(free_teams):
            for bid in sorted(free_targets):
                route = routes.get((tid, bid))
                if route is None:
                    continue
                saved = _expected_saved(params, snapshot, route, bid, depart)
                key = (-saved, tid, bid)
                if best is None or key < best[0]:
                    best = (key, tid, bid, route)
        if best is None:
            break  # no routable pair left
        _, tid, bid, route = best
        free_teams.discard(tid)
        free_targets.discard(bid)
        chosen.append(Assignment(team_id=tid, building_id=bid, route=route, depart=depart))
        plans.append(
            DispatchPlan(plan_id=f"greedy-{len(plans) + 1:06d}", assignments=tuple(chosen))
        )
    return plans


def enumerate_plans(
    city: CityGraph,
    snapshot: TwinSnapshot,
    limits: PlanLimits | None = None,
    *,
    params: QuakeParams | None = None,
) -> list[DispatchPlan]:
    """Candidate dispatch plans for the snapshot (possibly empty).

    ``params`` only matters for the greedy fallback, which needs the travel
    and survival constants to score marginal gains; defaults apply if the
    caller has none at hand.
    """
    limits = limits or PlanLimits()
    params = params or QuakeParams()
    targets = ranked_targets(snapshot, limits.max_targets)
    teams = idle_teams(snapshot)
    if not targets or not teams:
        return []

    routes = _routes_for(city, snapshot, teams, targets)
    if _assignment_space_size(len(teams), len(targets)) > limits.max_plans:
        return _greedy_plans(city, snapshot, teams, targets, routes, params)

    depart = snapshot.t
    plans: list[DispatchPlan] = []
    counter = 0
    for k in range(1, min(len(teams), len(targets)) + 1):
        for team_subset in combinations(teams, k):
            for target_perm in permutations(targets, k):
                counter += 1
                legs = []
                for tid, bid in zip(team_subset, target_perm):
                    route = routes.get((tid, bid))
                    if route is None:
                        break  # NoRoute leg: drop the whole plan
                    legs.append(
                        Assignment(team_id=tid, building_id=bid, route=route, depart=depart)
                    )
                else:
                    plans.append(
                        DispatchPlan(plan_id=f"plan-{counter:06d}", assignments=tuple(legs))
                    )
    return plans


def evaluate_plan(
    city: CityGraph,
    scenario: DisasterScenario,
    snapshot: TwinSnapshot,
    plan: DispatchPlan,
) -> OutcomeReport:
    """Simulate one plan against the snapshot and report the outcome.

    Per assignment: travel time at params.speed_kmh over the route cost,
    plus fixed per-site setup; people saved decay with survival_fraction at
    the completion instant. Unassigned collapsed buildings save nobody.
    """
    params = scenario.params
    seen_teams: set[str] = set()
    seen_buildings: set[str] = set()
    log: list[dict] = []
    saved_total = 0

    for a in plan.assignments:
        if a.team_id not in snapshot.team_state:
            raise PlanValidationError(f"plan references unknown team {a.team_id!r}")
        if a.building_id not in snapshot.building_state:
            raise PlanValidationError(f"plan references unknown building {a.building_id!r}")
        if a.team_id in seen_teams:
            raise PlanValidationError(f"team {a.team_id!r} appears more than once")
        if a.building_id in seen_buildings:
            raise PlanValidationError(f"building {a.building_id!r} appears more than once")
        seen_teams.add(a.team_id)
        seen_buildings.add(a.building_id)
        state = snapshot.building_state[a.building_id]
        if state.damage != "collapsed":
            raise PlanValidationError(f"building {a.building_id!r} is not collapsed")
        if a.route.nodes[0] != snapshot.team_state[a.team_id].at:
            raise PlanValidationError(f"route for team {a.team_id!r} does not start at its position")
        if a.route.nodes[-1] != city.building_by_id[a.building_id].node_ref:
            raise PlanValidationError(f"route for team {a.team_id!r} does not end at the target")

        travel = a.route.cost / (params.speed_kmh / 3.6)
        t_done = a.depart + travel + params.setup_hours * 3600.0
        saved = round_persons(state.trapped * survival_fraction(params, t_done))
        saved = min(saved, state.trapped)
        saved_total += saved
        log.append(
            {
                "team_id": a.team_id,
                "building_id": a.building_id,
                "depart": a.depart,
                "travel_s": travel,
                "t_done": t_done,
                "route_cost_m": a.route.cost,
                "trapped": state.trapped,
                "saved": saved,
            }
        )

    log.sort(key=lambda entry: (entry["t_done"], entry["team_id"]))
    total_trapped = snapshot.total_trapped()
    casualties = total_trapped - saved_total
    damage_counts = {"intact": 0, "damaged": 0, "collapsed": 0}
    for state in snapshot.building_state.values():
        damage_counts[state.damage] += 1
    infra: dict[str, dict[str, int]] = {}
    for layer, assets in city.infrastructure.items():
        up = sum(1 for a in assets if snapshot.infra_status.get(a.id) == "up")
        infra[layer] = {"up": up, "down": len(assets) - up}

    return OutcomeReport(
        scenario=scenario.ref(),
        plan=plan.plan_id,
        total_trapped=total_trapped,
        total_saved=saved_total,
        casualties=casualties,
        buildings=damage_counts,
        infra=infra,
        decisions_log=tuple(log),
        success_rate=(saved_total / total_trapped) if total_trapped > 0 else 1.0,
    )


EMPTY_PLAN = DispatchPlan(plan_id="plan-empty", assignments=())


def completions_for(plan: DispatchPlan, params: QuakeParams) -> list:
    """Rescue completion events implied by a plan (for timeline advance)."""
    from .quake import RescueCompletion

    events = []
    for a in plan.assignments:
        travel = a.route.cost / (params.speed_kmh / 3.6)
        events.append(
            RescueCompletion(
                team_id=a.team_id,
                building_id=a.building_id,
                t_done=a.depart + travel + params.setup_hours * 3600.0,
            )
        )
    return sorted(events, key=lambda e: (e.t_done, e.team_id))


def recommend(
    city: CityGraph,
    scenario: DisasterScenario,
    snapshot: TwinSnapshot,
    limits: PlanLimits | None = None,
    top_n: int = 3,
) -> list[tuple[DispatchPlan, OutcomeReport]]:
    """Evaluate every candidate plan and return the best ``top_n``.

    Ordering: total_saved desc, then total route cost asc, then plan id
    asc. Education mode shows the whole ranked list; estimating mode takes
    element zero.
    """
    plans = enumerate_plans(city, snapshot, limits, params=scenario.params)
    evaluated = [(plan, evaluate_plan(city, scenario, snapshot, plan)) for plan in plans]
    evaluated.sort(key=lambda pr: (-pr[1].total_saved, pr[0].total_route_cost, pr[0].plan_id))
    return evaluated[:top_n]
