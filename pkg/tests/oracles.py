"""Independent brute-force oracles the implementation is checked against.

These deliberately re-derive everything from first principles (exhaustive
simple-path enumeration, exhaustive assignment enumeration) instead of
calling into the search or planner code paths they verify.
"""

from __future__ import annotations

import random
from itertools import combinations, permutations

from dtdms.city import CityGraph
from dtdms.twin import TwinSnapshot

from conftest import make_city, all_passable_snapshot


def enumerate_simple_paths(city: CityGraph, snapshot: TwinSnapshot, src: str, dst: str):
    """Yield (nodes, edge_ids, cost, hops) for every simple path over passable edges."""
    adjacency: dict[str, list[tuple[str, str, float]]] = {n.id: [] for n in city.nodes}
    for e in city.edges:
        if snapshot.edge_passable[e.id]:
            adjacency[e.a].append((e.id, e.b, e.length_m))
            adjacency[e.b].append((e.id, e.a, e.length_m))

    stack = [(src, [src], [], 0.0)]
    while stack:
        node, nodes, edges, cost = stack.pop()
        if node == dst:
            yield nodes, edges, cost, len(edges)
            continue
        for eid, neighbor, length in adjacency[node]:
            if neighbor in nodes:
                continue
            stack.append((neighbor, nodes + [neighbor], edges + [eid], cost + length))


def brute_min_hops(city, snapshot, src, dst):
    hops = [h for _, _, _, h in enumerate_simple_paths(city, snapshot, src, dst)]
    return min(hops) if hops else None


def brute_min_cost(city, snapshot, src, dst):
    costs = [c for _, _, c, _ in enumerate_simple_paths(city, snapshot, src, dst)]
    return min(costs) if costs else None


def random_road_network(rng: random.Random, max_nodes: int = 10, unit_costs: bool = False):
    """Random small city + snapshot with random blocked edges."""
    n = rng.randint(2, max_nodes)
    node_ids = [f"n{i}" for i in range(n)]
    nodes = [(nid, rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)) for nid in node_ids]
    max_edges = n * (n - 1) // 2
    n_edges = rng.randint(min(1, max_edges), min(max_edges, n + 5))
    pairs = rng.sample([(a, b) for i, a in enumerate(node_ids) for b in node_ids[i + 1 :]], n_edges)
    edges = [
        (f"e{i}", a, b, 1.0 if unit_costs else round(rng.uniform(10.0, 500.0), 1))
        for i, (a, b) in enumerate(pairs)
    ]
    city = make_city(nodes=nodes, edges=edges)
    snapshot = all_passable_snapshot(city)
    passable = dict(snapshot.edge_passable)
    for eid in passable:
        if rng.random() < 0.25:
            passable[eid] = False
    snapshot = TwinSnapshot(
        t=snapshot.t,
        building_state=snapshot.building_state,
        edge_passable=passable,
        infra_status=snapshot.infra_status,
        team_state=snapshot.team_state,
    )
    return city, snapshot


def brute_force_assignments(teams: list[str], targets: list[str]):
    """Every non-empty injective partial map team -> target, in the documented
    order: size ascending, team combinations then target permutations."""
    k_max = min(len(teams), len(targets))
    for k in range(1, k_max + 1):
        for team_subset in combinations(teams, k):
            for target_perm in permutations(targets, k):
                yield list(zip(team_subset, target_perm))


def rescue_instance(rng: random.Random, n_teams: int, n_buildings: int):
    """Random dispatch desk instance: hub-and-spoke city, collapsed buildings,
    idle teams, a few blocked or missing links."""
    nodes = [("hub", 0.0, 0.0)]
    edges = []
    centers = []
    team_no = 0
    for i in range(max(1, (n_teams + 1) // 2)):
        cnode = f"cn{i}"
        nodes.append((cnode, 0.01 * (i + 1), 0.0))
        edges.append((f"spoke-c{i}", "hub", cnode, round(rng.uniform(200, 3000), 1)))
        teams = []
        for _ in range(2):
            if team_no < n_teams:
                teams.append((f"team-{team_no}", rng.choice(["search", "medical", "heavy"])))
                team_no += 1
        centers.append((f"rc{i}", cnode, teams))
    buildings = []
    for j in range(n_buildings):
        bnode = f"bn{j}"
        nodes.append((bnode, -0.01 * (j + 1), 0.01))
        edges.append((f"spoke-b{j}", "hub", bnode, round(rng.uniform(200, 8000), 1)))
        buildings.append((f"bld-{j}", bnode, rng.randint(0, 300), 0.0))
    # extra cross links and occasional blockage keep routing non-trivial
    for k in range(rng.randint(0, 3)):
        a, b = rng.sample([n[0] for n in nodes], 2)
        edges.append((f"x{k}", a, b, round(rng.uniform(100, 5000), 1)))
    city = make_city(nodes=nodes, edges=edges, buildings=buildings, centers=centers)

    overrides = {}
    for j in range(n_buildings):
        trapped = rng.randint(0, 250)
        overrides[f"bld-{j}"] = ("collapsed", trapped, 0)
    snapshot = all_passable_snapshot(city, t=0.0, **overrides)
    passable = dict(snapshot.edge_passable)
    for eid in passable:
        if eid.startswith("x") and rng.random() < 0.5:
            passable[eid] = False
        elif eid.startswith("spoke-b") and rng.random() < 0.1:
            passable[eid] = False  # occasionally strand a building
    snapshot = TwinSnapshot(
        t=0.0,
        building_state=snapshot.building_state,
        edge_passable=passable,
        infra_status=snapshot.infra_status,
        team_state=snapshot.team_state,
    )
    return city, snapshot


def brute_force_top_plan(city, scenario, snapshot, limits):
    """Exhaustive argmax over all injective assignments under the documented
    tie-break; returns (assignment pairs, report) or (None, None)."""
    from dtdms.planner import Assignment, DispatchPlan, evaluate_plan
    from dtdms.routing import ucs_route

    collapsed = [
        (bid, s.trapped) for bid, s in snapshot.building_state.items() if s.damage == "collapsed"
    ]
    collapsed.sort(key=lambda pair: (-pair[1], pair[0]))
    targets = [bid for bid, _ in collapsed[: limits.max_targets]]
    teams = sorted(
        tid for tid, s in snapshot.team_state.items() if s.busy_until <= snapshot.t
    )
    best = None
    index = 0
    for pairs in brute_force_assignments(teams, targets):
        index += 1
        legs = []
        for tid, bid in pairs:
            route = ucs_route(
                city, snapshot, snapshot.team_state[tid].at, city.building_by_id[bid].node_ref
            )
            if route is None:
                legs = None
                break
            legs.append(Assignment(team_id=tid, building_id=bid, route=route, depart=snapshot.t))
        if legs is None:
            continue
        plan = DispatchPlan(plan_id=f"plan-{index:06d}", assignments=tuple(legs))
        report = evaluate_plan(city, scenario, snapshot, plan)
        key = (-report.total_saved, plan.total_route_cost, plan.plan_id)
        if best is None or key < best[0]:
            best = (key, pairs, report)
    if best is None:
        return None, None
    return best[1], best[2]
