import random

import pytest

from dtdms.city import UnknownIdError
from dtdms.routing import BLOCKED, bfs_route, edge_cost, ucs_route
from dtdms.twin import TwinSnapshot

from conftest import all_passable_snapshot, make_city
from oracles import brute_min_cost, brute_min_hops, random_road_network


def block(snapshot: TwinSnapshot, *edge_ids: str) -> TwinSnapshot:
    passable = dict(snapshot.edge_passable)
    for eid in edge_ids:
        passable[eid] = False
    return TwinSnapshot(
        t=snapshot.t,
        building_state=snapshot.building_state,
        edge_passable=passable,
        infra_status=snapshot.infra_status,
        team_state=snapshot.team_state,
    )


def test_edge_cost_identity_weighting(triangle_city):
    snap = all_passable_snapshot(triangle_city)
    seg = triangle_city.edge_by_id["e-ac"]
    assert edge_cost(seg, snap) == 3.0


def test_edge_cost_blocked(triangle_city):
    snap = block(all_passable_snapshot(triangle_city), "e-ac")
    assert edge_cost(triangle_city.edge_by_id["e-ac"], snap) is BLOCKED


def test_edge_cost_unknown_edge(triangle_city):
    other = make_city(nodes=[("X", 0, 0), ("Y", 0, 1)], edges=[("zz", "X", "Y", 5.0)])
    snap = all_passable_snapshot(triangle_city)
    with pytest.raises(UnknownIdError, match="zz"):
        edge_cost(other.edge_by_id["zz"], snap)


def test_bfs_src_equals_dst(triangle_city):
    snap = all_passable_snapshot(triangle_city)
    path = bfs_route(triangle_city, snap, "A", "A")
    assert path.nodes == ("A",)
    assert path.hops == 0
    assert path.cost == 0.0


def test_bfs_prefers_fewest_hops(triangle_city):
    snap = all_passable_snapshot(triangle_city)
    path = bfs_route(triangle_city, snap, "A", "C")
    assert path.nodes == ("A", "C")
    assert path.hops == 1


def test_bfs_detours_around_blocked_edge(triangle_city):
    snap = block(all_passable_snapshot(triangle_city), "e-ac")
    path = bfs_route(triangle_city, snap, "A", "C")
    assert path.nodes == ("A", "B", "C")
    assert path.hops == 2


def test_ucs_prefers_cheapest_path(triangle_city):
    snap = all_passable_snapshot(triangle_city)
    path = ucs_route(triangle_city, snap, "A", "C")
    assert path.nodes == ("A", "B", "C")
    assert path.cost == 2.0


def test_ucs_src_equals_dst(triangle_city):
    snap = all_passable_snapshot(triangle_city)
    assert ucs_route(triangle_city, snap, "C", "C").cost == 0.0


def test_no_route_when_disconnected(triangle_city):
    snap = block(all_passable_snapshot(triangle_city), "e-ac", "e-bc")
    assert bfs_route(triangle_city, snap, "A", "C") is None
    assert ucs_route(triangle_city, snap, "A", "C") is None


def test_unknown_node_rejected(triangle_city):
    snap = all_passable_snapshot(triangle_city)
    with pytest.raises(UnknownIdError, match="nowhere"):
        bfs_route(triangle_city, snap, "A", "nowhere")
    with pytest.raises(UnknownIdError, match="nowhere"):
        ucs_route(triangle_city, snap, "nowhere", "C")


def test_paths_never_traverse_blocked_edges():
    rng = random.Random(4242)
    for _ in range(50):
        city, snap = random_road_network(rng)
        nodes = [n.id for n in city.nodes]
        src, dst = rng.choice(nodes), rng.choice(nodes)
        for path in (bfs_route(city, snap, src, dst), ucs_route(city, snap, src, dst)):
            if path is None:
                continue
            assert all(snap.edge_passable[eid] for eid in path.edges)
            assert len(path.edges) == len(path.nodes) - 1 == path.hops


def test_routes_match_enumeration_oracle():
    rng = random.Random(777)
    for _ in range(100):
        city, snap = random_road_network(rng)
        nodes = [n.id for n in city.nodes]
        src, dst = rng.choice(nodes), rng.choice(nodes)
        best_hops = brute_min_hops(city, snap, src, dst)
        best_cost = brute_min_cost(city, snap, src, dst)
        bfs = bfs_route(city, snap, src, dst)
        ucs = ucs_route(city, snap, src, dst)
        if best_hops is None:
            assert bfs is None and ucs is None
        else:
            assert bfs.hops == best_hops
            assert ucs.cost == pytest.approx(best_cost)


def test_unit_costs_make_ucs_agree_with_bfs():
    rng = random.Random(31)
    for _ in range(50):
        city, snap = random_road_network(rng, unit_costs=True)
        nodes = [n.id for n in city.nodes]
        src, dst = rng.choice(nodes), rng.choice(nodes)
        bfs = bfs_route(city, snap, src, dst)
        ucs = ucs_route(city, snap, src, dst)
        if bfs is None:
            assert ucs is None
        else:
            assert ucs.cost == pytest.approx(bfs.hops)


def test_identical_inputs_give_identical_paths():
    rng = random.Random(99)
    city, snap = random_road_network(rng)
    nodes = sorted(n.id for n in city.nodes)
    src, dst = nodes[0], nodes[-1]
    assert bfs_route(city, snap, src, dst) == bfs_route(city, snap, src, dst)
    assert ucs_route(city, snap, src, dst) == ucs_route(city, snap, src, dst)


def test_ucs_cost_invariant_under_relabeling():
    rng = random.Random(1212)
    for _ in range(20):
        city, snap = random_road_network(rng)
        nodes = [n.id for n in city.nodes]
        src, dst = rng.choice(nodes), rng.choice(nodes)
        baseline = ucs_route(city, snap, src, dst)

        relabel = {nid: f"z{rng.randrange(10**6):06d}-{i}" for i, nid in enumerate(nodes)}
        relabeled = make_city(
            nodes=[(relabel[n.id], n.lat, n.lon) for n in city.nodes],
            edges=[(e.id, relabel[e.a], relabel[e.b], e.length_m) for e in city.edges],
        )
        snap2 = TwinSnapshot(
            t=snap.t,
            building_state={},
            edge_passable=dict(snap.edge_passable),
            infra_status={},
            team_state={},
        )
        mirrored = ucs_route(relabeled, snap2, relabel[src], relabel[dst])
        if baseline is None:
            assert mirrored is None
        else:
            assert mirrored.cost == pytest.approx(baseline.cost)
