import json
from importlib import resources
from pathlib import Path

import pytest

from dtdms.city import CityGraph, city_from_dict
from dtdms.quake import DisasterScenario, QuakeParams
from dtdms.twin import BuildingState, TeamState, TwinSnapshot


def make_city(
    nodes,
    edges=(),
    buildings=(),
    centers=(),
    infrastructure=None,
) -> CityGraph:
    """Compact city builder for tests.

    nodes: [(id, lat, lon)]; edges: [(id, a, b, length_m)];
    buildings: [(id, node, occupancy, resilience)];
    centers: [(id, node, [(team_id, kind)])];
    infrastructure: {layer: [(id, node)]}
    """
    return city_from_dict(
        {
            "nodes": [{"id": i, "lat": lat, "lon": lon} for i, lat, lon in nodes],
            "edges": [{"id": i, "a": a, "b": b, "length_m": m} for i, a, b, m in edges],
            "buildings": [
                {"id": i, "node_ref": n, "occupancy": occ, "resilience": res}
                for i, n, occ, res in buildings
            ],
            "rescue_centers": [
                {
                    "id": i,
                    "node_ref": n,
                    "teams": [{"team_id": t, "kind": k} for t, k in teams],
                }
                for i, n, teams in centers
            ],
            "infrastructure": {
                layer: [{"id": i, "node_ref": n, "status": "up"} for i, n in assets]
                for layer, assets in (infrastructure or {}).items()
            },
        }
    )


def all_passable_snapshot(city: CityGraph, t: float = 0.0, **building_overrides) -> TwinSnapshot:
    """Snapshot with everything nominal, overridable per building.

    building_overrides: building_id -> (damage, trapped, saved)
    """
    building_state = {}
    for b in city.buildings:
        damage, trapped, saved = building_overrides.get(b.id, ("intact", 0, 0))
        building_state[b.id] = BuildingState(damage, trapped, saved)
    return TwinSnapshot(
        t=t,
        building_state=building_state,
        edge_passable={e.id: True for e in city.edges},
        infra_status={a.id: "up" for assets in city.infrastructure.values() for a in assets},
        team_state={
            tm.team_id: TeamState(at=c.node_ref, busy_until=0.0)
            for c in city.rescue_centers
            for tm in c.teams
        },
    )


def pin_jitter(u: float = 0.5):
    """Jitter function pinned to a constant; u=0.5 zeroes the jitter term."""
    return lambda asset_id: u


@pytest.fixture
def triangle_city() -> CityGraph:
    # A-B 1 m, B-C 1 m, A-C 3 m
    return make_city(
        nodes=[("A", 0.0, 0.0), ("B", 0.0, 0.001), ("C", 0.001, 0.001)],
        edges=[("e-ab", "A", "B", 1.0), ("e-ac", "A", "C", 3.0), ("e-bc", "B", "C", 1.0)],
    )


@pytest.fixture
def desk_city_path(tmp_path) -> Path:
    data = resources.files("dtdms.data").joinpath("desk_city.json").read_text(encoding="utf-8")
    p = tmp_path / "desk_city.json"
    p.write_text(data, encoding="utf-8")
    return p


@pytest.fixture
def desk_scenario_path(tmp_path) -> Path:
    data = resources.files("dtdms.data").joinpath("desk_scenario.json").read_text(encoding="utf-8")
    p = tmp_path / "desk_scenario.json"
    p.write_text(data, encoding="utf-8")
    return p


def scenario_at(
    lat: float, lon: float, magnitude: float = 7.0, seed: int = 1, **param_overrides
) -> DisasterScenario:
    return DisasterScenario(
        epicenter=(lat, lon),
        magnitude=magnitude,
        seed=seed,
        params=QuakeParams(**param_overrides),
    )


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path
