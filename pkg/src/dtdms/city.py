"""Static city model: road graph, buildings, rescue centers, infrastructure overlays.

The city is loaded once from a JSON file and never mutated afterwards; every
other part of the system reads structure through the lookup tables on
:class:`CityGraph`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

INFRA_LAYERS = ("water", "electricity", "telecom", "gas")
TEAM_KINDS = ("search", "medical", "heavy")
INFRA_STATUSES = ("up", "down")


class CityFormatError(ValueError):
    """The city file failed to parse or violates the schema."""


class DuplicateIdError(CityFormatError):
    """Two entities of the same kind share an id."""


class DanglingReferenceError(CityFormatError):
    """An entity references a node id that does not exist."""


class UnknownIdError(KeyError):
    """An operation was given an id that does not resolve in the city."""


@dataclass(frozen=True)
class Node:
    id: str
    lat: float
    lon: float


@dataclass(frozen=True)
class RoadSegment:
    """Undirected road between two distinct nodes, traversable both ways."""

    id: str
    a: str
    b: str
    length_m: float


@dataclass(frozen=True)
class Building:
    id: str
    node_ref: str
    occupancy: int
    resilience: float  # in [0, 1]; 0 = fragile


@dataclass(frozen=True)
class Team:
    team_id: str
    kind: str  # search | medical | heavy


@dataclass(frozen=True)
class RescueCenter:
    id: str
    node_ref: str
    teams: tuple[Team, ...]


@dataclass(frozen=True)
class InfraAsset:
    id: str
    node_ref: str
    status: str  # up | down (static initial status from the city file)


@dataclass(frozen=True)
class CityGraph:
    nodes: tuple[Node, ...]
    edges: tuple[RoadSegment, ...]
    buildings: tuple[Building, ...]
    rescue_centers: tuple[RescueCenter, ...]
    infrastructure: dict[str, tuple[InfraAsset, ...]] = field(default_factory=dict)

    @cached_property
    def node_by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_by_id(self) -> dict[str, RoadSegment]:
        return {e.id: e for e in self.edges}

    @cached_property
    def building_by_id(self) -> dict[str, Building]:
        return {b.id: b for b in self.buildings}

    @cached_property
    def center_by_id(self) -> dict[str, RescueCenter]:
        return {c.id: c for c in self.rescue_centers}

    @cached_property
    def team_index(self) -> dict[str, tuple[RescueCenter, Team]]:
        """team_id -> (owning center, team), unique by invariant."""
        idx: dict[str, tuple[RescueCenter, Team]] = {}
        for center in self.rescue_centers:
            for team in center.teams:
                idx[team.team_id] = (center, team)
        return idx

    @cached_property
    def infra_by_id(self) -> dict[str, tuple[str, InfraAsset]]:
        """infra id -> (layer, asset)."""
        idx: dict[str, tuple[str, InfraAsset]] = {}
        for layer, assets in self.infrastructure.items():
            for asset in assets:
                idx[asset.id] = (layer, asset)
        return idx

    @cached_property
    def adjacency(self) -> dict[str, tuple[tuple[RoadSegment, str], ...]]:
        """node id -> ((edge, other endpoint), ...) sorted by edge id.

        The sorted order is load-bearing: route search visits neighbors in
        this order, which pins tie-breaking across runs.
        """
        adj: dict[str, list[tuple[RoadSegment, str]]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            adj[e.a].append((e, e.b))
            adj[e.b].append((e, e.a))
        return {nid: tuple(sorted(inc, key=lambda pair: pair[0].id)) for nid, inc in adj.items()}

    def node_location(self, node_id: str) -> tuple[float, float]:
        try:
            n = self.node_by_id[node_id]
        except KeyError:
            raise UnknownIdError(f"unknown node id {node_id!r}") from None
        return (n.lat, n.lon)

    def to_dict(self) -> dict:
        """Plain-dict form matching the city file schema."""
        return {
            "nodes": [{"id": n.id, "lat": n.lat, "lon": n.lon} for n in self.nodes],
            "edges": [
                {"id": e.id, "a": e.a, "b": e.b, "length_m": e.length_m} for e in self.edges
            ],
            "buildings": [
                {
                    "id": b.id,
                    "node_ref": b.node_ref,
                    "occupancy": b.occupancy,
                    "resilience": b.resilience,
                }
                for b in self.buildings
            ],
            "rescue_centers": [
                {
                    "id": c.id,
                    "node_ref": c.node_ref,
                    "teams": [{"team_id": t.team_id, "kind": t.kind} for t in c.teams],
                }
                for c in self.rescue_centers
            ],
            "infrastructure": {
                layer: [
                    {"id": a.id, "node_ref": a.node_ref, "status": a.status}
                    for a in self.infrastructure.get(layer, ())
                ]
                for layer in INFRA_LAYERS
            },
        }


def _require(condition: bool, message: str, exc=CityFormatError) -> None:
    if not condition:
        raise exc(message)


def _check_unique(ids: list[str], kind: str) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise DuplicateIdError(f"duplicate {kind} id {i!r}")
        seen.add(i)


def city_from_dict(data: dict) -> CityGraph:
    """Build and validate a CityGraph from the city file's dict form."""
    _require(isinstance(data, dict), "city file must be a JSON object")
    for key in ("nodes", "edges", "buildings", "rescue_centers", "infrastructure"):
        _require(key in data, f"city file missing top-level key {key!r}")

    nodes = []
    for i, raw in enumerate(data["nodes"]):
        try:
            nodes.append(Node(id=str(raw["id"]), lat=float(raw["lat"]), lon=float(raw["lon"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CityFormatError(f"nodes[{i}]: bad field ({exc})") from exc
    _check_unique([n.id for n in nodes], "node")
    node_ids = {n.id for n in nodes}

    def resolve(node_ref: str, owner: str) -> str:
        if node_ref not in node_ids:
            raise DanglingReferenceError(f"{owner} references unknown node {node_ref!r}")
        return node_ref

    edges = []
    for i, raw in enumerate(data["edges"]):
        try:
            e = RoadSegment(
                id=str(raw["id"]), a=str(raw["a"]), b=str(raw["b"]), length_m=float(raw["length_m"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CityFormatError(f"edges[{i}]: bad field ({exc})") from exc
        _require(e.a != e.b, f"edge {e.id!r}: endpoints must differ")
        _require(e.length_m > 0, f"edge {e.id!r}: length_m must be > 0")
        resolve(e.a, f"edge {e.id!r}")
        resolve(e.b, f"edge {e.id!r}")
        edges.append(e)
    _check_unique([e.id for e in edges], "edge")

    buildings = []
    for i, raw in enumerate(data["buildings"]):
        try:
            b = Building(
                id=str(raw["id"]),
                node_ref=str(raw["node_ref"]),
                occupancy=int(raw["occupancy"]),
                resilience=float(raw.get("resilience", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CityFormatError(f"buildings[{i}]: bad field ({exc})") from exc
        _require(b.occupancy >= 0, f"building {b.id!r}: occupancy must be >= 0")
        _require(0.0 <= b.resilience <= 1.0, f"building {b.id!r}: resilience must be in [0,1]")
        resolve(b.node_ref, f"building {b.id!r}")
        buildings.append(b)
    _check_unique([b.id for b in buildings], "building")

    centers = []
    for i, raw in enumerate(data["rescue_centers"]):
        try:
            teams = tuple(
                Team(team_id=str(t["team_id"]), kind=str(t["kind"])) for t in raw.get("teams", [])
            )
            c = RescueCenter(id=str(raw["id"]), node_ref=str(raw["node_ref"]), teams=teams)
        except (KeyError, TypeError, ValueError) as exc:
            raise CityFormatError(f"rescue_centers[{i}]: bad field ({exc})") from exc
        for t in c.teams:
            _require(t.kind in TEAM_KINDS, f"team {t.team_id!r}: unknown kind {t.kind!r}")
        resolve(c.node_ref, f"rescue center {c.id!r}")
        centers.append(c)
    _check_unique([c.id for c in centers], "rescue center")
    _check_unique([t.team_id for c in centers for t in c.teams], "team")

    infra_raw = data["infrastructure"]
    _require(isinstance(infra_raw, dict), "infrastructure must be an object keyed by layer")
    for layer in infra_raw:
        _require(layer in INFRA_LAYERS, f"unknown infrastructure layer {layer!r}")
    infrastructure: dict[str, tuple[InfraAsset, ...]] = {}
    for layer in INFRA_LAYERS:
        assets = []
        for i, raw in enumerate(infra_raw.get(layer, [])):
            try:
                a = InfraAsset(
                    id=str(raw["id"]),
                    node_ref=str(raw["node_ref"]),
                    status=str(raw.get("status", "up")),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CityFormatError(f"infrastructure.{layer}[{i}]: bad field ({exc})") from exc
            _require(a.status in INFRA_STATUSES, f"infra {a.id!r}: bad status {a.status!r}")
            resolve(a.node_ref, f"infra {a.id!r}")
            assets.append(a)
        infrastructure[layer] = tuple(assets)
    _check_unique([a.id for assets in infrastructure.values() for a in assets], "infra")

    return CityGraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        buildings=tuple(buildings),
        rescue_centers=tuple(centers),
        infrastructure=infrastructure,
    )


def load_city(city_file: str | Path) -> CityGraph:
    """Load and validate a city JSON file.

    Raises CityFormatError (with line/column for syntax errors),
    DuplicateIdError or DanglingReferenceError naming the offending id.
    """
    path = Path(city_file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CityFormatError(f"cannot read city file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CityFormatError(
            f"city file {path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return city_from_dict(data)
