"""Min-hop (BFS) and min-cost (UCS) routing over the damage-aware road graph.

Both searches only use edges that are passable in the given snapshot.
Tie-breaking is pinned so identical inputs always give identical paths:
UCS orders its frontier by (cost, node id); BFS expands FIFO and visits
neighbors in sorted edge-id order (the adjacency tables are pre-sorted).
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

from .city import CityGraph, RoadSegment, UnknownIdError
from .twin import TwinSnapshot


class _Blocked:
    """Sentinel: the edge is impassable in this snapshot."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BLOCKED"


BLOCKED = _Blocked()


@dataclass(frozen=True)
class Path:
    """A route: nodes visited in order, the edges joining them, cost, hops."""

    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    cost: float
    hops: int


def edge_cost(
    segment: RoadSegment, snapshot: TwinSnapshot, *, risk_multiplier: float = 1.0
) -> float | _Blocked:
    """Traversal cost of one segment, or BLOCKED if impassable.

    risk_multiplier is the graded-risk hook; the default model keeps safety
    binary (passable/blocked) with multiplier 1.0.
    """
    try:
        passable = snapshot.edge_passable[segment.id]
    except KeyError:
        raise UnknownIdError(f"unknown edge id {segment.id!r}") from None
    if not passable:
        return BLOCKED
    return segment.length_m * risk_multiplier


def _check_endpoints(city: CityGraph, src: str, dst: str) -> None:
    for node in (src, dst):
        if node not in city.node_by_id:
            raise UnknownIdError(f"unknown node id {node!r}")


def _reconstruct(
    parents: dict[str, tuple[str, str]], src: str, dst: str, cost: float
) -> Path:
    nodes = [dst]
    edges = []
    cur = dst
    while cur != src:
        prev, via = parents[cur]
        edges.append(via)
        nodes.append(prev)
        cur = prev
    nodes.reverse()
    edges.reverse()
    return Path(nodes=tuple(nodes), edges=tuple(edges), cost=cost, hops=len(edges))


def bfs_route(city: CityGraph, snapshot: TwinSnapshot, src: str, dst: str) -> Path | None:
    """Minimal-hop path over passable edges, or None when disconnected."""
    _check_endpoints(city, src, dst)
    if src == dst:
        return Path(nodes=(src,), edges=(), cost=0.0, hops=0)

    parents: dict[str, tuple[str, str]] = {}
    visited = {src}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for segment, neighbor in city.adjacency[node]:
            if neighbor in visited:
                continue
            cost = edge_cost(segment, snapshot)
            if cost is BLOCKED:
                continue
            visited.add(neighbor)
            parents[neighbor] = (node, segment.id)
            if neighbor == dst:
                path = _reconstruct(parents, src, dst, cost=0.0)
                total = sum(city.edge_by_id[eid].length_m for eid in path.edges)
                return Path(nodes=path.nodes, edges=path.edges, cost=total, hops=path.hops)
            queue.append(neighbor)
    return None


def ucs_route(city: CityGraph, snapshot: TwinSnapshot, src: str, dst: str) -> Path | None:
    """Least-total-cost path over passable edges, or None when disconnected."""
    _check_endpoints(city, src, dst)
    if src == dst:
        return Path(nodes=(src,), edges=(), cost=0.0, hops=0)

    dist: dict[str, float] = {src: 0.0}
    parents: dict[str, tuple[str, str]] = {}
    done: set[str] = set()
    frontier: list[tuple[float, str]] = [(0.0, src)]
    while frontier:
        cost, node = heapq.heappop(frontier)
        if node in done:
            continue
        if node == dst:
            return _reconstruct(parents, src, dst, cost=cost)
        done.add(node)
        for segment, neighbor in city.adjacency[node]:
            if neighbor in done:
                continue
            step = edge_cost(segment, snapshot)
            if step is BLOCKED:
                continue
            new_cost = cost + step
            # strict improvement only: first-found wins on cost ties, which
            # under the (cost, node id) pop order fixes the returned path
            if new_cost < dist.get(neighbor, float("inf")):
                dist[neighbor] = new_cost
                parents[neighbor] = (node, segment.id)
                heapq.heappush(frontier, (new_cost, neighbor))
    return None
