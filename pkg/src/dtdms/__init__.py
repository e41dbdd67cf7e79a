"""Digital-twin disaster management simulator.

A deterministic city twin: load a road/building/infrastructure model,
shock it with a seeded earthquake scenario, route rescue teams with BFS or
UCS over the damaged graph, enumerate and rank dispatch plans, ingest
sensor telemetry, and classify disaster tweets into report markers.
"""

from .city import CityGraph, load_city
from .planner import DispatchPlan, OutcomeReport, PlanLimits, enumerate_plans, evaluate_plan, recommend
from .quake import (
    DisasterScenario,
    QuakeParams,
    apply_earthquake,
    load_scenario,
    severity,
    survival_fraction,
)
from .routing import BLOCKED, Path, bfs_route, edge_cost, ucs_route
from .session import Session, run_estimate
from .twin import Timeline, TwinSnapshot, snapshot_at

__version__ = "0.1.0"

__all__ = [
    "BLOCKED",
    "CityGraph",
    "DisasterScenario",
    "DispatchPlan",
    "OutcomeReport",
    "Path",
    "PlanLimits",
    "QuakeParams",
    "Session",
    "Timeline",
    "TwinSnapshot",
    "apply_earthquake",
    "bfs_route",
    "edge_cost",
    "enumerate_plans",
    "evaluate_plan",
    "load_city",
    "load_scenario",
    "recommend",
    "run_estimate",
    "severity",
    "snapshot_at",
    "survival_fraction",
    "ucs_route",
]
