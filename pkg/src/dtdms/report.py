"""Report artifacts: 2D damage map and survival-decay figures plus CSV tables.

Written alongside the JSON report by the CLI's estimate path. Colors are
from the Okabe-Ito palette so the three damage states stay distinguishable
for colorblind viewers.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .city import CityGraph
from .planner import OutcomeReport
from .quake import DisasterScenario, survival_fraction
from .twin import TwinSnapshot

DAMAGE_COLORS = {
    "intact": "#0072B2",  # blue
    "damaged": "#E69F00",  # orange
    "collapsed": "#D55E00",  # vermillion
}
ROAD_COLORS = {True: "#7f7f7f", False: "#CC79A7"}


def write_damage_map(
    city: CityGraph, snapshot: TwinSnapshot, scenario: DisasterScenario, out_path: str | Path
) -> Path:
    """Render the 2D city map: roads by passability, buildings by damage."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(8, 7))
    loc = {n.id: (n.lon, n.lat) for n in city.nodes}

    for e in city.edges:
        (x1, y1), (x2, y2) = loc[e.a], loc[e.b]
        passable = snapshot.edge_passable.get(e.id, True)
        ax.plot(
            [x1, x2],
            [y1, y2],
            color=ROAD_COLORS[passable],
            linewidth=1.6 if passable else 2.2,
            linestyle="-" if passable else (0, (4, 2)),
            zorder=1,
        )

    for damage, color in DAMAGE_COLORS.items():
        xs, ys = [], []
        for b in city.buildings:
            if snapshot.building_state[b.id].damage == damage:
                x, y = loc[b.node_ref]
                xs.append(x)
                ys.append(y)
        if xs:
            ax.scatter(xs, ys, s=60, c=color, label=f"{damage} ({len(xs)})", zorder=3)

    cx = [loc[c.node_ref][0] for c in city.rescue_centers]
    cy = [loc[c.node_ref][1] for c in city.rescue_centers]
    if cx:
        ax.scatter(cx, cy, s=140, marker="*", c="#009E73", label="rescue center", zorder=4)
    ax.scatter(
        [scenario.epicenter[1]],
        [scenario.epicenter[0]],
        s=180,
        marker="X",
        c="#000000",
        label=f"epicenter (M{scenario.magnitude:g})",
        zorder=5,
    )

    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(f"Damage state at t={snapshot.t:.0f} s")
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def write_survival_curve(
    scenario: DisasterScenario, report: OutcomeReport, out_path: str | Path
) -> Path:
    """Survival fraction over time with each rescue completion marked."""
    out_path = Path(out_path)
    params = scenario.params
    horizon = max(
        [params.tau_hours * 3600.0] + [entry["t_done"] * 1.25 for entry in report.decisions_log]
    )
    steps = 400
    ts = [horizon * i / steps for i in range(steps + 1)]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(
        [t / 3600.0 for t in ts],
        [survival_fraction(params, t) for t in ts],
        color="#0072B2",
        label=f"survival fraction (tau={params.tau_hours:g} h)",
    )
    for entry in report.decisions_log:
        frac = survival_fraction(params, entry["t_done"])
        ax.scatter([entry["t_done"] / 3600.0], [frac], c="#D55E00", zorder=3)
        ax.annotate(
            f"{entry['team_id']}→{entry['building_id']}: {entry['saved']}",
            (entry["t_done"] / 3600.0, frac),
            textcoords="offset points",
            xytext=(6, 6),
            fontsize=8,
        )
    ax.set_xlabel("hours since shock")
    ax.set_ylabel("survival fraction")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(
        f"Rescues: saved {report.total_saved}/{report.total_trapped} "
        f"(success rate {report.success_rate:.2f})"
    )
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def write_buildings_csv(
    city: CityGraph, snapshot: TwinSnapshot, out_path: str | Path
) -> Path:
    out_path = Path(out_path)
    with out_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["building_id", "node_ref", "occupancy", "damage", "trapped", "saved"])
        for b in city.buildings:
            s = snapshot.building_state[b.id]
            writer.writerow([b.id, b.node_ref, b.occupancy, s.damage, s.trapped, s.saved])
    return out_path


def write_decisions_csv(report: OutcomeReport, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    columns = ["team_id", "building_id", "depart", "travel_s", "t_done", "route_cost_m", "trapped", "saved"]
    with out_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for entry in report.decisions_log:
            writer.writerow([entry[c] for c in columns])
    return out_path


def write_report_artifacts(
    city: CityGraph,
    scenario: DisasterScenario,
    snapshot: TwinSnapshot,
    report: OutcomeReport,
    out_dir: str | Path,
) -> list[Path]:
    """All report artifacts into out_dir; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        write_damage_map(city, snapshot, scenario, out_dir / "damage_map.png"),
        write_survival_curve(scenario, report, out_dir / "survival_decay.png"),
        write_buildings_csv(city, snapshot, out_dir / "buildings.csv"),
        write_decisions_csv(report, out_dir / "decisions.csv"),
    ]
