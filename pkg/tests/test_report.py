import csv

from dtdms.city import load_city
from dtdms.planner import PlanLimits, recommend
from dtdms.quake import apply_earthquake, load_scenario
from dtdms.report import write_report_artifacts
from dtdms.session import Session


def test_report_artifacts_written(tmp_path, desk_city_path, desk_scenario_path):
    city = load_city(desk_city_path)
    scenario = load_scenario(desk_scenario_path)
    snap = apply_earthquake(city, scenario)
    plan, report = recommend(city, scenario, snap, PlanLimits(), top_n=1)[0]

    paths = write_report_artifacts(city, scenario, snap, report, tmp_path / "artifacts")
    names = sorted(p.name for p in paths)
    assert names == ["buildings.csv", "damage_map.png", "decisions.csv", "survival_decay.png"]
    for p in paths:
        assert p.stat().st_size > 0

    with (tmp_path / "artifacts" / "decisions.csv").open() as handle:
        rows = list(csv.DictReader(handle))
    assert [r["building_id"] for r in rows] == [
        entry["building_id"] for entry in report.decisions_log
    ]
    assert all(int(r["saved"]) <= int(r["trapped"]) for r in rows)


def test_csv_artifacts_deterministic(tmp_path, desk_city_path, desk_scenario_path):
    city = load_city(desk_city_path)
    scenario = load_scenario(desk_scenario_path)
    session = Session(city, mode="estimating")
    session.apply_scenario(scenario)
    report = session.last_report()
    final = session.timeline.at(session.timeline.end_t)

    out_a = write_report_artifacts(city, scenario, final, report, tmp_path / "a")
    out_b = write_report_artifacts(city, scenario, final, report, tmp_path / "b")
    for pa, pb in zip(out_a, out_b):
        if pa.suffix == ".csv":
            assert pa.read_bytes() == pb.read_bytes()
