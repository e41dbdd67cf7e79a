"""End-to-end smoke test of `dtdms serve` over real sockets."""

import json
import socket
import subprocess
import sys
import time

import httpx
import pytest


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture
def server(desk_city_path, desk_scenario_path, tmp_path):
    port = free_port()
    feed_port = free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "dtdms.cli", "serve",
            "--city", str(desk_city_path),
            "--scenario", str(desk_scenario_path),
            "--port", str(port),
            "--feed-port", str(feed_port),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 20
        while time.monotonic() < deadline:
            try:
                httpx.get(f"{base}/api/state", params={"t": 0}, timeout=1)
                break
            except httpx.TransportError:
                if proc.poll() is not None:
                    raise RuntimeError(f"server died: {proc.stdout.read()}")
                time.sleep(0.1)
        else:
            raise RuntimeError("server did not come up")
        yield base, feed_port
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()


def test_serve_full_operator_loop(server):
    base, feed_port = server

    state = httpx.get(f"{base}/api/state", params={"t": 0}, timeout=5).json()
    assert any(b["damage"] == "collapsed" for b in state["buildings"])

    layer = httpx.get(
        f"{base}/api/infrastructure", params={"layer": "electricity", "t": 0}, timeout=5
    ).json()
    assert layer["layer"] == "electricity"
    assert len(layer["items"]) == 3

    offer = httpx.get(f"{base}/api/plans", timeout=10).json()
    assert offer["plans"], "expected plan offers on the desk scenario"
    top = offer["plans"][0]

    report = httpx.post(
        f"{base}/api/decision", json={"plan_id": top["plan_id"]}, timeout=10
    ).json()
    assert report["success_rate"] == top["success_rate"]

    served = httpx.get(f"{base}/api/report", timeout=5).json()
    assert served == report

    # live feed: flip an infra asset and see it in the next state query
    with socket.create_connection(("127.0.0.1", feed_port), timeout=5) as sock:
        line = json.dumps(
            {"ts": 1, "sensor_id": "s9", "kind": "utility", "target_id": "w-main", "value": "down"}
        )
        sock.sendall((line + "\n").encode())
    deadline = time.monotonic() + 10
    while time.monotonic() < deadline:
        state = httpx.get(f"{base}/api/state", params={"t": 0}, timeout=5).json()
        water = {i["id"]: i["status"] for i in state["infrastructure"]["water"]}
        if water["w-main"] == "down":
            break
        time.sleep(0.1)
    assert water["w-main"] == "down"

    # event stream greets with the latest snapshot t
    with httpx.stream(
        "GET", f"{base}/api/events", params={"max_events": 1}, timeout=10
    ) as stream:
        data_lines = [l for l in stream.iter_lines() if l.startswith("data:")]
    payload = json.loads(data_lines[0].split("data:", 1)[1])
    assert payload["t"] == report["decisions_log"][-1]["t_done"]
