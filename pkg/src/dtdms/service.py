"""HTTP + event-stream API over a session.

Thin shell: every number in a response comes from the session; handlers do
no simulation math. The event stream only announces that a snapshot exists
at some t — clients pull the full state themselves, so a dropped event
costs nothing but freshness.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .quake import ScenarioFormatError, scenario_from_dict
from .session import Session, SessionError


class EventBroker:
    """Fan-out of snapshot-available notifications to any number of listeners."""

    def __init__(self):
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict) -> None:
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            q.put(event)


def create_app(session: Session, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="dtdms", docs_url=None, redoc_url=None)
    broker = EventBroker()
    session.on_snapshot(broker.publish)

    @app.exception_handler(SessionError)
    async def _session_error(_request: Request, exc: SessionError):
        return JSONResponse(status_code=exc.status, content={"error": str(exc)})

    @app.get("/api/state")
    def state(t: float = 0.0) -> dict:
        return session.state_view(t)

    @app.get("/api/infrastructure")
    def infrastructure(layer: str, t: float = 0.0) -> dict:
        return session.infrastructure_view(layer, t)

    @app.post("/api/scenario")
    async def scenario(request: Request):
        body = await request.body()
        try:
            data = json.loads(body)
            parsed = scenario_from_dict(data)
        except (json.JSONDecodeError, ScenarioFormatError) as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        snap0 = session.apply_scenario(parsed)
        return {"applied": True, "t": snap0.t, "mode": session.mode}

    @app.get("/api/plans")
    def plans() -> dict:
        offer = session.plan_request()
        return {"mode": session.mode, **offer}

    @app.post("/api/decision")
    async def decision(request: Request):
        try:
            data = json.loads(await request.body())
            plan_id = data["plan_id"]
        except (json.JSONDecodeError, KeyError, TypeError):
            return JSONResponse(status_code=400, content={"error": "body must be {\"plan_id\": ...}"})
        report = session.decide(str(plan_id))
        return report.to_dict()

    @app.get("/api/report")
    def report():
        latest = session.last_report()
        if latest is None:
            return JSONResponse(status_code=404, content={"error": "no decision applied yet"})
        return latest.to_dict()

    @app.get("/api/events")
    def events(max_events: int | None = None, poll_s: float = 15.0):
        """Text event stream of {"t": ...} snapshot notifications.

        max_events closes the stream after that many events (scripted
        clients); otherwise heartbeats keep the connection alive.
        """

        def stream() -> Iterator[str]:
            q = broker.subscribe()
            sent = 0
            try:
                # greet with the latest available snapshot so clients can
                # refresh immediately instead of waiting for the next append
                if session.timeline is not None and len(session.timeline):
                    yield f"event: snapshot\ndata: {json.dumps({'t': session.timeline.end_t})}\n\n"
                    sent += 1
                while max_events is None or sent < max_events:
                    try:
                        event = q.get(timeout=poll_s)
                    except queue.Empty:
                        yield ": heartbeat\n\n"
                        continue
                    yield f"event: snapshot\ndata: {json.dumps(event)}\n\n"
                    sent += 1
            finally:
                broker.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
