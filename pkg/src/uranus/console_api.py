"""Read-only replay service for the operator console.

Serves precomputed prediction files over HTTP/JSON: scenario listings,
time-window detection tables, trajectory polylines, and model metadata.
The store is loaded once at startup and never mutated afterwards; every
endpoint is a pure read, so identical queries return identical bodies
and any number of clients may poll concurrently.

Scenario ids are prediction-file stems. Windows are inclusive UNIX-ms
ranges passed as `from`/`to` query integers; both default to the full
extent. Responses above the page cap carry a continuation token.
"""

import os

from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import pipeline
from .core import DataError

PAGE_CAP = 10_000


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, "code": code})


def _row_dict(est) -> dict:
    return {
        "timestamp": est.t,
        "sensors": list(est.sensors),
        "latitude": est.latitude,
        "longitude": est.longitude,
        "altitude": est.altitude,
        "speed": est.speed,
        "drone_type": est.drone_type,
        "confidence": est.confidence,
    }


def _summary(rows) -> dict | None:
    if not rows:
        return None
    counts: dict = {}
    for est in rows:
        counts[est.drone_type] = counts.get(est.drone_type, 0) + 1
    # Modal type; count ties resolve by class order so replays never flap.
    order = {name: i for i, name in enumerate(pipeline.CLASS_NAMES)}
    modal = max(counts, key=lambda name: (counts[name], -order.get(name, len(order))))
    return {
        "modal_type": modal,
        "mean_confidence": sum(est.confidence for est in rows) / len(rows),
        "rows": len(rows),
    }


class PredictionStore:
    """Immutable in-memory copy of a directory of prediction files."""

    def __init__(self, store_dir):
        if not os.path.isdir(store_dir):
            raise DataError(f"not a store directory: {store_dir}")
        self.scenarios: dict[str, list] = {}
        for name in sorted(os.listdir(store_dir)):
            if not name.endswith(".csv"):
                continue
            estimates = pipeline.read_predictions(os.path.join(store_dir, name))
            estimates.sort(key=lambda est: est.t)
            self.scenarios[name[: -len(".csv")]] = estimates

    def descriptors(self) -> list[dict]:
        out = []
        for sid in sorted(self.scenarios):
            rows = self.scenarios[sid]
            out.append(
                {
                    "id": sid,
                    "t_start": rows[0].t if rows else None,
                    "t_end": rows[-1].t if rows else None,
                    "rows": len(rows),
                }
            )
        return out

    def window(self, sid: str, t_from: int | None, t_to: int | None) -> list:
        rows = self.scenarios[sid]
        return [
            est
            for est in rows
            if (t_from is None or est.t >= t_from) and (t_to is None or est.t <= t_to)
        ]


def _load_model_info(bundle_dir) -> dict:
    bundle = pipeline.load_bundle(bundle_dir)
    return {
        "targets": list(pipeline.ALL_TARGETS),
        "features": {t: list(bundle.features[t]) for t in pipeline.ALL_TARGETS},
        "cv": {t: bundle.cv[t]["mean"] for t in pipeline.ALL_TARGETS},
        "seed": bundle.seed,
        "version": bundle.version,
        "inputs_digest": bundle.inputs_digest,
        "classes": list(pipeline.CLASS_NAMES),
    }


def create_app(store_dir, bundle_dir=None, ui_dir=None, page_cap: int = PAGE_CAP) -> FastAPI:
    """Build the service around one store; fails fast on unreadable input."""
    store = PredictionStore(store_dir)
    model_info = _load_model_info(bundle_dir) if bundle_dir is not None else None
    app = FastAPI(title="uranus replay", docs_url=None, redoc_url=None)

    @app.get("/scenarios")
    def list_scenarios():
        return {"scenarios": store.descriptors()}

    @app.get("/scenarios/{sid}/detections")
    def detections(
        sid: str,
        t_from: int | None = Query(None, alias="from"),
        t_to: int | None = Query(None, alias="to"),
        cursor: str | None = None,
    ):
        if sid not in store.scenarios:
            return _error(404, "unknown-scenario", f"unknown scenario: {sid}")
        if t_from is not None and t_to is not None and t_from > t_to:
            return _error(400, "bad-window", f"window is inverted: {t_from} > {t_to}")
        start = 0
        if cursor is not None:
            if not cursor.isdigit():
                return _error(400, "bad-cursor", f"malformed cursor: {cursor!r}")
            start = int(cursor)
        rows = store.window(sid, t_from, t_to)
        page = rows[start : start + page_cap]
        next_cursor = str(start + page_cap) if start + page_cap < len(rows) else None
        return {
            "rows": [_row_dict(est) for est in page],
            "total": len(rows),
            "next_cursor": next_cursor,
            "summary": _summary(rows),
        }

    @app.get("/scenarios/{sid}/track")
    def track(
        sid: str,
        t_from: int | None = Query(None, alias="from"),
        t_to: int | None = Query(None, alias="to"),
    ):
        if sid not in store.scenarios:
            return _error(404, "unknown-scenario", f"unknown scenario: {sid}")
        if t_from is not None and t_to is not None and t_from > t_to:
            return _error(400, "bad-window", f"window is inverted: {t_from} > {t_to}")
        rows = store.window(sid, t_from, t_to)
        # One segment per predicted type: a multi-drone window splits into
        # one polyline per drone, a single-drone window stays one line.
        segments: dict[str, list] = {}
        for est in rows:
            segments.setdefault(est.drone_type, []).append(
                [est.t, est.latitude, est.longitude]
            )
        ordered = sorted(segments.items(), key=lambda kv: kv[1][0][0])
        return {
            "segments": [
                {"drone_type": name, "points": points} for name, points in ordered
            ]
        }

    @app.get("/model/info")
    def info():
        if model_info is None:
            return _error(404, "no-bundle", "service started without a model bundle")
        return model_info

    if ui_dir is not None and os.path.isdir(ui_dir):
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
