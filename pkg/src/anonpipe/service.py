"""HTTP facade over the pipeline for the workbench UI.

Sessions hold an uploaded table plus the current run configuration,
entirely in memory (a workbench should not persist health-like uploads).
Responses reuse the CLI's report serialisers, so for the same table and
config both surfaces emit byte-identical documents. Report bytes are
cached per session and invalidated by any config mutation.
"""

from __future__ import annotations

import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .deidentify import RuleSet, apply_rule, ruleset_from_dict
from .dimension import FeasibilityConstraints
from .errors import AnonError, ApplyError, ConfigError, CoverageError
from .identify import Thresholds
from .pipeline import run_dimension_stage, run_identify_stage
from .render import json_bytes
from .table import csv_bytes, load_csv, normalize_missing, schema_from_dict

DEFAULT_UPLOAD_CAP = 50 * 1024 * 1024
DEFAULT_TTL_SECONDS = 3600.0


@dataclass
class Session:
    id: str
    table: object  # raw loaded Table
    thresholds: Thresholds = Thresholds(25.0, 1.0)
    overrides: dict = field(default_factory=dict)
    ruleset: RuleSet = RuleSet(())
    constraints: FeasibilityConstraints = FeasibilityConstraints()
    policy: str = "max_nue"
    drop_threshold: float = 0.85
    cache: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)

    def invalidate(self):
        self.cache.clear()


class SessionStore:
    def __init__(self, ttl: float = DEFAULT_TTL_SECONDS):
        self._sessions: dict[str, Session] = {}
        self._ttl = ttl
        self._lock = threading.Lock()

    def create(self, table) -> Session:
        session = Session(id=uuid.uuid4().hex, table=table)
        with self._lock:
            self._purge()
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            self._purge()
            session = self._sessions.get(session_id)
            if session is not None:
                session.last_access = time.monotonic()
            return session

    def delete(self, session_id: str) -> bool:
        with self._lock:
            return self._sessions.pop(session_id, None) is not None

    def _purge(self):
        now = time.monotonic()
        stale = [sid for sid, s in self._sessions.items()
                 if now - s.last_access > self._ttl]
        for sid in stale:
            del self._sessions[sid]


def _error(status: int, message: str, **detail) -> JSONResponse:
    body = {"error": message}
    body.update(detail)
    return JSONResponse(body, status_code=status)


def create_app(ui_dir: str | None = None,
               upload_cap: int = DEFAULT_UPLOAD_CAP,
               ttl: float = DEFAULT_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="anonpipe workbench service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    store = SessionStore(ttl=ttl)
    app.state.sessions = store

    @app.middleware("http")
    async def cap_upload(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > upload_cap:
            return _error(413, "upload exceeds size cap",
                          cap_bytes=upload_cap)
        return await call_next(request)

    def _session_or_404(session_id: str):
        session = store.get(session_id)
        if session is None:
            return None, _error(404, f"unknown session {session_id}")
        return session, None

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.body()
        if len(body) > upload_cap:
            return _error(413, "upload exceeds size cap", cap_bytes=upload_cap)
        try:
            doc = json.loads(body)
        except ValueError:
            return _error(400, "body must be JSON with csv and schema fields")
        if "csv" not in doc or "schema" not in doc:
            return _error(400, "body must carry csv text and a schema")
        try:
            schema = schema_from_dict(doc["schema"])
            table = load_csv(io.BytesIO(doc["csv"].encode("utf-8")), schema,
                             name=doc.get("name", "upload"))
        except (AnonError, ValueError) as exc:
            return _error(400, str(exc))
        session = store.create(table)
        return JSONResponse({"session_id": session.id,
                             "row_count": table.row_count,
                             "attributes": table.attribute_names},
                            status_code=201)

    @app.get("/sessions/{session_id}/identification")
    def identification(session_id: str, alpha: float | None = None,
                       beta: float | None = None):
        session, err = _session_or_404(session_id)
        if err:
            return err
        with session.lock:
            try:
                thresholds = Thresholds(
                    session.thresholds.alpha_percent if alpha is None else alpha,
                    session.thresholds.beta_percent if beta is None else beta)
            except ValueError as exc:
                return _error(400, str(exc))
            key = ("identification", thresholds.alpha_percent,
                   thresholds.beta_percent)
            if key not in session.cache:
                stage = run_identify_stage(session.table, thresholds,
                                           session.overrides,
                                           session.drop_threshold)
                session.cache[key] = json_bytes(stage.report.to_dict())
            return Response(session.cache[key], media_type="application/json")

    @app.put("/sessions/{session_id}/overrides")
    async def put_overrides(session_id: str, request: Request):
        session, err = _session_or_404(session_id)
        if err:
            return err
        doc = await request.json()
        overrides = doc.get("overrides", doc)
        if (not isinstance(overrides, dict) or
                not all(isinstance(v, str) for v in overrides.values())):
            return _error(400, "overrides must map attribute to label")
        bad = [v for v in overrides.values()
               if v not in ("DID", "QID", "SA", "NSA")]
        if bad:
            return _error(400, f"unknown labels: {', '.join(sorted(set(bad)))}")
        unknown = [k for k in overrides
                   if k not in session.table.attribute_names]
        if unknown:
            return _error(400, "unknown attributes: " + ", ".join(sorted(unknown)))
        with session.lock:
            session.overrides = dict(overrides)
            session.invalidate()
        return JSONResponse({"overrides": session.overrides})

    @app.put("/sessions/{session_id}/config")
    async def put_config(session_id: str, request: Request):
        """Commit thresholds, constraints, or policy for subsequent reports."""
        session, err = _session_or_404(session_id)
        if err:
            return err
        doc = await request.json()
        try:
            thresholds = session.thresholds
            if "thresholds" in doc:
                thr = doc["thresholds"]
                thresholds = Thresholds(float(thr["alpha_percent"]),
                                        float(thr["beta_percent"]))
            constraints = session.constraints
            if "constraints" in doc:
                cons = doc["constraints"]
                constraints = FeasibilityConstraints(
                    k_min=int(cons.get("k_min", constraints.k_min)),
                    l_min=int(cons.get("l_min", constraints.l_min)),
                    t_max=float(cons.get("t_max", constraints.t_max)))
            policy = doc.get("policy", session.policy)
            if policy not in ("max_nue", "smallest_d"):
                raise ValueError(f"unknown policy {policy!r}")
        except (AnonError, KeyError, TypeError, ValueError) as exc:
            return _error(400, str(exc))
        with session.lock:
            session.thresholds = thresholds
            session.constraints = constraints
            session.policy = policy
            session.invalidate()
        return JSONResponse({
            "thresholds": {"alpha_percent": thresholds.alpha_percent,
                           "beta_percent": thresholds.beta_percent},
            "constraints": {"k_min": constraints.k_min,
                            "l_min": constraints.l_min,
                            "t_max": constraints.t_max},
            "policy": policy,
        })

    @app.put("/sessions/{session_id}/rules")
    async def put_rules(session_id: str, request: Request):
        session, err = _session_or_404(session_id)
        if err:
            return err
        doc = await request.json()
        try:
            ruleset = ruleset_from_dict(doc)
        except (AnonError, KeyError, TypeError, ValueError) as exc:
            return _error(400, f"invalid ruleset: {exc}")
        # eager coverage check against the session's normalised table
        normalised, _ = normalize_missing(session.table)
        for rule in ruleset.rules:
            if rule.attribute not in normalised.attribute_names:
                return _error(400, f"rule for unknown attribute "
                                   f"{rule.attribute!r}")
            try:
                apply_rule(normalised, rule)
            except CoverageError as exc:
                return _error(422, str(exc), attribute=exc.attribute,
                              row=exc.row, value=exc.value)
        with session.lock:
            session.ruleset = ruleset
            session.invalidate()
        return JSONResponse({"rules": len(ruleset.rules)})

    def _dimension_bytes(session: Session) -> bytes | JSONResponse:
        key = ("dimensions",)
        if key not in session.cache:
            stage = run_identify_stage(session.table, session.thresholds,
                                       session.overrides,
                                       session.drop_threshold)
            try:
                dim = run_dimension_stage(stage, session.ruleset,
                                          session.constraints, session.policy)
            except CoverageError as exc:
                return _error(422, str(exc), attribute=exc.attribute,
                              row=exc.row, value=exc.value)
            except ApplyError as exc:
                cause = exc.cause
                if isinstance(cause, CoverageError):
                    return _error(422, str(cause), attribute=cause.attribute,
                                  row=cause.row, value=cause.value)
                return _error(422, str(exc))
            except ConfigError as exc:
                return _error(422, str(exc))
            session.cache[key] = json_bytes(dim.report.to_dict())
            session.cache[("export",)] = csv_bytes(dim.chosen.table)
            for c in dim.candidates:
                session.cache[("preview", c.d)] = json_bytes({
                    "d": c.d,
                    "attributes": c.table.attribute_names,
                    "rows": [list(r) for r in c.table.rows[:20]],
                })
        return session.cache[key]

    @app.get("/sessions/{session_id}/dimensions")
    def dimensions(session_id: str):
        session, err = _session_or_404(session_id)
        if err:
            return err
        with session.lock:
            payload = _dimension_bytes(session)
            if isinstance(payload, JSONResponse):
                return payload
            return Response(payload, media_type="application/json")

    @app.get("/sessions/{session_id}/candidates/{d}/preview")
    def preview(session_id: str, d: int):
        """First 20 anonymised rows of one dimension candidate."""
        session, err = _session_or_404(session_id)
        if err:
            return err
        with session.lock:
            payload = _dimension_bytes(session)
            if isinstance(payload, JSONResponse):
                return payload
            cached = session.cache.get(("preview", d))
            if cached is None:
                return _error(404, f"no candidate with d={d}")
            return Response(cached, media_type="application/json")

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        session, err = _session_or_404(session_id)
        if err:
            return err
        with session.lock:
            payload = _dimension_bytes(session)
            if isinstance(payload, JSONResponse):
                return payload
            return Response(session.cache[("export",)], media_type="text/csv")

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete(session_id: str):
        session, err = _session_or_404(session_id)
        if err:
            return err
        store.delete(session_id)
        return Response(status_code=204)

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
