"""JSON-over-HTTP service exposing reports, mitigation, grids, and realization.

Sessions are keyed by the uploaded dataset's digest, so re-uploading the
same bytes lands in the same session and every downstream response is
reproducible. Sessions hold the summary (and optionally the raw rows, which
realization needs); grid responses are cached per (digest, request hash).
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Mapping

from fastapi import FastAPI, Request, Response

from . import grid as grid_mod
from .errors import FairtabError, IOFailure, ValidationError
from .jsonio import canonical_bytes
from .measures import bias_report
from .mitigation import (
    CostModel,
    KTargets,
    MitigationPlan,
    budgeted_mitigation,
    minimal_mitigation,
    mitigate_with_targets,
)
from .schema import Dataset, FairnessSchema, GroupKey, load_dataset
from .sampling import realize_plan
from .summary import SummaryTable, summarize


@dataclass(frozen=True)
class ServiceConfig:
    bind: str = "127.0.0.1:8434"
    upload_cap: int = 16 * 1024 * 1024
    session_capacity: int = 64
    default_tau: float = 0.1

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        return cls(
            bind=env.get("FAIRTAB_BIND", cls.bind),
            upload_cap=int(env.get("FAIRTAB_UPLOAD_CAP", cls.upload_cap)),
            session_capacity=int(env.get("FAIRTAB_SESSION_CAPACITY", cls.session_capacity)),
            default_tau=float(env.get("FAIRTAB_DEFAULT_TAU", cls.default_tau)),
        )


#: Cached grid payloads kept per session before the oldest are dropped.
GRID_CACHE_CAP = 32


@dataclass
class Session:
    summary: SummaryTable
    dataset: Dataset | None
    excluded: int
    grid_cache: OrderedDict[str, bytes] = field(default_factory=OrderedDict)

    def cache_grid(self, key: str, payload: bytes) -> None:
        self.grid_cache[key] = payload
        while len(self.grid_cache) > GRID_CACHE_CAP:
            self.grid_cache.popitem(last=False)


class SessionStore:
    """Least-recently-used session map; thread-safe."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValidationError("session capacity must be positive")
        self._capacity = capacity
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()

    def put(self, key: str, session: Session) -> None:
        with self._lock:
            self._sessions[key] = session
            self._sessions.move_to_end(key)
            while len(self._sessions) > self._capacity:
                self._sessions.popitem(last=False)

    def get(self, key: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(key)
            if session is not None:
                self._sessions.move_to_end(key)
            return session

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def _json_response(doc: Mapping, status: int = 200) -> Response:
    return Response(content=canonical_bytes(doc), status_code=status, media_type="application/json")


def _error(status: int, code: str, detail: str) -> Response:
    return _json_response({"error": code, "detail": detail}, status)


def _parse_op(schema: FairnessSchema, doc: Mapping) -> grid_mod.PolicyOp:
    return grid_mod.PolicyOp(
        doc["kind"],
        GroupKey.from_json(schema, doc["group"]),
        doc["label"],
        int(doc["max"]),
    )


def _parse_constraints(
    schema: FairnessSchema, docs, x_op: grid_mod.PolicyOp, y_op: grid_mod.PolicyOp
) -> list:
    constraints = []
    for doc in docs or []:
        kind = doc.get("kind")
        if kind == "max_op":
            axis = doc.get("axis")
            op = x_op if axis == "x" else y_op if axis == "y" else None
            if op is None:
                raise ValidationError("max_op constraint needs axis 'x' or 'y'")
            constraints.append(grid_mod.MaxOpValue(op, int(doc["limit"])))
        elif kind == "min_total":
            constraints.append(grid_mod.MinTotalRows(int(doc["limit"])))
        elif kind == "budget":
            constraints.append(grid_mod.Budget(CostModel.from_json(schema, doc)))
        else:
            raise ValidationError(f"unknown constraint kind {kind!r}")
    return constraints


VALID_MEASURES = ("ub", "ir", "or", "md")


def report_document(
    summary: SummaryTable, tau: float, measures: tuple[str, ...] = ("ub",)
) -> dict:
    """Bias report as JSON; classical measure columns are appended per cell
    when selected (each cell's group versus its complement, the cell's label
    taken as positive)."""
    for name in measures:
        if name not in VALID_MEASURES:
            raise ValidationError(f"unknown measure {name!r}; pick from {VALID_MEASURES}")
    report = bias_report(summary, tolerance=tau)
    doc = report.to_json()
    extra = [name for name in measures if name != "ub"]
    if extra:
        from .measures import classical_measures

        for cell_doc, cell in zip(doc["cells"], report.cells):
            m = classical_measures(summary, cell.group, cell.label)
            values = {"ir": m.ir, "or": m.or_, "md": m.md}
            for name in extra:
                cell_doc[name] = values[name]
    doc["measures"] = list(measures)
    return doc


def grid_document(summary: SummaryTable, body: Mapping) -> dict:
    schema = summary.schema
    x_op = _parse_op(schema, body["x_op"])
    y_op = _parse_op(schema, body["y_op"])
    focus_doc = body["focus"]
    focus = (GroupKey.from_json(schema, focus_doc["group"]), focus_doc["label"])
    step = body.get("step")
    grid = grid_mod.bias_surface(summary, x_op, y_op, focus, step=step)
    constraints = _parse_constraints(schema, body.get("constraints"), x_op, y_op)
    feasible = grid_mod.feasible_mask(grid, constraints) if constraints else None
    contour = None
    if body.get("contour", True):
        contour = grid_mod.zero_bias_contour(
            summary, x_op, y_op, focus, x_values=grid.x_values
        )
    return grid.to_json(schema, feasible=feasible, contour=contour)


def mitigate_document(summary: SummaryTable, body: Mapping, default_tau: float) -> dict:
    schema = summary.schema
    rounding = body.get("rounding", "floor")
    if body.get("plan"):
        # budget an existing plan (e.g. re-order funding without re-solving)
        plan = MitigationPlan.from_json(schema, body["plan"])
    elif body.get("targets"):
        targets = KTargets.from_json(schema, body["targets"])
        plan = mitigate_with_targets(summary, targets, rounding)
    elif body.get("profile_attrs"):
        targets = KTargets.group_profile(summary, body["profile_attrs"])
        plan = mitigate_with_targets(summary, targets, rounding)
    else:
        plan = minimal_mitigation(summary, rounding=rounding)
    doc: dict[str, Any] = {"plan": plan.to_json()}
    if body.get("costs") is not None or body.get("budget") is not None:
        cost_doc = dict(body.get("costs") or {})
        if body.get("budget") is not None:
            cost_doc["budget"] = body["budget"]
        costs = CostModel.from_json(schema, cost_doc)
        order_doc = body.get("order")
        if order_doc:
            order = [
                (GroupKey.from_json(schema, entry["group"]), entry.get("label"))
                for entry in order_doc
            ]
        else:
            order = [(GroupKey(entry.group), None) for entry in plan.entries]
        outcome = budgeted_mitigation(
            summary, plan, costs, order, body.get("tau", default_tau)
        )
        doc["funding"] = [
            {
                "group": GroupKey(r.group).to_json(schema),
                "label": r.label,
                "requested": r.requested,
                "funded": r.funded,
                "status": r.status,
                "unit_cost": r.unit_cost,
                "spent": r.spent,
            }
            for r in outcome.funded
        ]
        doc["remaining_budget"] = outcome.remaining_budget
        doc["residual"] = outcome.residual.to_json()
    return doc


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    app = FastAPI(title="fairtab", docs_url=None, redoc_url=None)
    store = SessionStore(config.session_capacity)
    app.state.config = config
    app.state.store = store

    @app.exception_handler(FairtabError)
    async def _handle_fairtab_error(request: Request, exc: FairtabError):
        status = 400 if isinstance(exc, ValidationError) else 500
        if isinstance(exc, IOFailure):
            status = 500
        return _error(status, type(exc).__name__, str(exc))

    @app.post("/datasets")
    async def upload(request: Request):
        body = await request.body()
        if len(body) > config.upload_cap:
            return _error(413, "UploadTooLarge", f"upload exceeds {config.upload_cap} bytes")
        try:
            doc = json.loads(body)
        except ValueError as exc:
            return _error(400, "MalformedBody", str(exc))
        if not isinstance(doc, dict) or "csv" not in doc or "schema" not in doc:
            return _error(400, "MalformedBody", "expected {'csv': ..., 'schema': ...}")
        schema = FairnessSchema.from_json(doc["schema"])
        dataset = load_dataset(
            doc["csv"].encode("utf-8"), schema, lenient=bool(doc.get("lenient", False))
        )
        summary = summarize(dataset)
        keep_rows = bool(doc.get("keep_rows", False))
        session = Session(summary, dataset if keep_rows else None, len(dataset.excluded))
        store.put(summary.digest, session)
        return _json_response(
            {
                "session": summary.digest,
                "digest": summary.digest,
                "n": summary.n,
                "excluded": len(dataset.excluded),
                "summary": summary.to_json(),
            },
            201,
        )

    def _session_or_404(session_id: str) -> Session | Response:
        session = store.get(session_id)
        if session is None:
            return _error(404, "UnknownSession", f"no session {session_id!r}")
        return session

    @app.get("/datasets/{session_id}/summary")
    async def summary(session_id: str):
        session = _session_or_404(session_id)
        if isinstance(session, Response):
            return session
        return _json_response(session.summary.to_json())

    @app.get("/datasets/{session_id}/report")
    async def report(session_id: str, tau: float | None = None, measures: str = "ub"):
        session = _session_or_404(session_id)
        if isinstance(session, Response):
            return session
        wanted = tuple(name.strip() for name in measures.split(",") if name.strip())
        return _json_response(
            report_document(
                session.summary, config.default_tau if tau is None else tau, wanted
            )
        )

    @app.post("/datasets/{session_id}/mitigate")
    async def mitigate(session_id: str, request: Request):
        session = _session_or_404(session_id)
        if isinstance(session, Response):
            return session
        body = await request.json()
        try:
            doc = mitigate_document(session.summary, body or {}, config.default_tau)
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, "MalformedBody", str(exc))
        doc["digest"] = session.summary.digest
        return _json_response(doc)

    @app.post("/datasets/{session_id}/grid")
    async def grid(session_id: str, request: Request):
        session = _session_or_404(session_id)
        if isinstance(session, Response):
            return session
        raw = await request.body()
        cache_key = hashlib.sha256(raw).hexdigest()
        cached = session.grid_cache.get(cache_key)
        if cached is not None:
            return Response(content=cached, media_type="application/json")
        try:
            body = json.loads(raw) if raw else {}
            payload = canonical_bytes(grid_document(session.summary, body))
        except FairtabError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, "MalformedBody", str(exc))
        session.cache_grid(cache_key, payload)
        return Response(content=payload, media_type="application/json")

    @app.post("/datasets/{session_id}/realize")
    async def realize(session_id: str, request: Request):
        session = _session_or_404(session_id)
        if isinstance(session, Response):
            return session
        if session.dataset is None:
            return _error(
                400,
                "RowsNotRetained",
                "upload with keep_rows=true to realize plans in a session",
            )
        body = await request.json()
        if "plan" in body:
            plan = MitigationPlan.from_json(session.summary.schema, body["plan"])
        else:
            additions = {}
            for entry in body.get("additions", []):
                key = GroupKey.from_json(session.summary.schema, entry["group"])
                additions[(key.entries, entry["label"])] = int(entry["count"])
            plan = additions
        rows, report_ = realize_plan(plan, session.dataset, int(body.get("seed", 0)))
        return _json_response(
            {
                "digest": session.summary.digest,
                "rows": [dict(r) for r in rows],
                "report": report_.to_json(session.summary.schema),
            }
        )

    return app


def run(config: ServiceConfig | None = None) -> None:  # pragma: no cover - thin wrapper
    import uvicorn

    config = config or ServiceConfig.from_env()
    host, _, port = config.bind.partition(":")
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8434), log_level="warning")
