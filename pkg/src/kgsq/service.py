"""HTTP/JSON API over the query engine: ranked queries plus browse sessions.

The model is loaded once and shared read-only across requests. Browse
sessions live in process memory with a TTL and a capacity cap; a restart
clears them.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import OrderedDict
from typing import Callable

from fastapi import FastAPI, Request
from fastapi import Query as QueryParam
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import query as q
from .graph import UnknownEntityError
from .model import EmbeddingModel
from .store import load_model_file

logger = logging.getLogger("kgsq.service")

DEFAULT_SESSION_TTL = 3600.0
DEFAULT_SESSION_CAPACITY = 10_000


class ApiError(Exception):
    def __init__(self, status: int, code: str, **extra):
        super().__init__(code)
        self.status = status
        self.body = {"error": code, **extra}


class SessionStore:
    """In-memory browse sessions: TTL-expired entries are never served and
    the oldest session is evicted once capacity is reached."""

    def __init__(
        self,
        ttl: float = DEFAULT_SESSION_TTL,
        capacity: int = DEFAULT_SESSION_CAPACITY,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.ttl = ttl
        self.capacity = capacity
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, tuple[q.BrowseSession, float, threading.Lock]] = OrderedDict()

    def _purge(self, now: float) -> None:
        while self._entries:
            sid, (_, created, _) = next(iter(self._entries.items()))
            if now - created <= self.ttl:
                break
            del self._entries[sid]

    def put(self, session: q.BrowseSession) -> None:
        now = self.clock()
        with self._lock:
            self._purge(now)
            while len(self._entries) >= self.capacity:
                self._entries.popitem(last=False)
            self._entries[session.session_id] = (session, now, threading.Lock())

    def acquire(self, session_id: str) -> tuple[q.BrowseSession, threading.Lock]:
        """Look up a live session and its per-session lock."""
        now = self.clock()
        with self._lock:
            entry = self._entries.get(session_id)
            if entry is None:
                raise KeyError(session_id)
            session, created, lock = entry
            if now - created > self.ttl:
                del self._entries[session_id]
                raise KeyError(session_id)
            return session, lock

    def __len__(self) -> int:
        return len(self._entries)


class SimilarRequest(BaseModel):
    entity: str
    k: int = Field(default=10, ge=1)
    type_filter: str | None = None
    exclude_self: bool = True


class BiasedRequest(SimilarRequest):
    positives: list[str] = []


class AnalogyRequest(BiasedRequest):
    negatives: list[str] = []


class SessionCreateRequest(BaseModel):
    entity: str


class SessionStepRequest(BaseModel):
    positives: list[str] = []
    negatives: list[str] = []
    k: int = Field(default=10, ge=1)
    type_filter: str | None = None


def search_entities(
    model: EmbeddingModel, text: str, type_filter: str | None = None, limit: int = 20
) -> list[dict]:
    """Case-insensitive substring search ordered by (match position, name)."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if not text:
        return []
    needle = text.lower()
    vocab = model.vocabulary
    matches = []
    for eid, name in enumerate(vocab.entity_names):
        pos = name.lower().find(needle)
        if pos < 0:
            continue
        etype = vocab.type_of(eid)
        if type_filter is not None and etype != type_filter:
            continue
        matches.append((pos, name, eid, etype))
    matches.sort(key=lambda m: (m[0], m[1]))
    return [{"name": name, "id": eid, "type": etype} for _, name, eid, etype in matches[:limit]]


def create_app(
    model: EmbeddingModel,
    session_ttl: float = DEFAULT_SESSION_TTL,
    session_capacity: int = DEFAULT_SESSION_CAPACITY,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    app = FastAPI(title="kgsq", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(session_ttl, session_capacity, clock)
    app.state.model = model
    app.state.sessions = store
    vocab = model.vocabulary

    def resolve(name: str) -> int:
        try:
            return vocab.entity_id(name)
        except UnknownEntityError:
            raise ApiError(404, "unknown_entity", name=name) from None

    def resolve_all(names: list[str]) -> tuple[int, ...]:
        return tuple(resolve(n) for n in names)

    def get_session(session_id: str) -> tuple[q.BrowseSession, threading.Lock]:
        try:
            return store.acquire(session_id)
        except KeyError:
            raise ApiError(404, "unknown_session", session_id=session_id) from None

    def results_body(ranked: q.RankedList) -> dict:
        return {"results": q.results_payload(model, ranked)}

    def trail_summary(session: q.BrowseSession) -> dict:
        return {
            "session_id": session.session_id,
            "anchor": vocab.entity_names[session.anchor_entity],
            "steps": [
                {
                    "positives": [vocab.entity_names[i] for i in step.spec.positives],
                    "negatives": [vocab.entity_names[i] for i in step.spec.negatives],
                    "k": step.spec.k,
                    "type_filter": step.spec.type_filter,
                    "results": q.results_payload(model, step.results),
                }
                for step in session.trail
            ],
        }

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(exc.body, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            {"error": "invalid_request", "detail": exc.errors()}, status_code=422
        )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        logger.info(
            "%s %s -> %d (%.1f ms)",
            request.method, request.url.path, response.status_code, elapsed_ms,
        )
        return response

    @app.get("/health")
    def health():
        return {"status": "ok", "entities": model.n_entities, "dim": model.dim}

    @app.get("/entities")
    def entities(
        text: str = QueryParam(default="", alias="q"),
        type: str | None = None,
        limit: int = QueryParam(default=20, ge=1),
    ):
        return search_entities(model, text, type, limit)

    @app.post("/query/similar")
    def query_similar(req: SimilarRequest):
        spec = q.QuerySpec(
            anchor=resolve(req.entity), k=req.k,
            type_filter=req.type_filter, exclude=req.exclude_self,
        )
        return results_body(q.similar_entities(spec, model))

    @app.post("/query/biased")
    def query_biased(req: BiasedRequest):
        spec = q.QuerySpec(
            anchor=resolve(req.entity), positives=resolve_all(req.positives),
            k=req.k, type_filter=req.type_filter, exclude=req.exclude_self,
        )
        return results_body(q.similar_with_bias(spec, model))

    @app.post("/query/analogy")
    def query_analogy(req: AnalogyRequest):
        spec = q.QuerySpec(
            anchor=resolve(req.entity), positives=resolve_all(req.positives),
            negatives=resolve_all(req.negatives), k=req.k,
            type_filter=req.type_filter, exclude=req.exclude_self,
        )
        return results_body(q.analogy_query(spec, model))

    @app.post("/sessions")
    def create_session(req: SessionCreateRequest):
        session = q.browse_start(resolve(req.entity), model)
        store.put(session)
        return {"session_id": session.session_id}

    @app.post("/sessions/{session_id}/step")
    def session_step(session_id: str, req: SessionStepRequest):
        session, lock = get_session(session_id)
        positives = resolve_all(req.positives)
        negatives = resolve_all(req.negatives)
        with lock:
            _, ranked = q.browse_step(
                session, model, positives, negatives, req.k, req.type_filter
            )
            return {"results": q.results_payload(model, ranked), "step_index": len(session.trail)}

    @app.post("/sessions/{session_id}/back")
    def session_back(session_id: str):
        session, lock = get_session(session_id)
        with lock:
            try:
                q.browse_back(session)
            except ValueError:
                raise ApiError(409, "at_session_start", session_id=session_id) from None
            return trail_summary(session)

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        session, lock = get_session(session_id)
        with lock:
            return trail_summary(session)

    return app


def serve(
    model_path,
    host: str = "127.0.0.1",
    port: int = 8080,
    session_ttl: float = DEFAULT_SESSION_TTL,
    session_capacity: int = DEFAULT_SESSION_CAPACITY,
    log_level: str = "info",
) -> None:
    """Load a model file and serve it until interrupted."""
    import uvicorn

    model = load_model_file(model_path)
    logger.info(
        "serving model: %d entities, %d relations, dim %d",
        model.n_entities, model.n_relations_total, model.dim,
    )
    app = create_app(model, session_ttl, session_capacity)
    uvicorn.run(app, host=host, port=port, log_level=log_level)
