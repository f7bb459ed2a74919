"""Request/response service over the engine, registry, and retrieval modules.

Thin adapters only: every endpoint defers to the module calls and reuses the
wire artifact encoding, so behavior through the service matches direct use.
Runs live in memory; the registry and vector store are durable under the
configured data directory.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .backends import default_registry
from .experiments import fig_image_experiment, fig_text_experiment
from .fingerprints import Embedding, embed_artifact
from .flows import (
    SIGNATURES,
    CHECKPOINT_MODALITIES,
    EditModalityMismatch,
    Engine,
    FlowSyntaxError,
    RunNotFound,
    RunState,
    RunStatus,
    WrongState,
    flow_spec_to_doc,
    parse_flow_spec,
    plan_order,
    validate_flow,
)
from .media import Artifact, Modality
from .registry import NotFound, RegistrationContext, Registry, UriRecord
from .remote import BadResponse, decode_payload, encode_artifact
from .store import EmptySegment

STATUS_CODES = {
    "bad_request": 400,
    "not_found": 404,
    "conflict": 409,
    "backend_failure": 502,
    "internal": 500,
}


class ApiError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass
class ServiceConfig:
    data_dir: Path = Path("maid-data")
    default_user: str = "anonymous"
    default_device: str = "api"
    backend_endpoints: dict[str, str] = field(default_factory=dict)
    ui_dir: Path | None = None  # static frontend bundle served at /ui when present


def record_to_obj(record: UriRecord) -> dict:
    return json.loads(record.to_line())


def _artifact_view(artifact: Artifact) -> dict:
    obj = encode_artifact(artifact)
    obj["artifact_id"] = artifact.id
    obj["parent_ids"] = list(artifact.parent_ids)
    obj["stage_kind"] = artifact.stage_kind
    return obj


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="modalflow", docs_url=None, redoc_url=None)
    state = app.state
    state.config = config
    state.engine = Engine(default_registry(endpoints=config.backend_endpoints))
    state.registry = Registry.open(config.data_dir)
    state.registry_lock = threading.Lock()
    state.flows = {}
    state.flow_counter = 0
    state.run_registrations = {}
    state.experiment_cache = {}

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=STATUS_CODES[exc.code],
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    def decode_artifact_obj(obj) -> Artifact:
        try:
            return Artifact.new(decode_payload(obj))
        except BadResponse as exc:
            raise ApiError("bad_request", f"bad artifact: {exc}") from exc

    def make_context(request: Request, user: str | None, run_id=None, stage_kind=None):
        client = request.client.host if request.client else "unknown"
        return RegistrationContext(
            device=config.default_device,
            ip=client,
            user_account=user or config.default_user,
            timestamp=int(time.time()),
            flow_run_id=run_id,
            stage_kind=stage_kind,
        )

    def register_outputs(run: RunState, request: Request, user: str | None) -> dict[str, str]:
        """Register every flow output once, parents resolved to URIs when known."""
        if run.run_id in state.run_registrations:
            return state.run_registrations[run.run_id]
        uri_by_artifact: dict[str, str] = {}
        registered: dict[str, str] = {}
        with state.registry_lock:
            for node_id in plan_order(run.flow):
                if node_id not in run.flow.outputs or node_id not in run.artifacts:
                    continue
                artifact = run.artifacts[node_id]
                parent_uris = tuple(
                    uri_by_artifact[p] for p in artifact.parent_ids if p in uri_by_artifact
                )
                record = state.registry.register(
                    artifact,
                    make_context(request, user, run_id=run.run_id, stage_kind=artifact.stage_kind),
                    flow_name=run.flow.name,
                    parent_uris=parent_uris,
                )
                uri_by_artifact[artifact.id] = record.uri
                registered[node_id] = record.uri
            state.registry.save()
        state.run_registrations[run.run_id] = registered
        return registered

    def run_view(run: RunState, request: Request, user: str | None = None) -> dict:
        registered: dict[str, str] = {}
        if run.status is RunStatus.COMPLETED:
            registered = register_outputs(run, request, user)
        return {
            "run_id": run.run_id,
            "flow": run.flow.name,
            "status": run.status.value,
            "awaiting_node": run.awaiting_node,
            "failure": run.failure,
            "artifacts": {n: _artifact_view(a) for n, a in run.artifacts.items()},
            "pending": {n: _artifact_view(a) for n, a in run.pending.items()},
            "outputs": sorted(run.flow.outputs),
            "registered": registered,
            "log": [
                {
                    "node_id": e.node_id,
                    "started_at": e.started_at,
                    "finished_at": e.finished_at,
                    "backend": e.backend,
                }
                for e in run.log
            ],
        }

    # -- health and metadata -------------------------------------------------

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.get("/stagekinds")
    async def stagekinds():
        return [
            {
                "kind": kind.value,
                "inputs": [[port, modality.value] for port, modality in sig.inputs],
                "output": sig.output.value,
                "checkpointable": sig.output in CHECKPOINT_MODALITIES,
            }
            for kind, sig in SIGNATURES.items()
        ]

    # -- flows ----------------------------------------------------------------

    @app.post("/flows")
    async def post_flow(request: Request):
        body = await request.body()
        try:
            spec = parse_flow_spec(body.decode("utf-8"))
        except FlowSyntaxError as exc:
            raise ApiError("bad_request", str(exc)) from exc
        report = validate_flow(spec)
        if report:
            return JSONResponse(
                status_code=422,
                content={"report": [{"kind": i.kind, "message": i.message} for i in report]},
            )
        state.flow_counter += 1
        flow_id = f"flow-{state.flow_counter}"
        state.flows[flow_id] = spec
        return {"flow_id": flow_id, "name": spec.name}

    @app.post("/flows/validate")
    async def post_flow_validate(request: Request):
        """Check a draft without storing it; the UI polls this for live feedback."""
        body = await request.body()
        try:
            spec = parse_flow_spec(body.decode("utf-8"))
        except FlowSyntaxError as exc:
            return {"report": [{"kind": "Syntax", "message": str(exc)}]}
        report = validate_flow(spec)
        return {"report": [{"kind": i.kind, "message": i.message} for i in report]}

    @app.get("/flows")
    async def list_flows():
        return {
            "flows": [
                {"flow_id": fid, "name": spec.name} for fid, spec in state.flows.items()
            ]
        }

    @app.get("/flows/{flow_id}")
    async def get_flow(flow_id: str):
        spec = state.flows.get(flow_id)
        if spec is None:
            raise ApiError("not_found", f"no flow {flow_id!r}")
        return flow_spec_to_doc(spec)

    # -- runs ------------------------------------------------------------------

    @app.post("/runs")
    async def post_run(request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError("bad_request", "body must be JSON") from exc
        flow_id = body.get("flow_id")
        spec = state.flows.get(flow_id)
        if spec is None:
            raise ApiError("not_found", f"no flow {flow_id!r}")
        raw_inputs = body.get("inputs", {})
        if not isinstance(raw_inputs, dict):
            raise ApiError("bad_request", "inputs must be an object keyed by node.port")
        inputs = {}
        for key, obj in raw_inputs.items():
            if "." not in key:
                raise ApiError("bad_request", f"input key {key!r} must be node.port")
            node, port = key.split(".", 1)
            inputs[(node, port)] = decode_artifact_obj(obj)
        user = body.get("user")
        run = state.engine.start_run(spec, inputs)
        return run_view(run, request, user)

    @app.get("/runs/{run_id}")
    async def get_run(run_id: str, request: Request):
        try:
            run = state.engine.get_run(run_id)
        except RunNotFound as exc:
            raise ApiError("not_found", f"no run {run_id!r}") from exc
        return run_view(run, request)

    @app.post("/runs/{run_id}/checkpoint")
    async def post_checkpoint(run_id: str, request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError("bad_request", "body must be JSON") from exc
        node_id = body.get("node_id")
        if not isinstance(node_id, str):
            raise ApiError("bad_request", "node_id required")
        artifact = decode_artifact_obj(body.get("artifact"))
        try:
            run = state.engine.submit_checkpoint_edit(run_id, node_id, artifact)
        except RunNotFound as exc:
            raise ApiError("not_found", f"no run {run_id!r}") from exc
        except WrongState as exc:
            raise ApiError("conflict", str(exc)) from exc
        except EditModalityMismatch as exc:
            raise ApiError("bad_request", str(exc)) from exc
        return run_view(run, request, body.get("user"))

    # -- registry ----------------------------------------------------------------

    @app.post("/registry/register")
    async def post_register(request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError("bad_request", "body must be JSON") from exc
        artifact = decode_artifact_obj(body.get("artifact"))
        ctx_obj = body.get("context") or {}
        context = RegistrationContext(
            device=ctx_obj.get("device", config.default_device),
            ip=ctx_obj.get("ip", request.client.host if request.client else "unknown"),
            user_account=ctx_obj.get("user_account", config.default_user),
            timestamp=int(ctx_obj.get("timestamp", time.time())),
            flow_run_id=ctx_obj.get("flow_run_id"),
            stage_kind=ctx_obj.get("stage_kind"),
        )
        with state.registry_lock:
            record = state.registry.register(
                artifact,
                context,
                flow_name=body.get("flow_name", ""),
                parent_uris=tuple(body.get("parent_uris", ())),
                note=body.get("note", ""),
            )
            state.registry.save()
        return record_to_obj(record)

    @app.get("/registry/record")
    async def get_record_by_query(uri: str):
        try:
            return record_to_obj(state.registry.lookup(uri))
        except NotFound as exc:
            raise ApiError("not_found", f"no record for {uri!r}") from exc

    @app.post("/registry/search")
    async def post_search(request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError("bad_request", "body must be JSON") from exc
        k = body.get("k", 5)
        if not isinstance(k, int) or k < 1:
            raise ApiError("bad_request", "k must be a positive integer")
        workers = body.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ApiError("bad_request", "workers must be a positive integer")
        if "artifact" in body:
            artifact = decode_artifact_obj(body["artifact"])
            embedding = embed_artifact(artifact)
        elif "embedding" in body:
            obj = body["embedding"]
            try:
                modality = Modality(obj.get("modality"))
                values = [float(v) for v in obj.get("values", [])]
                embedding = Embedding(modality, np.asarray(values, dtype=np.float32))
            except (ValueError, TypeError) as exc:
                raise ApiError("bad_request", f"bad embedding: {exc}") from exc
        else:
            raise ApiError("bad_request", "post an artifact or an embedding")
        try:
            result = state.registry.store.topk(embedding, k=k, workers=workers)
        except EmptySegment as exc:
            raise ApiError("not_found", str(exc)) from exc
        return {"results": [{"uri": uri, "score": score} for uri, score in result.hits]}

    @app.get("/registry/{uri:path}")
    async def get_record(uri: str):
        try:
            return record_to_obj(state.registry.lookup(uri))
        except NotFound as exc:
            raise ApiError("not_found", f"no record for {uri!r}") from exc

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    # -- experiments -----------------------------------------------------------

    @app.get("/experiments/{name}")
    async def get_experiment(name: str, n: int = 50, m: int = 50, seed: int = 0):
        if name not in ("fig5", "fig6", "image", "text"):
            raise ApiError("not_found", f"unknown experiment {name!r}")
        key = (name, n, m, seed)
        if key not in state.experiment_cache:
            if name in ("fig5", "image"):
                report = fig_image_experiment(n=n, m=m, seed=seed)
            else:
                report = fig_text_experiment(n=n, m=m, seed=seed)
            state.experiment_cache[key] = report
        report = state.experiment_cache[key]
        return PlainTextResponse(
            report.to_csv(),
            media_type="text/csv",
            headers={
                "X-Accuracy": f"{report.accuracy:.4f}",
                "X-Centroid-Check": str(report.noise_centroid_closer_to_positive()).lower(),
            },
        )

    return app
