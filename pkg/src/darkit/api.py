"""HTTP surface: every workbench capability behind a fixed route table.

The transport layer holds no business logic; each endpoint delegates to one
core operation and serializes its result with the shared canonical JSON
encoder so CLI --format json output stays byte-identical to API bodies.
Blocking core calls run in the threadpool, keeping the event loop free.
"""

from __future__ import annotations

import base64
import binascii
import json
import os

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response, StreamingResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import flow as flowmod
from . import graph
from .commands import CommandRequest, SearchSpace, expand_grid, render_command
from .errors import BadRequestError, DarkitError, NotFoundError, ValidationError
from .patch import CodePatch
from .util import dump_json
from .workbench import Workbench


def _json_response(doc, status_code: int = 200) -> Response:
    return Response(content=dump_json(doc), status_code=status_code,
                    media_type="application/json")


def _error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _module_id(name: str, raw: str) -> str:
    # "-" (and the model name itself) address the root module
    return "" if raw in ("-", name) else raw


def create_app(data_dir: str, seed: bool = True,
               heartbeat_seconds: float = 15.0,
               frontend_dir: str | None = None) -> FastAPI:
    bench = Workbench(data_dir, seed=seed, heartbeat_seconds=heartbeat_seconds)
    app = FastAPI(title="darkit", docs_url=None, redoc_url=None)
    app.state.workbench = bench

    @app.exception_handler(DarkitError)
    async def darkit_error(request: Request, exc: DarkitError):
        return _json_response(_error_body(exc.code, exc.message), exc.http_status)

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        return _json_response(_error_body("http-error", str(exc.detail)),
                              exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def req_error(request: Request, exc: RequestValidationError):
        return _json_response(_error_body("bad-request", "malformed request"), 400)

    async def _body_json(request: Request) -> dict:
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError:
            raise BadRequestError("bad-json", "request body is not valid JSON")
        if not isinstance(doc, dict):
            raise BadRequestError("bad-json", "request body must be a JSON object")
        return doc

    # ── health ───────────────────────────────────────────────────────

    @app.get("/api/health")
    def health():
        return _json_response({"status": "ok"})

    # ── registry ─────────────────────────────────────────────────────

    @app.get("/api/registry")
    def registry_list(kind: str | None = None):
        entries = bench.registry.list_entries(kind)
        return _json_response({"entries": [e.to_doc() for e in entries]})

    @app.post("/api/registry")
    async def registry_add(request: Request):
        doc = await _body_json(request)
        manifest = doc.get("manifest")
        if not isinstance(manifest, dict):
            raise BadRequestError("bad-request", "body needs a 'manifest' object")
        files: dict[str, bytes] = {}
        for path, b64 in (doc.get("files") or {}).items():
            try:
                files[path] = base64.b64decode(b64, validate=True)
            except (binascii.Error, TypeError):
                raise BadRequestError("bad-request", f"file {path!r} is not valid base64")
        entry = await run_in_threadpool(bench.registry.add_entry, manifest, files)
        return _json_response(entry.to_doc(), 201)

    @app.post("/api/registry/{kind}/{name}/{version}/verify")
    def registry_verify(kind: str, name: str, version: str):
        return _json_response(bench.registry.verify_entry(name, kind, version))

    @app.delete("/api/registry/{kind}/{name}/{version}")
    def registry_remove(kind: str, name: str, version: str):
        entry = bench.registry.remove_entry(name, kind, version)
        return _json_response(entry.to_doc())

    # ── models ───────────────────────────────────────────────────────

    @app.get("/api/models/{name}/tree")
    def model_tree(name: str):
        tree = bench.model_tree(name)
        doc = graph.to_display_tree(tree)
        return _json_response({"model": name, "version": tree.version, "tree": doc})

    @app.get("/api/models/{name}/modules/{module_id}/code")
    def module_code(name: str, module_id: str):
        tree = bench.model_tree(name)
        return _json_response(graph.get_code(tree, _module_id(name, module_id)))

    @app.post("/api/models/{name}/modules/{module_id}/validate")
    async def module_validate(name: str, module_id: str, request: Request):
        doc = await _body_json(request)
        patch = CodePatch(name, _module_id(name, module_id),
                          doc.get("new_text", ""), doc.get("author", ""),
                          doc.get("note", ""))
        bench.model_tree(name)
        report = await run_in_threadpool(bench.models.validate, name, patch)
        return _json_response(report.to_doc())

    @app.post("/api/models/{name}/modules/{module_id}/patch")
    async def module_patch(name: str, module_id: str, request: Request):
        doc = await _body_json(request)
        patch = CodePatch(name, _module_id(name, module_id),
                          doc.get("new_text", ""), doc.get("author", ""),
                          doc.get("note", ""))
        bench.model_tree(name)
        tree, record = await run_in_threadpool(
            bench.models.apply, name, patch, doc.get("base_version"))
        return _json_response({"version": tree.version, "record": record.to_doc()})

    @app.get("/api/models/{name}/patches")
    def model_patches(name: str):
        bench.model_tree(name)
        records = bench.models.history(name)
        return _json_response({"model": name,
                               "records": [r.to_doc() for r in records]})

    # ── flows ────────────────────────────────────────────────────────

    @app.post("/api/flows/validate")
    async def flow_validate(request: Request):
        g = flowmod.FlowGraph.from_doc(await _body_json(request))
        violations = flowmod.validate_graph(g)
        return _json_response({"valid": not violations,
                               "violations": [v.to_doc() for v in violations]})

    @app.post("/api/flows/shapes")
    async def flow_shapes(request: Request):
        g = flowmod.FlowGraph.from_doc(await _body_json(request))
        shapes = flowmod.infer_shapes(g)
        return _json_response({"shapes": shapes})

    @app.post("/api/flows/compile")
    async def flow_compile(request: Request):
        g = flowmod.FlowGraph.from_doc(await _body_json(request))
        source = flowmod.compile_to_source(g)
        return _json_response({"name": g.name, "source": source.text})

    # ── commands ─────────────────────────────────────────────────────

    def _schema_for(doc: dict):
        return bench.params_schema(doc.get("model", ""))

    def _check_names(doc: dict):
        bench.registry.get(doc.get("dataset", ""), "dataset")
        bench.registry.get(doc.get("tokenizer", ""), "tokenizer")

    @app.post("/api/commands/render")
    async def commands_render(request: Request):
        doc = await _body_json(request)
        schema = _schema_for(doc)
        _check_names(doc)
        req = CommandRequest(doc.get("model", ""), doc.get("dataset", ""), doc.get("tokenizer", ""),
                             doc.get("values") or {}, doc.get("mode", "train"))
        return _json_response({"command": render_command(req, schema)})

    @app.post("/api/commands/grid")
    async def commands_grid(request: Request):
        doc = await _body_json(request)
        base_doc = doc.get("base") or {}
        schema = _schema_for(base_doc)
        _check_names(base_doc)
        base = CommandRequest(base_doc.get("model", ""), base_doc.get("dataset", ""),
                              base_doc.get("tokenizer", ""), base_doc.get("values") or {},
                              base_doc.get("mode", "train"))
        axes = tuple((a["param"], tuple(a["values"]))
                     for a in doc.get("axes") or [])
        commands = expand_grid(SearchSpace(base, axes), schema)
        return _json_response({"count": len(commands), "commands": commands})

    # ── runs ─────────────────────────────────────────────────────────

    @app.post("/api/runs")
    async def runs_create(request: Request):
        doc = await _body_json(request)
        if doc.get("synthetic"):
            run_id = await run_in_threadpool(
                bench.runs.synth_run, doc.get("model", ""),
                int(doc.get("steps", 10)), int(doc.get("seed", 0)))
            return _json_response(bench.runs.run(run_id).to_doc(), 201)
        record = await run_in_threadpool(
            bench.runs.create_run, doc.get("model", ""), doc.get("config") or {})
        return _json_response(record.to_doc(), 201)

    @app.get("/api/runs")
    def runs_list(model: str | None = None, status: str | None = None):
        return _json_response({"runs": bench.runs.list_runs(model, status)})

    @app.get("/api/runs/compare")
    def runs_compare(ids: str, name: str, max_points: int = 200):
        run_ids = [i for i in ids.split(",") if i]
        return _json_response(bench.runs.compare_runs(run_ids, name, max_points))

    @app.post("/api/runs/{run_id}/events")
    async def runs_ingest(run_id: str, request: Request):
        payload = (await request.body()).decode("utf-8")
        result = await run_in_threadpool(bench.runs.ingest_events, run_id, payload)
        return _json_response(result)

    @app.get("/api/runs/{run_id}/metrics")
    def runs_metrics(run_id: str, name: str, max_points: int = 200):
        return _json_response(bench.runs.get_series(run_id, name, max_points))

    @app.get("/api/runs/{run_id}/stream")
    def runs_stream(run_id: str):
        feed = bench.runs.subscribe(run_id)

        def sse():
            for item in feed:
                if item is None:
                    yield ": heartbeat\n\n"
                else:
                    yield f"data: {dump_json(item)}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.get("/api/runs/{run_id}/export")
    def runs_export(run_id: str, format: str):
        text = bench.runs.export_run(run_id, format)
        media = "application/json" if format == "json" else "text/csv"
        return Response(content=text, media_type=media)

    @app.get("/api/runs/{run_id}")
    def runs_show(run_id: str):
        return _json_response(bench.runs.run(run_id).to_doc())

    # ── static frontend ──────────────────────────────────────────────

    static_dir = frontend_dir or os.environ.get("DARKIT_FRONTEND_DIR")
    if static_dir is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        if os.path.isdir(candidate):
            static_dir = candidate
    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
