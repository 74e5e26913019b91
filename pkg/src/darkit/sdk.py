"""Instrumentation client for host training code.

Two capabilities: exporting a live model's named-module hierarchy as a
module manifest (the same document the tree API accepts), and streaming
training events to the ingestion endpoint in the NDJSON wire format, with
client-side validation mirroring the server's rules so trainers fail fast.
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass, field

import httpx


class ExportError(Exception):
    """The host model cannot be exported as a module manifest."""


class TrackerError(Exception):
    """The tracking endpoint rejected events or became unreachable."""


# parameter extractors for well-known host module kinds; unknown kinds
# export with no params, which the manifest contract allows
_PARAM_ATTRS = {
    "Linear": ("in_features", "out_features"),
    "Embedding": ("num_embeddings", "embedding_dim"),
    "LayerNorm": None,  # handled specially: first normalized dim
    "Attention": ("dim", "heads"),
    "LIF": ("threshold", "beta"),
}


def _params_of(module) -> list:
    kind = type(module).__name__
    if kind == "LayerNorm":
        shape = getattr(module, "normalized_shape", None)
        if shape:
            return [int(shape[0])]
        return []
    attrs = _PARAM_ATTRS.get(kind)
    if not attrs:
        return []
    out = []
    for attr in attrs:
        value = getattr(module, attr, None)
        if value is None:
            return []
        out.append(value)
    return out


def export_manifest(model, model_name: str | None = None) -> dict:
    """Walk ``named_children()`` recursively and emit a manifest document
    with dotted module ids, suitable for the tree endpoint."""
    if not hasattr(model, "named_children"):
        raise ExportError(
            f"{type(model).__name__} has no named_children(); "
            "expected a named-module hierarchy")
    entries: list[dict] = []
    seen: set[str] = set()

    def visit(module, prefix: str):
        module_id = prefix
        if module_id in seen:
            raise ExportError(f"duplicate module id {module_id!r}")
        seen.add(module_id)
        entry = {"id": module_id, "kind": type(module).__name__}
        params = _params_of(module)
        if params:
            entry["params"] = params
        entries.append(entry)
        for name, child in module.named_children():
            if not name:
                raise ExportError("unnamed child module")
            visit(child, f"{prefix}.{name}" if prefix else name)

    visit(model, "")
    return {"model_name": model_name or type(model).__name__,
            "entries": entries}


@dataclass
class ClientConfig:
    server: str
    model: str
    config: dict = field(default_factory=dict)
    flush_interval_ms: int = 200
    max_batch: int = 100

    def __post_init__(self):
        if self.flush_interval_ms < 10:
            raise ValueError("flush_interval_ms must be >= 10")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


class RunHandle:
    """Buffered event emitter for one run; usable as a context manager
    that guarantees a run_end on exit."""

    def __init__(self, cfg: ClientConfig, client: httpx.Client | None = None):
        self._cfg = cfg
        self._client = client or httpx.Client(base_url=cfg.server, timeout=30)
        self._owns_client = client is None
        self._buffer: list[str] = []
        self._lock = threading.Lock()
        self._wake = threading.Event()
        self._closed = False
        self._error: Exception | None = None

        resp = self._client.post("/api/runs", json={
            "model": cfg.model, "config": cfg.config})
        if resp.status_code >= 400:
            raise TrackerError(f"could not create run: HTTP {resp.status_code}")
        self.run_id = resp.json()["run_id"]

        self._flusher = threading.Thread(target=self._flush_loop, daemon=True)
        self._flusher.start()

    # ── event emitters ───────────────────────────────────────────────

    def log_metric(self, step: int, name: str, value: float):
        if not isinstance(step, int) or isinstance(step, bool) or step < 0:
            raise ValueError("step must be a non-negative integer")
        if not isinstance(name, str) or not name:
            raise ValueError("metric name must be a non-empty string")
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("metric value must be finite")
        self._push({"type": "metric", "run": self.run_id,
                    "step": step, "name": name, "value": value})

    def log_line(self, level: str, text: str):
        if not isinstance(level, str) or not isinstance(text, str):
            raise ValueError("level and text must be strings")
        self._push({"type": "log_line", "run": self.run_id,
                    "level": level, "text": text})

    def checkpoint(self, label: str):
        if not isinstance(label, str):
            raise ValueError("label must be a string")
        self._push({"type": "checkpoint", "run": self.run_id, "label": label})

    def end(self, status: str = "completed"):
        """Flush everything and send run_end; safe to call twice."""
        with self._lock:
            if self._closed:
                return
            self._closed = True
            self._buffer.append(json.dumps({
                "type": "run_end", "run": self.run_id, "status": status}))
        self._wake.set()
        self._flusher.join(timeout=30)
        self._flush()
        if self._owns_client:
            self._client.close()
        if self._error is not None:
            raise TrackerError(str(self._error))

    # ── plumbing ─────────────────────────────────────────────────────

    def _push(self, event: dict):
        with self._lock:
            if self._closed:
                raise TrackerError("handle already ended")
            if self._error is not None:
                raise TrackerError(str(self._error))
            self._buffer.append(json.dumps(event))
            full = len(self._buffer) >= self._cfg.max_batch
        if full:
            self._wake.set()

    def _flush(self):
        with self._lock:
            batch = self._buffer
            self._buffer = []
        if not batch:
            return
        payload = "\n".join(batch) + "\n"
        last_exc: Exception | None = None
        for _ in range(3):  # bounded retry before surfacing
            try:
                resp = self._client.post(
                    f"/api/runs/{self.run_id}/events", content=payload)
                if resp.status_code < 400:
                    body = resp.json()
                    if body.get("rejected"):
                        self._error = TrackerError(
                            f"server rejected {len(body['rejected'])} events")
                    return
                last_exc = TrackerError(f"HTTP {resp.status_code}")
            except httpx.HTTPError as exc:
                last_exc = exc
            time.sleep(self._cfg.flush_interval_ms / 1000)
        self._error = last_exc

    def _flush_loop(self):
        while True:
            self._wake.wait(self._cfg.flush_interval_ms / 1000)
            self._wake.clear()
            self._flush()
            with self._lock:
                if self._closed and not self._buffer:
                    return

    # ── context manager ──────────────────────────────────────────────

    def __enter__(self) -> "RunHandle":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.end("failed" if exc_type is not None else "completed")
        return False


def track(server: str, model: str, config: dict | None = None,
          flush_interval_ms: int = 200, max_batch: int = 100,
          client: httpx.Client | None = None) -> RunHandle:
    """Open a tracked run against a workbench service."""
    cfg = ClientConfig(server, model, config or {},
                       flush_interval_ms, max_batch)
    return RunHandle(cfg, client=client)
