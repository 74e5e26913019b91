"""Real-time experiment run tracking.

Events arrive as NDJSON lines, are validated line-by-line, and are appended
to a per-run log before the ingest call returns (durability = replay the
logs on startup). Queries serve downsampled metric series and cross-run
comparisons; live subscribers get every event accepted after they joined,
in ingestion order.
"""

from __future__ import annotations

import json
import math
import os
import queue
import threading
import time
from dataclasses import dataclass, field

from .errors import BadRequestError, NotFoundError, ValidationError
from .util import new_ulid

EVENT_TYPES = ("run_start", "metric", "log_line", "checkpoint", "run_end")
TERMINAL_STATUSES = ("completed", "failed")

SYNTH_METRIC = "loss"


def synth_loss(step: int) -> float:
    """Deterministic synthetic training curve: 4.0 * 0.99^step + 0.5."""
    return 4.0 * 0.99 ** step + 0.5


@dataclass
class RunRecord:
    run_id: str
    model: str
    config: dict = field(default_factory=dict)
    status: str = "running"
    started_at: int = 0
    ended_at: int | None = None

    def to_doc(self) -> dict:
        return {
            "run_id": self.run_id,
            "model": self.model,
            "config": self.config,
            "status": self.status,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
        }


class _RunState:
    """In-memory view of one run: record, raw lines, per-metric points."""

    def __init__(self, record: RunRecord):
        self.record = record
        self.lines: list[str] = []
        self.metrics: dict[str, list[tuple[int, float]]] = {}
        self.lock = threading.Lock()
        self.subscribers: list[queue.Queue] = []


def _validate_event(obj, run_id: str, ended: bool) -> str | None:
    """Rejection code for one parsed NDJSON line, or None if acceptable."""
    if not isinstance(obj, dict) or obj.get("type") not in EVENT_TYPES:
        return "E101"
    if ended:
        return "E104"
    if "run" in obj and obj["run"] != run_id:
        return "E103"
    etype = obj["type"]
    if etype == "metric":
        step = obj.get("step")
        value = obj.get("value")
        if not isinstance(step, int) or isinstance(step, bool) or step < 0:
            return "E102"
        if "name" not in obj or not isinstance(obj["name"], str):
            return "E102"
        if not isinstance(value, (int, float)) or isinstance(value, bool) \
                or not math.isfinite(value):
            return "E102"
    elif etype == "log_line":
        if not isinstance(obj.get("level"), str) or not isinstance(obj.get("text"), str):
            return "E102"
    elif etype == "checkpoint":
        if not isinstance(obj.get("label"), str):
            return "E102"
    elif etype == "run_end":
        if obj.get("status") not in TERMINAL_STATUSES:
            return "E102"
    return None


def downsample(points: list[tuple[int, float]], max_points: int) -> list[dict]:
    """Contiguous bucketing: the first (L mod N) buckets are one larger;
    each bucket reports its last step and the mean of its values."""
    if max_points < 1:
        raise ValidationError("max-points", "max_points must be >= 1")
    n = len(points)
    if n <= max_points:
        return [{"step": s, "value": v} for s, v in points]
    base, extra = divmod(n, max_points)
    out = []
    idx = 0
    for b in range(max_points):
        size = base + (1 if b < extra else 0)
        bucket = points[idx:idx + size]
        idx += size
        out.append({
            "step": bucket[-1][0],
            "value": sum(v for _, v in bucket) / size,
        })
    return out


class RunStore:
    """Durable per-run event logs under ``<data-dir>/runs``.

    Appends are serialized per run and fsynced before acknowledgment;
    startup replays every log to rebuild state, so the index file is only
    a cache of run records.
    """

    def __init__(self, data_dir, heartbeat_seconds: float = 15.0):
        self.root = os.path.join(str(data_dir), "runs")
        os.makedirs(self.root, exist_ok=True)
        self.heartbeat_seconds = heartbeat_seconds
        self._runs: dict[str, _RunState] = {}
        self._registry_lock = threading.Lock()
        self._index_lock = threading.Lock()
        self._replay()

    # ── persistence ──────────────────────────────────────────────────

    def _run_dir(self, run_id: str) -> str:
        return os.path.join(self.root, run_id)

    def _log_path(self, run_id: str) -> str:
        return os.path.join(self._run_dir(run_id), "events.ndjson")

    def _index_path(self) -> str:
        return os.path.join(self.root, "index.json")

    def _write_index(self):
        with self._index_lock:
            docs = [s.record.to_doc() for s in self._runs.values()]
            docs.sort(key=lambda d: d["run_id"])
            tmp = self._index_path() + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(docs, fh)
            os.replace(tmp, self._index_path())

    def _replay(self):
        if not os.path.isdir(self.root):
            return
        for run_id in os.listdir(self.root):
            log = self._log_path(run_id)
            if not os.path.exists(log):
                continue
            state = None
            with open(log, encoding="utf-8") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    obj = json.loads(line)
                    if state is None:
                        record = RunRecord(
                            run_id=run_id,
                            model=obj.get("model", ""),
                            config=obj.get("config", {}),
                            started_at=obj.get("ts", 0),
                        )
                        state = _RunState(record)
                    self._absorb(state, obj, line)
            if state is not None:
                self._runs[run_id] = state

    def _absorb(self, state: _RunState, obj: dict, line: str):
        """Apply one accepted event to in-memory state (no persistence)."""
        state.lines.append(line)
        etype = obj["type"]
        if etype == "metric":
            state.metrics.setdefault(obj["name"], []).append(
                (obj["step"], float(obj["value"])))
        elif etype == "run_end":
            state.record.status = obj["status"]
            state.record.ended_at = obj.get("ts", int(time.time() * 1000))

    # ── run lifecycle ────────────────────────────────────────────────

    def create_run(self, model: str, config: dict | None = None,
                   run_id: str | None = None) -> RunRecord:
        run_id = run_id or new_ulid()
        ts = int(time.time() * 1000)
        start = {"type": "run_start", "run": run_id, "ts": ts,
                 "model": model, "config": config or {}}
        with self._registry_lock:
            if run_id in self._runs:
                raise BadRequestError("duplicate-run", f"run {run_id} already exists")
            record = RunRecord(run_id=run_id, model=model, config=config or {},
                               started_at=ts)
            state = _RunState(record)
            self._runs[run_id] = state
        with state.lock:
            self._append_lines(run_id, [json.dumps(start)])
            self._absorb(state, start, json.dumps(start))
        self._write_index()
        return record

    def _state(self, run_id: str) -> _RunState:
        state = self._runs.get(run_id)
        if state is None:
            raise NotFoundError(f"unknown run {run_id!r}")
        return state

    def run(self, run_id: str) -> RunRecord:
        return self._state(run_id).record

    def _append_lines(self, run_id: str, lines: list[str]):
        os.makedirs(self._run_dir(run_id), exist_ok=True)
        with open(self._log_path(run_id), "a", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def ingest_events(self, run_id: str, payload: str) -> dict:
        """Line-by-line NDJSON ingestion with partial acceptance.

        An unknown run id is acceptable only when the first line is a
        run_start, which then creates the run.
        """
        raw_lines = [ln for ln in payload.split("\n")]
        if raw_lines and raw_lines[-1] == "":
            raw_lines.pop()

        state = self._runs.get(run_id)
        first_obj = None
        if raw_lines:
            try:
                first_obj = json.loads(raw_lines[0])
            except json.JSONDecodeError:
                first_obj = None
        if state is None:
            if isinstance(first_obj, dict) and first_obj.get("type") == "run_start":
                self.create_run(first_obj.get("model", ""),
                                first_obj.get("config") or {}, run_id=run_id)
                state = self._state(run_id)
                raw_lines = raw_lines[1:]
                accepted_offset = 1
            else:
                raise NotFoundError(f"unknown run {run_id!r}")
        else:
            accepted_offset = 0

        accepted: list[tuple[dict, str]] = []
        rejected: list[dict] = []
        with state.lock:
            ended = state.record.status != "running"
            for i, raw in enumerate(raw_lines, start=1 + accepted_offset):
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError:
                    rejected.append({"line": i, "code": "E101"})
                    continue
                if isinstance(obj, dict) and obj.get("type") == "run_start" \
                        and not ended:
                    # duplicate lifecycle start for an existing run
                    rejected.append({"line": i, "code": "E103"})
                    continue
                code = _validate_event(obj, state.record.run_id, ended)
                if code is not None:
                    rejected.append({"line": i, "code": code})
                    continue
                obj.setdefault("run", state.record.run_id)
                obj.setdefault("ts", int(time.time() * 1000))
                line = json.dumps(obj)
                accepted.append((obj, line))
                if obj["type"] == "run_end":
                    ended = True
            if accepted:
                self._append_lines(run_id, [line for _, line in accepted])
                for obj, line in accepted:
                    self._absorb(state, obj, line)
                for sub in list(state.subscribers):
                    for obj, _ in accepted:
                        sub.put(obj)
        if any(obj["type"] == "run_end" for obj, _ in accepted):
            self._write_index()
        return {"accepted": len(accepted) + accepted_offset, "rejected": rejected}

    # ── queries ──────────────────────────────────────────────────────

    def _sorted_points(self, state: _RunState, name: str) -> list[tuple[int, float]]:
        points = state.metrics.get(name)
        if points is None:
            raise NotFoundError(f"run {state.record.run_id} has no metric {name!r}")
        # stable sort keeps arrival order within equal steps
        return sorted(points, key=lambda p: p[0])

    def get_series(self, run_id: str, name: str, max_points: int) -> dict:
        state = self._state(run_id)
        with state.lock:
            points = self._sorted_points(state, name)
        return {"run": run_id, "name": name,
                "points": downsample(points, max_points)}

    def compare_runs(self, run_ids: list[str], name: str, max_points: int) -> dict:
        if not run_ids:
            raise ValidationError("runs", "at least one run id is required")
        known = [rid for rid in run_ids if rid in self._runs]
        if not known:
            raise NotFoundError("none of the requested runs exist")
        runs = []
        for rid in run_ids:
            state = self._runs.get(rid)
            if state is None:
                runs.append({"id": rid, "points": [], "missing": True})
                continue
            with state.lock:
                points = state.metrics.get(name)
                if points is None:
                    runs.append({"id": rid, "points": [], "missing": True})
                else:
                    points = self._sorted_points(state, name)
                    runs.append({"id": rid,
                                 "points": downsample(points, max_points)})
        return {"metric": name, "runs": runs}

    def list_runs(self, model: str | None = None, status: str | None = None) -> list[dict]:
        records = [s.record.to_doc() for s in self._runs.values()]
        if model is not None:
            records = [r for r in records if r["model"] == model]
        if status is not None:
            records = [r for r in records if r["status"] == status]
        records.sort(key=lambda r: r["run_id"], reverse=True)
        return records

    def export_run(self, run_id: str, format: str) -> str:
        state = self._state(run_id)
        with state.lock:
            lines = list(state.lines)
        if format == "json":
            return "[" + ",".join(lines) + "]"
        if format == "csv":
            rows = ["step,name,value,ts"]
            for line in lines:
                obj = json.loads(line)
                if obj["type"] == "metric":
                    rows.append(f"{obj['step']},{obj['name']},{obj['value']},{obj['ts']}")
            return "\n".join(rows) + "\n"
        raise ValidationError("format", f"unknown export format {format!r}")

    # ── synthetic runs ───────────────────────────────────────────────

    def synth_run(self, model: str, steps: int, seed: int = 0) -> str:
        """Deterministic stand-in for real training: one loss point per step."""
        if steps < 1:
            raise ValidationError("steps", "steps must be >= 1")
        record = self.create_run(model, {"steps": steps, "seed": seed, "synthetic": True})
        ts = int(time.time() * 1000)
        lines = []
        for step in range(steps):
            lines.append(json.dumps({
                "type": "metric", "run": record.run_id, "ts": ts,
                "step": step, "name": SYNTH_METRIC, "value": synth_loss(step)}))
        lines.append(json.dumps({
            "type": "run_end", "run": record.run_id, "ts": ts, "status": "completed"}))
        self.ingest_events(record.run_id, "\n".join(lines) + "\n")
        return record.run_id

    # ── streaming ────────────────────────────────────────────────────

    def subscribe(self, run_id: str):
        """Iterator over events accepted after subscription; ends after
        run_end. Yields None on heartbeat intervals of silence."""
        state = self._state(run_id)
        q: queue.Queue = queue.Queue()
        with state.lock:
            if state.record.status != "running":
                return iter(())  # live-only: completed runs end immediately
            state.subscribers.append(q)

        def gen():
            try:
                while True:
                    try:
                        obj = q.get(timeout=self.heartbeat_seconds)
                    except queue.Empty:
                        yield None  # heartbeat marker
                        continue
                    yield obj
                    if obj.get("type") == "run_end":
                        return
            finally:
                with state.lock:
                    if q in state.subscribers:
                        state.subscribers.remove(q)

        return gen()
