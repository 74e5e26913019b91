"""Plugin registry for datasets, tokenizers, and models.

Entries are manifest-described directories with SHA-256 checksummed files,
laid out as ``<root>/registry/<kind>/<name>/<version>/`` with a single
``index.json``. Built-in datasets and tokenizers are metadata-only stubs;
the bundled model entry ships the two-class SpikeDef fixture plus a
parameter schema for the command generator.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import threading
from dataclasses import dataclass, field
from importlib import resources

from .commands import ParamSpec
from .errors import ConflictError, NotFoundError, ValidationError

KINDS = ("dataset", "tokenizer", "model")

BUILTIN_DATASETS = ("wikitext", "wikipedia", "ultrachat", "fineweb")
BUILTIN_TOKENIZERS = ("gpt2-small", "gpt2-medium", "gpt2-large",
                      "bert-base-cased", "bert-base-chinese")

TINY_SPIKE_GPT_SCHEMA = [
    ParamSpec("lr", "float", default=0.001, min=1e-6, max=1.0),
    ParamSpec("batch_size", "int", default=8, min=1, max=1024),
    ParamSpec("epochs", "int", default=1, min=1, max=100),
    ParamSpec("steps", "int", default=10, min=1, max=100000),
    ParamSpec("optimizer", "choice", default="adam", choices=("adam", "sgd")),
    ParamSpec("verbose", "flag", default=False),
]


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    kind: str
    version: str
    description: str = ""
    files: tuple[dict, ...] = ()  # {"path", "sha256", "bytes"}
    params_schema: tuple[ParamSpec, ...] | None = None

    def key(self) -> tuple[str, str, str]:
        return (self.kind, self.name, self.version)

    def to_doc(self) -> dict:
        doc = {
            "name": self.name,
            "kind": self.kind,
            "version": self.version,
            "description": self.description,
            "files": [dict(f) for f in self.files],
        }
        if self.params_schema is not None:
            doc["params_schema"] = [s.to_doc() for s in self.params_schema]
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "RegistryEntry":
        name = doc.get("name", "")
        kind = doc.get("kind", "")
        version = doc.get("version", "")
        if not name or name != name.lower():
            raise ValidationError("manifest", "entry name must be a lowercase identifier")
        if kind not in KINDS:
            raise ValidationError("manifest", f"kind must be one of {', '.join(KINDS)}")
        if not version:
            raise ValidationError("manifest", "version is required")
        files = []
        for f in doc.get("files") or []:
            path = f.get("path", "")
            sha = f.get("sha256", "")
            if not path or os.path.isabs(path) or ".." in path.split("/"):
                raise ValidationError("manifest", f"bad file path {path!r}")
            if len(sha) != 64 or any(c not in "0123456789abcdef" for c in sha):
                raise ValidationError("manifest", f"bad sha256 for {path!r}")
            files.append({"path": path, "sha256": sha, "bytes": int(f.get("bytes", 0))})
        schema = None
        if "params_schema" in doc and doc["params_schema"] is not None:
            schema = tuple(ParamSpec.from_doc(s) for s in doc["params_schema"])
        if kind == "model" and schema is None:
            schema = ()
        if kind != "model" and schema is not None:
            raise ValidationError("manifest", "params_schema is only valid for models")
        return RegistryEntry(name, kind, version, doc.get("description", ""),
                             tuple(files), schema)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Registry:
    """Single-writer registry with an atomically replaced index file."""

    def __init__(self, data_dir):
        self.root = os.path.join(str(data_dir), "registry")
        os.makedirs(self.root, exist_ok=True)
        self._lock = threading.Lock()
        self._entries: dict[tuple, RegistryEntry] = {}
        self._load_index()
        self.repair_scan()

    # ── index persistence ────────────────────────────────────────────

    def _index_path(self) -> str:
        return os.path.join(self.root, "index.json")

    def _load_index(self):
        path = self._index_path()
        if not os.path.exists(path):
            return
        with open(path, encoding="utf-8") as fh:
            docs = json.load(fh)
        for doc in docs:
            entry = RegistryEntry.from_doc(doc)
            self._entries[entry.key()] = entry

    def _write_index(self):
        docs = [e.to_doc() for e in self._sorted_entries()]
        tmp = self._index_path() + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(docs, fh, indent=1)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self._index_path())

    def _sorted_entries(self) -> list[RegistryEntry]:
        return sorted(self._entries.values(), key=lambda e: e.key())

    def _entry_dir(self, entry: RegistryEntry) -> str:
        return os.path.join(self.root, entry.kind, entry.name, entry.version)

    def repair_scan(self):
        """Reconcile index and disk: drop index rows without a manifest on
        disk, adopt on-disk manifests missing from the index."""
        with self._lock:
            changed = False
            for key in list(self._entries):
                entry = self._entries[key]
                if not os.path.exists(os.path.join(self._entry_dir(entry), "manifest.json")):
                    del self._entries[key]
                    changed = True
            for kind in KINDS:
                kind_dir = os.path.join(self.root, kind)
                if not os.path.isdir(kind_dir):
                    continue
                for name in os.listdir(kind_dir):
                    for version in os.listdir(os.path.join(kind_dir, name)):
                        manifest = os.path.join(kind_dir, name, version, "manifest.json")
                        if not os.path.exists(manifest):
                            continue
                        with open(manifest, encoding="utf-8") as fh:
                            entry = RegistryEntry.from_doc(json.load(fh))
                        if entry.key() not in self._entries:
                            self._entries[entry.key()] = entry
                            changed = True
            if changed:
                self._write_index()

    # ── operations ───────────────────────────────────────────────────

    def seed_builtin(self) -> int:
        """Idempotently install the built-in metadata entries plus the
        bundled tiny-spike-gpt model."""
        fixture = resources.files("darkit.fixtures").joinpath("tiny_spike_gpt.sd")
        source_bytes = fixture.read_bytes()
        seeds: list[tuple[RegistryEntry, dict[str, bytes]]] = []
        for name in BUILTIN_DATASETS:
            seeds.append((RegistryEntry(
                name, "dataset", "1.0.0",
                f"preprocessed {name} corpus (metadata stub)"), {}))
        for name in BUILTIN_TOKENIZERS:
            seeds.append((RegistryEntry(
                name, "tokenizer", "1.0.0",
                f"pretrained {name} tokenizer (metadata stub)"), {}))
        seeds.append((RegistryEntry(
            "tiny-spike-gpt", "model", "1.0.0",
            "bundled two-class spiking toy model",
            files=({"path": "tiny_spike_gpt.sd",
                    "sha256": sha256_hex(source_bytes),
                    "bytes": len(source_bytes)},),
            params_schema=tuple(TINY_SPIKE_GPT_SCHEMA)),
            {"tiny_spike_gpt.sd": source_bytes}))
        for entry, files in seeds:
            if entry.key() in self._entries:
                continue
            self.add_entry(entry.to_doc(), files)
        return len(seeds)

    def add_entry(self, manifest: dict, files: dict[str, bytes]) -> RegistryEntry:
        """Materialize a checksum-verified entry on disk and index it."""
        entry = RegistryEntry.from_doc(manifest)
        mismatches = []
        for f in entry.files:
            data = files.get(f["path"])
            if data is None:
                mismatches.append({"path": f["path"], "reason": "missing upload"})
            elif sha256_hex(data) != f["sha256"]:
                mismatches.append({"path": f["path"], "reason": "checksum mismatch"})
        extra = set(files) - {f["path"] for f in entry.files}
        for path in sorted(extra):
            mismatches.append({"path": path, "reason": "not declared in manifest"})
        if mismatches:
            raise ValidationError(
                "checksum", "; ".join(f"{m['path']}: {m['reason']}" for m in mismatches))
        with self._lock:
            if entry.key() in self._entries:
                raise ConflictError(
                    f"entry {entry.kind}/{entry.name}/{entry.version} already exists")
            entry_dir = self._entry_dir(entry)
            os.makedirs(entry_dir, exist_ok=True)
            for f in entry.files:
                dest = os.path.join(entry_dir, f["path"])
                os.makedirs(os.path.dirname(dest) or entry_dir, exist_ok=True)
                with open(dest, "wb") as fh:
                    fh.write(files[f["path"]])
            with open(os.path.join(entry_dir, "manifest.json"), "w",
                      encoding="utf-8") as fh:
                json.dump(entry.to_doc(), fh, indent=1)
            self._entries[entry.key()] = entry
            self._write_index()
        return entry

    def get(self, name: str, kind: str, version: str | None = None) -> RegistryEntry:
        if version is not None:
            entry = self._entries.get((kind, name, version))
            if entry is None:
                raise NotFoundError(f"no entry {kind}/{name}/{version}")
            return entry
        candidates = [e for e in self._sorted_entries()
                      if e.kind == kind and e.name == name]
        if not candidates:
            raise NotFoundError(f"no entry {kind}/{name}")
        return candidates[-1]

    def verify_entry(self, name: str, kind: str, version: str) -> dict:
        """Recompute every file hash; per-file pass/fail plus overall verdict."""
        entry = self.get(name, kind, version)
        entry_dir = self._entry_dir(entry)
        files = []
        for f in entry.files:
            path = os.path.join(entry_dir, f["path"])
            if not os.path.exists(path):
                files.append({"path": f["path"], "passed": False, "reason": "missing"})
                continue
            with open(path, "rb") as fh:
                digest = sha256_hex(fh.read())
            files.append({"path": f["path"], "passed": digest == f["sha256"],
                          "reason": "" if digest == f["sha256"] else "checksum mismatch"})
        return {"name": name, "kind": kind, "version": version,
                "passed": all(f["passed"] for f in files), "files": files}

    def list_entries(self, kind: str | None = None) -> list[RegistryEntry]:
        entries = self._sorted_entries()
        if kind is not None:
            if kind not in KINDS:
                raise ValidationError("kind", f"unknown kind {kind!r}")
            entries = [e for e in entries if e.kind == kind]
        return entries

    def remove_entry(self, name: str, kind: str, version: str) -> RegistryEntry:
        with self._lock:
            entry = self._entries.get((kind, name, version))
            if entry is None:
                raise NotFoundError(f"no entry {kind}/{name}/{version}")
            shutil.rmtree(self._entry_dir(entry), ignore_errors=True)
            del self._entries[entry.key()]
            self._write_index()
        return entry

    def entry_file_path(self, entry: RegistryEntry, rel_path: str) -> str:
        return os.path.join(self._entry_dir(entry), rel_path)
