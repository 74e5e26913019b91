"""Validated editing and re-injection of module code segments.

A patch targets exactly one module's segment (a class body or a single
assignment line). Validation re-parses the whole candidate file and runs
structural checks; apply splices the text, re-extracts the tree, bumps the
version, and appends a history record. Class renames are rejected.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from . import graph, spikedef
from .errors import ConflictError, NotFoundError, ValidationError
from .graph import ModuleTree, extract_static
from .spikedef import ParseError, SourceFile, Span, SpikeDefError, parse, splice
from .util import new_ulid


@dataclass(frozen=True)
class CodePatch:
    model_name: str
    module_id: str
    new_text: str
    author: str = ""
    note: str = ""


@dataclass
class ValidationReport:
    ok: bool
    errors: list[ParseError] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [e.to_doc() for e in self.errors],
            "checks": self.checks,
        }


@dataclass(frozen=True)
class PatchRecord:
    patch_id: str
    patch: CodePatch
    applied_at: int
    old_version: int
    new_version: int
    old_text: str
    start_line: int  # where the replaced segment began, in both old and new file

    def to_doc(self) -> dict:
        return {
            "patch_id": self.patch_id,
            "patch": {
                "model_name": self.patch.model_name,
                "module_id": self.patch.module_id,
                "new_text": self.patch.new_text,
                "author": self.patch.author,
                "note": self.patch.note,
            },
            "applied_at": self.applied_at,
            "old_version": self.old_version,
            "new_version": self.new_version,
            "old_text": self.old_text,
            "start_line": self.start_line,
        }

    @staticmethod
    def from_doc(doc: dict) -> "PatchRecord":
        p = doc["patch"]
        return PatchRecord(
            patch_id=doc["patch_id"],
            patch=CodePatch(p["model_name"], p["module_id"], p["new_text"],
                            p.get("author", ""), p.get("note", "")),
            applied_at=doc["applied_at"],
            old_version=doc["old_version"],
            new_version=doc["new_version"],
            old_text=doc["old_text"],
            start_line=doc["start_line"],
        )


def _signature(tree: ModuleTree) -> dict[str, tuple]:
    return {n.id: (n.kind, n.params) for n in tree.root.walk()}


def _skip_set(tree: ModuleTree, edited_class: str) -> set[str]:
    """Ids of subtrees defined by the edited class; every instance of a
    shared class (Stack members) changes together, so all are excluded
    from the siblings-unchanged comparison."""
    return {n.id for n in tree.root.walk() if n.kind == edited_class}


def _outside(sig: dict[str, tuple], skip: set[str]) -> dict[str, tuple]:
    def under(module_id: str) -> bool:
        for s in skip:
            if s == "" or module_id == s or module_id.startswith(s + "."):
                return True
        return False

    return {i: v for i, v in sig.items() if not under(i)}


def validate_patch(tree: ModuleTree, patch: CodePatch) -> ValidationReport:
    """Structural validation of a proposed edit; never raises for a merely
    invalid patch (only for an unresolvable module id or missing source)."""
    if tree.file is None:
        raise ValidationError("no-source", "tree has no source to patch")
    node = tree.node(patch.module_id)  # NotFoundError propagates
    if node.span is None:
        raise ValidationError("no-source", f"module {patch.module_id!r} has no span")

    check_names = ["file-parses", "name-preserved", "methods-present",
                   "siblings-unchanged"]
    checks = {name: False for name in check_names}
    errors: list[ParseError] = []

    def report() -> ValidationReport:
        ok = not errors and all(checks.values())
        return ValidationReport(
            ok=ok, errors=errors,
            checks=[{"name": n, "passed": checks[n]} for n in check_names])

    if not patch.new_text:
        errors.append(ParseError("E001", 1, 1, "replacement text is empty",
                                 "provide a non-empty code segment"))
        return report()

    candidate_text = splice(tree.file.text, node.span, patch.new_text)
    try:
        candidate_file = SourceFile.from_text(candidate_text, path=tree.file.path)
        candidate = parse(candidate_file)
    except SpikeDefError as exc:
        errors.append(exc.error)
        return report()
    except ValidationError as exc:
        errors.append(ParseError("E002", node.span.start_line, 1, exc.message,
                                 "use spaces and LF line endings"))
        return report()
    checks["file-parses"] = True

    is_class_target = len(node.children) > 0 or node.kind not in spikedef.BUILTINS
    edited_class = node.kind if is_class_target else (node.source_class or "")

    if is_class_target:
        checks["name-preserved"] = candidate.class_named(node.kind) is not None
    else:
        cls = candidate.class_named(edited_class)
        attr = patch.module_id.rsplit(".", 1)[-1]
        checks["name-preserved"] = cls is not None and any(
            a.attr == attr for a in cls.assigns)

    edited = candidate.class_named(edited_class)
    checks["methods-present"] = edited is not None  # parser enforces both methods

    try:
        new_tree = extract_static(candidate, tree.model_name)
    except (ValidationError, NotFoundError):
        return report()
    if is_class_target:
        skip = _skip_set(tree, edited_class)
    else:
        # only the patched attribute may change, in every instance of the
        # defining class (Stack members share one definition)
        attr = patch.module_id.rsplit(".", 1)[-1]
        skip = {f"{n.id}.{attr}" if n.id else attr
                for n in tree.root.walk() if n.kind == edited_class}
    checks["siblings-unchanged"] = (
        _outside(_signature(tree), skip) == _outside(_signature(new_tree), skip))
    return report()


def apply_patch_pure(tree: ModuleTree, patch: CodePatch) -> tuple[ModuleTree, PatchRecord]:
    """Splice, re-parse, re-extract, and bump the version. Pure value-level
    apply; persistence is the store's concern."""
    report = validate_patch(tree, patch)
    if not report.ok:
        raise ValidationError("rejected", "patch failed validation; call validate first")
    node = tree.node(patch.module_id)
    old_text = spikedef.slice_lines(tree.file, node.span)
    candidate_text = splice(tree.file.text, node.span, patch.new_text)
    new_file = SourceFile.from_text(candidate_text, path=tree.file.path)
    new_tree = extract_static(parse(new_file), tree.model_name)
    new_tree = ModuleTree(model_name=new_tree.model_name, root=new_tree.root,
                          file=new_file, version=tree.version + 1)
    record = PatchRecord(
        patch_id=new_ulid(),
        patch=patch,
        applied_at=int(time.time() * 1000),
        old_version=tree.version,
        new_version=new_tree.version,
        old_text=old_text,
        start_line=node.span.start_line,
    )
    return new_tree, record


def revert_record(text: str, record: PatchRecord) -> str:
    """Undo one record against the text that resulted from it."""
    n_new = record.patch.new_text.count("\n") + (
        0 if record.patch.new_text.endswith("\n") else 1)
    span = Span(record.start_line, record.start_line + n_new - 1)
    return splice(text, span, record.old_text)


class ModelStore:
    """Per-data-dir store of patchable models.

    Layout: ``<data-dir>/models/<name>/source.sd`` plus append-only
    ``patches.ndjson``. Applies are serialized per model with optimistic
    version checking; readers always see a complete tree value.
    """

    def __init__(self, data_dir):
        self.root = os.path.join(str(data_dir), "models")
        os.makedirs(self.root, exist_ok=True)
        self._trees: dict[str, ModuleTree] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock(self, name: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(name, threading.Lock())

    def _dir(self, name: str) -> str:
        return os.path.join(self.root, name)

    def _source_path(self, name: str) -> str:
        return os.path.join(self._dir(name), "source.sd")

    def _history_path(self, name: str) -> str:
        return os.path.join(self._dir(name), "patches.ndjson")

    def register(self, name: str, source: SourceFile, model_name: str | None = None):
        """Install (or overwrite) a model's source and reset its tree cache."""
        tree = extract_static(parse(source), model_name)
        os.makedirs(self._dir(name), exist_ok=True)
        with open(self._source_path(name), "w", encoding="utf-8") as fh:
            fh.write(source.text)
        with self._lock(name):
            version = len(self.history(name)) + 1
            self._trees[name] = ModuleTree(tree.model_name, tree.root, source, version)

    def has(self, name: str) -> bool:
        return name in self._trees or os.path.exists(self._source_path(name))

    def tree(self, name: str) -> ModuleTree:
        if name in self._trees:
            return self._trees[name]
        path = self._source_path(name)
        if not os.path.exists(path):
            raise NotFoundError(f"unknown model {name!r}")
        source = SourceFile.from_text(
            open(path, encoding="utf-8").read(), path=path)
        tree = extract_static(parse(source))
        version = len(self.history(name)) + 1
        tree = ModuleTree(tree.model_name, tree.root, source, version)
        self._trees[name] = tree
        return tree

    def list_models(self) -> list[str]:
        names = set(self._trees)
        if os.path.isdir(self.root):
            for entry in os.listdir(self.root):
                if os.path.exists(self._source_path(entry)):
                    names.add(entry)
        return sorted(names)

    def validate(self, name: str, patch: CodePatch) -> ValidationReport:
        return validate_patch(self.tree(name), patch)

    def apply(self, name: str, patch: CodePatch, base_version: int | None = None
              ) -> tuple[ModuleTree, PatchRecord]:
        with self._lock(name):
            tree = self.tree(name)
            if base_version is not None and base_version != tree.version:
                raise ConflictError(
                    f"version conflict: tree is at {tree.version}, "
                    f"patch based on {base_version}")
            new_tree, record = apply_patch_pure(tree, patch)
            tmp = self._source_path(name) + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(new_tree.file.text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._source_path(name))
            with open(self._history_path(name), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_doc()) + "\n")
            self._trees[name] = new_tree
            return new_tree, record

    def history(self, name: str) -> list[PatchRecord]:
        if not os.path.isdir(self._dir(name)):
            if name in self._trees:
                return []
            raise NotFoundError(f"unknown model {name!r}")
        path = self._history_path(name)
        if not os.path.exists(path):
            return []
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(PatchRecord.from_doc(json.loads(line)))
        return records
