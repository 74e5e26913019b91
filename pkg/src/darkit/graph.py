"""Hierarchical module tree extraction.

Turns a parsed SpikeDef index (static path) or a runtime-exported module
manifest into a tree of modules keyed by dotted identifiers. The root id is
the empty string; display layers render it as the model class name.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import NotFoundError, ValidationError
from .spikedef import BUILTINS, ClassDef, SourceFile, SourceIndex, Span, slice_lines


@dataclass(frozen=True)
class ModuleNode:
    id: str
    kind: str
    params: tuple = ()
    span: Span | None = None
    source_class: str | None = None
    children: tuple["ModuleNode", ...] = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class ModuleTree:
    model_name: str
    root: ModuleNode
    file: SourceFile | None
    version: int = 1

    def node(self, module_id: str) -> ModuleNode:
        for n in self.root.walk():
            if n.id == module_id:
                return n
        raise NotFoundError(f"unknown module id {module_id!r}")

    def size(self) -> int:
        return sum(1 for _ in self.root.walk())


def _child_id(parent_id: str, segment: str) -> str:
    return segment if parent_id == "" else f"{parent_id}.{segment}"


def extract_static(index: SourceIndex, model_name: str | None = None) -> ModuleTree:
    """Expand a class recursively into its module tree.

    Stack(n, C) assigns expand into n children with numeric id segments;
    builtin assigns become leaves; class assigns become subtrees. Default
    root is the last class in the file.
    """
    if not index.classes:
        raise ValidationError("empty-file", "no class definitions to extract")
    if model_name is None:
        root_class = index.classes[-1]
    else:
        root_class = index.class_named(model_name)
        if root_class is None:
            raise NotFoundError(f"no class named {model_name!r} in {index.file.path}")

    by_name = {c.name: c for c in index.classes}

    def expand_class(cls: ClassDef, node_id: str, active: tuple[str, ...]) -> ModuleNode:
        if cls.name in active:
            raise ValidationError(
                "cycle", "class reachability is cyclic: " + " -> ".join(active + (cls.name,)))
        children = []
        for a in cls.assigns:
            if a.stack_count is not None:
                inner = by_name.get(a.ctor_name)
                if inner is None:
                    raise ValidationError(
                        "unknown-constructor", f"Stack of unknown class {a.ctor_name!r}")
                for i in range(a.stack_count):
                    cid = _child_id(node_id, f"{a.attr}.{i}")
                    children.append(expand_class(inner, cid, active + (cls.name,)))
            elif a.ctor_name in BUILTINS:
                children.append(ModuleNode(
                    id=_child_id(node_id, a.attr), kind=a.ctor_name,
                    params=tuple(a.args), span=a.span, source_class=cls.name))
            elif a.ctor_name in by_name:
                children.append(expand_class(
                    by_name[a.ctor_name], _child_id(node_id, a.attr),
                    active + (cls.name,)))
            else:
                raise ValidationError(
                    "unknown-constructor",
                    f"{a.ctor_name!r} is neither a builtin nor a class in this file")
        return ModuleNode(id=node_id, kind=cls.name, span=cls.span,
                          source_class=cls.name, children=tuple(children))

    root = expand_class(root_class, "", ())
    return ModuleTree(model_name=root_class.name, root=root, file=index.file, version=1)


# ── Manifest path ────────────────────────────────────────────────────────


def manifest_of(tree: ModuleTree) -> dict:
    """ModuleManifest wire document for a tree (depth-first entry order)."""
    entries = [{"id": n.id, "kind": n.kind, "params": list(n.params)}
               for n in tree.root.walk()]
    return {"model_name": tree.model_name, "entries": entries}


def extract_from_manifest(manifest: dict, index: SourceIndex | None = None) -> ModuleTree:
    """Build a tree isomorphic to the manifest id hierarchy.

    When a source index is given, class-kind nodes pick up the span of the
    same-named class; without one the tree carries no spans.
    """
    if not isinstance(manifest, dict) or "entries" not in manifest:
        raise ValidationError("manifest", "manifest must be an object with 'entries'")
    entries = manifest["entries"]
    if not entries:
        raise ValidationError("manifest", "manifest needs at least a root entry (id '')")
    ids = [e.get("id") for e in entries]
    if len(set(ids)) != len(ids):
        raise ValidationError("manifest", "duplicate ids in manifest")
    by_id = {e["id"]: e for e in entries}
    if "" not in by_id:
        raise ValidationError("manifest", "manifest needs a root entry with id ''")

    def parent_of(module_id: str) -> str:
        head, _, _ = module_id.rpartition(".")
        return head

    children: dict[str, list[str]] = {i: [] for i in ids}
    for module_id in ids:
        if module_id == "":
            continue
        parent = parent_of(module_id)
        if parent not in by_id:
            # Stack children ("attr.i") hang directly under the class node,
            # so a numeric last segment may skip one missing "attr" level.
            last = module_id.rsplit(".", 1)[-1]
            if last.isdigit():
                parent = parent_of(parent)
            if parent not in by_id:
                raise ValidationError(
                    "manifest", f"orphan id {module_id!r}: parent missing")
        children[parent].append(module_id)

    model_name = manifest.get("model_name") or by_id[""].get("kind", "")

    def build(module_id: str) -> ModuleNode:
        entry = by_id[module_id]
        kind = entry.get("kind", "")
        span = None
        source_class = None
        if index is not None:
            cls = index.class_named(kind)
            if cls is not None:
                span = cls.span
                source_class = cls.name
        return ModuleNode(
            id=module_id, kind=kind, params=tuple(entry.get("params") or ()),
            span=span, source_class=source_class,
            children=tuple(build(c) for c in children[module_id]))

    file = index.file if index is not None else None
    return ModuleTree(model_name=model_name, root=build(""), file=file, version=1)


# ── Lookup and display ───────────────────────────────────────────────────


def get_code(tree: ModuleTree, module_id: str) -> dict:
    """Code segment for one module: class body for class nodes, the
    assignment line for builtin leaves."""
    node = tree.node(module_id)
    if node.span is None or tree.file is None:
        raise ValidationError("no-source", f"module {module_id!r} has no source span")
    return {
        "id": module_id,
        "kind": node.kind,
        "span": {"start_line": node.span.start_line, "end_line": node.span.end_line},
        "text": slice_lines(tree.file, node.span),
    }


def to_display_tree(tree: ModuleTree) -> dict:
    """Depth-first, declaration-order nesting for UI consumption."""

    def render(node: ModuleNode) -> dict:
        label = tree.model_name if node.id == "" else node.id.rsplit(".", 1)[-1]
        return {
            "id": node.id,
            "kind": node.kind,
            "label": label,
            "child_count": len(node.children),
            "children": [render(c) for c in node.children],
        }

    return render(tree.root)


def flatten_display(display: dict) -> list[dict]:
    out = [{k: display[k] for k in ("id", "kind", "label", "child_count")}]
    for child in display["children"]:
        out.extend(flatten_display(child))
    return out
