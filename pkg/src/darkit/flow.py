"""Flowchart model graphs: DAG validation, shape inference, and compilation
to SpikeDef source.

A flow graph is a typed DAG with exactly one Input and one Output. The
block vocabulary mirrors the SpikeDef builtin table plus the structural
kinds Input, Output, and Add (residual). Compilation is byte-deterministic:
topological order with lexicographic node-id tie-breaking, independent of
how the node and edge lists are ordered.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import ValidationError
from .spikedef import SourceFile

# kind -> ordered param names (None entries are structural kinds)
PARAM_SCHEMA: dict[str, tuple[str, ...]] = {
    "Input": (),
    "Output": (),
    "Add": (),
    "Embedding": ("vocab", "dim"),
    "Linear": ("in", "out"),
    "LIF": ("threshold", "beta"),
    "Attention": ("dim", "heads"),
    "LayerNorm": ("dim",),
}

_INT_PARAMS = {"vocab", "dim", "in", "out", "heads"}
STRUCTURAL = {"Input", "Output", "Add"}

T = "T"  # symbolic sequence-length dimension


@dataclass(frozen=True)
class FlowNode:
    id: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FlowEdge:
    src: str
    dst: str


@dataclass(frozen=True)
class FlowGraph:
    name: str
    nodes: tuple[FlowNode, ...]
    edges: tuple[FlowEdge, ...]

    @staticmethod
    def from_doc(doc: dict) -> "FlowGraph":
        try:
            nodes = tuple(FlowNode(n["id"], n["kind"], dict(n.get("params") or {}))
                          for n in doc["nodes"])
            edges = tuple(FlowEdge(e["from"], e["to"]) for e in doc["edges"])
            return FlowGraph(doc["name"], nodes, edges)
        except (KeyError, TypeError) as exc:
            raise ValidationError("flow-doc", f"malformed flow document: {exc}")

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "nodes": [{"id": n.id, "kind": n.kind, "params": dict(n.params)}
                      for n in self.nodes],
            "edges": [{"from": e.src, "to": e.dst} for e in self.edges],
        }


@dataclass(frozen=True)
class Violation:
    code: str  # F001..F005
    locus: str  # node id or "src->dst"
    message: str

    def to_doc(self) -> dict:
        return {"code": self.code, "locus": self.locus, "message": self.message}


def _in_edges(g: FlowGraph, node_id: str) -> list[FlowEdge]:
    return [e for e in g.edges if e.dst == node_id]


def _out_edges(g: FlowGraph, node_id: str) -> list[FlowEdge]:
    return [e for e in g.edges if e.src == node_id]


def validate_graph(g: FlowGraph) -> list[Violation]:
    """All invariant violations, as data; an empty list means valid."""
    out: list[Violation] = []
    ids = [n.id for n in g.nodes]
    by_id = {n.id: n for n in g.nodes}
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        for d in dupes:
            out.append(Violation("F001", d, f"duplicate node id {d!r}"))
        return out

    # params schema per kind
    for n in g.nodes:
        if n.kind not in PARAM_SCHEMA:
            out.append(Violation("F005", n.id, f"unknown node kind {n.kind!r}"))
            continue
        want = PARAM_SCHEMA[n.kind]
        if set(n.params) != set(want):
            out.append(Violation(
                "F005", n.id,
                f"{n.kind} needs params {{{', '.join(want)}}}, got "
                f"{{{', '.join(sorted(n.params))}}}"))
            continue
        bad = False
        for p in want:
            v = n.params[p]
            if p in _INT_PARAMS:
                if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                    out.append(Violation("F005", n.id, f"{n.kind}.{p} must be a positive int"))
                    bad = True
            else:
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    out.append(Violation("F005", n.id, f"{n.kind}.{p} must be numeric"))
                    bad = True
        if not bad and n.kind == "Attention" and n.params["dim"] % n.params["heads"] != 0:
            out.append(Violation("F005", n.id, "Attention dim must be divisible by heads"))

    # edge endpoints, self-loops, duplicates
    seen_edges = set()
    for e in g.edges:
        key = (e.src, e.dst)
        locus = f"{e.src}->{e.dst}"
        if e.src not in by_id or e.dst not in by_id:
            out.append(Violation("F004", locus, "edge endpoint does not exist"))
            continue
        if e.src == e.dst:
            out.append(Violation("F002", locus, "self-loop"))
        if key in seen_edges:
            out.append(Violation("F003", locus, "duplicate edge"))
        seen_edges.add(key)

    inputs = [n for n in g.nodes if n.kind == "Input"]
    outputs = [n for n in g.nodes if n.kind == "Output"]
    if len(inputs) != 1:
        out.append(Violation("F001", g.name, f"need exactly one Input, got {len(inputs)}"))
    if len(outputs) != 1:
        out.append(Violation("F001", g.name, f"need exactly one Output, got {len(outputs)}"))

    # in-degree rules
    for n in g.nodes:
        want = 0 if n.kind == "Input" else 2 if n.kind == "Add" else 1
        got = len(_in_edges(g, n.id))
        if got != want:
            out.append(Violation("F003", n.id,
                                 f"{n.kind} needs in-degree {want}, got {got}"))

    # cycles (beyond self-loops)
    order = _topo_order(g)
    if order is None:
        out.append(Violation("F002", g.name, "graph contains a cycle"))

    # every node on some Input->Output path
    if len(inputs) == 1 and len(outputs) == 1 and order is not None:
        fwd = _reach(g, inputs[0].id, forward=True)
        back = _reach(g, outputs[0].id, forward=False)
        for n in g.nodes:
            if n.id not in fwd or n.id not in back:
                out.append(Violation("F004", n.id,
                                     "node is not on any Input->Output path"))
    return out


def _topo_order(g: FlowGraph) -> list[str] | None:
    """Kahn's algorithm with lexicographic tie-break; None if cyclic."""
    indeg = {n.id: 0 for n in g.nodes}
    succ: dict[str, list[str]] = {n.id: [] for n in g.nodes}
    for e in g.edges:
        if e.src in succ and e.dst in indeg:
            indeg[e.dst] += 1
            succ[e.src].append(e.dst)
    ready = [i for i, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for nxt in succ[nid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    return order if len(order) == len(g.nodes) else None


def _reach(g: FlowGraph, start: str, forward: bool) -> set[str]:
    step = _out_edges if forward else _in_edges
    seen = {start}
    frontier = [start]
    while frontier:
        nid = frontier.pop()
        for e in step(g, nid):
            nxt = e.dst if forward else e.src
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _require_valid(g: FlowGraph):
    violations = validate_graph(g)
    if violations:
        raise ValidationError(
            "invalid-flow",
            "; ".join(f"{v.code}@{v.locus}: {v.message}" for v in violations))


def infer_shapes(g: FlowGraph) -> dict[str, list]:
    """Propagate shapes from Input = [T] in topological order.

    Shape entries are the symbol "T" or positive ints; errors name the
    offending edge with expected vs actual dims.
    """
    _require_valid(g)
    by_id = {n.id: n for n in g.nodes}
    order = _topo_order(g)
    shapes: dict[str, list] = {}

    def last_dim_check(node: FlowNode, shape: list, expected: int, edge: FlowEdge):
        if shape[-1] != expected:
            raise ValidationError(
                "shape-mismatch",
                f"edge {edge.src}->{edge.dst}: {node.kind} {node.id!r} expects "
                f"last dim {expected}, got {shape[-1]}")

    for nid in order:
        node = by_id[nid]
        incoming = _in_edges(g, nid)
        if node.kind == "Input":
            shapes[nid] = [T]
            continue
        if node.kind == "Add":
            a, b = sorted(incoming, key=lambda e: e.src)
            if shapes[a.src] != shapes[b.src]:
                raise ValidationError(
                    "shape-mismatch",
                    f"edge {b.src}->{nid}: Add requires equal shapes, got "
                    f"{shapes[a.src]} and {shapes[b.src]}")
            shapes[nid] = list(shapes[a.src])
            continue
        edge = incoming[0]
        src_shape = list(shapes[edge.src])
        if node.kind == "Output":
            shapes[nid] = src_shape
        elif node.kind == "Embedding":
            if len(src_shape) != 1:
                raise ValidationError(
                    "shape-mismatch",
                    f"edge {edge.src}->{nid}: Embedding expects token ids [T], "
                    f"got {src_shape}")
            shapes[nid] = [T, node.params["dim"]]
        elif node.kind == "Linear":
            if len(src_shape) < 2 or src_shape[-1] == T:
                raise ValidationError(
                    "shape-mismatch",
                    f"edge {edge.src}->{nid}: Linear needs a feature dim, got {src_shape}")
            last_dim_check(node, src_shape, node.params["in"], edge)
            shapes[nid] = src_shape[:-1] + [node.params["out"]]
        elif node.kind in ("LayerNorm", "Attention"):
            if len(src_shape) < 2 or src_shape[-1] == T:
                raise ValidationError(
                    "shape-mismatch",
                    f"edge {edge.src}->{nid}: {node.kind} needs a feature dim, "
                    f"got {src_shape}")
            last_dim_check(node, src_shape, node.params["dim"], edge)
            shapes[nid] = src_shape
        elif node.kind == "LIF":
            shapes[nid] = src_shape
        else:  # pragma: no cover - validate_graph rejects unknown kinds
            raise ValidationError("shape-mismatch", f"unknown kind {node.kind}")
    return shapes


def _fmt_param(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def compile_to_source(g: FlowGraph) -> SourceFile:
    """Deterministic SpikeDef codegen for a valid, shape-consistent graph."""
    _require_valid(g)
    infer_shapes(g)
    by_id = {n.id: n for n in g.nodes}
    order = _topo_order(g)
    computational = [by_id[nid] for nid in order
                     if by_id[nid].kind not in STRUCTURAL]
    if not computational:
        raise ValidationError("empty-body", "graph has no computational node")

    lines = [f"class {g.name}(Module):", "    def __init__(self):"]
    for node in computational:
        args = ", ".join(_fmt_param(node.params[p]) for p in PARAM_SCHEMA[node.kind])
        lines.append(f"        self.{node.id} = {node.kind}({args})")
    lines.append("")
    lines.append("    def forward(self, x):")

    var: dict[str, str] = {}
    for nid in order:
        node = by_id[nid]
        if node.kind == "Input":
            var[nid] = "x"
        elif node.kind == "Output":
            var[nid] = var[_in_edges(g, nid)[0].src]
        elif node.kind == "Add":
            ops = [var[e.src] for e in sorted(_in_edges(g, nid), key=lambda e: e.src)]
            var[nid] = f"h_{nid}"
            lines.append(f"        h_{nid} = {ops[0]} + {ops[1]}")
        else:
            src = _in_edges(g, nid)[0].src
            var[nid] = f"h_{nid}"
            lines.append(f"        h_{nid} = self.{nid}({var[src]})")
    output = next(n for n in g.nodes if n.kind == "Output")
    lines.append(f"        return {var[output.id]}")
    text = "\n".join(lines) + "\n"
    return SourceFile.from_text(text, path=f"<flow:{g.name}>")
