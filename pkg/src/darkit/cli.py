"""Terminal surface for every workbench feature.

Local mode (default) runs against a data directory; ``--server URL``
switches the data-backed subcommands to a remote service. ``--format json``
emits exactly the document the API would return for the same operation.
"""

from __future__ import annotations

import functools
import json
import os
import sys

import click
import httpx

from . import flow as flowmod
from . import graph, report
from .commands import CommandRequest, SearchSpace, expand_grid, render_command, validate_values
from .errors import DarkitError, ValidationError
from .patch import CodePatch, apply_patch_pure, validate_patch
from .spikedef import SourceFile, parse
from .util import dump_json
from .workbench import Workbench, resolve_data_dir


class Ctx:
    def __init__(self, data_dir: str | None, server: str | None):
        self.data_dir = resolve_data_dir(data_dir)
        self.server = server.rstrip("/") if server else None
        self._bench = None

    @property
    def bench(self) -> Workbench:
        if self._bench is None:
            self._bench = Workbench(self.data_dir)
        return self._bench

    # remote helpers: raise DarkitError on API error bodies

    def _check(self, resp: httpx.Response) -> str:
        if resp.status_code >= 400:
            try:
                err = resp.json()["error"]
                raise DarkitError(err["code"], err["message"])
            except (KeyError, ValueError):
                raise DarkitError("http-error", f"HTTP {resp.status_code}")
        return resp.text

    def get(self, path: str, **params) -> str:
        return self._check(httpx.get(self.server + path, params=params, timeout=30))

    def post(self, path: str, doc=None, content: str | None = None) -> str:
        if content is not None:
            r = httpx.post(self.server + path, content=content, timeout=30)
        else:
            r = httpx.post(self.server + path, json=doc, timeout=30)
        return self._check(r)

    def delete(self, path: str) -> str:
        return self._check(httpx.delete(self.server + path, timeout=30))


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DarkitError as exc:
            click.echo(f"error: {exc.message}", err=True)
            sys.exit(1)
        except httpx.HTTPError as exc:
            click.echo(f"error: server unreachable ({exc})", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--data-dir", default=None, help="Data directory (env DARKIT_DATA_DIR).")
@click.option("--server", default=None, help="Remote service URL; switches to remote mode.")
@click.pass_context
def main(ctx, data_dir, server):
    """Darkit workbench: model graphs, patches, flows, commands, runs."""
    ctx.obj = Ctx(data_dir, server)


# ── serve ────────────────────────────────────────────────────────────────


@main.command()
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--data-dir", default=None)
@click.pass_obj
@handle_errors
def serve(ctx, port, data_dir):
    """Start the HTTP service (and the web UI if a frontend build exists)."""
    import uvicorn

    from .api import create_app

    app = create_app(resolve_data_dir(data_dir or ctx.data_dir))
    uvicorn.run(app, host="0.0.0.0", port=port, log_level="info")


# ── model source commands ────────────────────────────────────────────────


def _tree_doc(tree) -> dict:
    return {"model": tree.model_name, "version": tree.version,
            "tree": graph.to_display_tree(tree)}


def _print_tree(display: dict, indent: int = 0):
    click.echo("    " * indent + f"{display['label']}  [{display['kind']}]")
    for child in display["children"]:
        _print_tree(child, indent + 1)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", default=None, help="Root class (default: last in file).")
@click.option("--format", "fmt", type=click.Choice(["tree", "json"]), default="tree")
@handle_errors
def extract(file, model, fmt):
    """Extract the hierarchical module tree of a SpikeDef file."""
    tree = graph.extract_static(parse(SourceFile.from_path(file)), model)
    if fmt == "json":
        click.echo(dump_json(_tree_doc(tree)))
    else:
        _print_tree(graph.to_display_tree(tree))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--module", "module_id", required=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@handle_errors
def code(file, module_id, fmt):
    """Show the code segment of one module by dotted id ('-' for the root)."""
    tree = graph.extract_static(parse(SourceFile.from_path(file)))
    module_id = "" if module_id == "-" else module_id
    doc = graph.get_code(tree, module_id)
    if fmt == "json":
        click.echo(dump_json(doc))
    else:
        click.echo(doc["text"], nl=False)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--module", "module_id", required=True)
@click.option("--patch", "patch_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="File holding the replacement text.")
@click.option("--check-only", is_flag=True, help="Validate without writing.")
@click.option("--author", default="")
@click.option("--note", default="")
@handle_errors
def patch(file, module_id, patch_file, check_only, author, note):
    """Validate (and apply) a replacement for one module's code segment."""
    tree = graph.extract_static(parse(SourceFile.from_path(file)))
    module_id = "" if module_id == "-" else module_id
    with open(patch_file, encoding="utf-8") as fh:
        new_text = fh.read()
    p = CodePatch(tree.model_name, module_id, new_text, author, note)
    rpt = validate_patch(tree, p)
    click.echo(dump_json(rpt.to_doc()))
    if not rpt.ok:
        sys.exit(1)
    if not check_only:
        new_tree, _ = apply_patch_pure(tree, p)
        with open(file, "w", encoding="utf-8") as fh:
            fh.write(new_tree.file.text)
        click.echo(f"applied; {file} now at version {new_tree.version}", err=True)


# ── flows ────────────────────────────────────────────────────────────────


@main.group()
def flow():
    """Validate and compile flow-graph documents (.flow.json)."""


def _load_flow(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@flow.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@handle_errors
def flow_validate(ctx, file):
    doc = _load_flow(file)
    if ctx.server:
        click.echo(ctx.post("/api/flows/validate", doc))
        return
    g = flowmod.FlowGraph.from_doc(doc)
    violations = flowmod.validate_graph(g)
    click.echo(dump_json({"valid": not violations,
                          "violations": [v.to_doc() for v in violations]}))
    if violations:
        sys.exit(1)


@flow.command("compile")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", default=None, type=click.Path(dir_okay=False))
@click.pass_obj
@handle_errors
def flow_compile(ctx, file, out):
    doc = _load_flow(file)
    if ctx.server:
        body = json.loads(ctx.post("/api/flows/compile", doc))
        text = body["source"]
    else:
        text = flowmod.compile_to_source(flowmod.FlowGraph.from_doc(doc)).text
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text, nl=False)


# ── command generation ───────────────────────────────────────────────────


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _values_from_pairs(pairs) -> dict:
    values = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"expected name=value, got {pair!r}")
        name, raw = pair.split("=", 1)
        values[name] = _parse_value(raw)
    return values


@main.group()
def cmd():
    """Generate tuning/testing commands from model parameter schemas."""


@cmd.command("render")
@click.option("--model", required=True)
@click.option("--dataset", required=True)
@click.option("--tokenizer", required=True)
@click.option("--mode", type=click.Choice(["train", "test"]), default="train")
@click.option("-p", "--param", "params", multiple=True, help="name=value")
@click.pass_obj
@handle_errors
def cmd_render(ctx, model, dataset, tokenizer, mode, params):
    values = _values_from_pairs(params)
    if ctx.server:
        click.echo(ctx.post("/api/commands/render", {
            "model": model, "dataset": dataset, "tokenizer": tokenizer,
            "mode": mode, "values": values}))
        return
    schema = ctx.bench.params_schema(model)
    ctx.bench.registry.get(dataset, "dataset")
    ctx.bench.registry.get(tokenizer, "tokenizer")
    req = CommandRequest(model, dataset, tokenizer, values, mode)
    click.echo(render_command(req, schema))


@cmd.command("grid")
@click.option("--model", required=True)
@click.option("--dataset", required=True)
@click.option("--tokenizer", required=True)
@click.option("--mode", type=click.Choice(["train", "test"]), default="train")
@click.option("-p", "--param", "params", multiple=True, help="base name=value")
@click.option("--grid", "grids", multiple=True, help="name=v1,v2,...")
@click.pass_obj
@handle_errors
def cmd_grid(ctx, model, dataset, tokenizer, mode, params, grids):
    values = _values_from_pairs(params)
    axes = []
    for spec in grids:
        if "=" not in spec:
            raise click.UsageError(f"expected name=v1,v2, got {spec!r}")
        name, raw = spec.split("=", 1)
        axes.append((name, tuple(_parse_value(v) for v in raw.split(","))))
    if ctx.server:
        click.echo(ctx.post("/api/commands/grid", {
            "base": {"model": model, "dataset": dataset, "tokenizer": tokenizer,
                     "mode": mode, "values": values},
            "axes": [{"param": n, "values": list(v)} for n, v in axes]}))
        return
    schema = ctx.bench.params_schema(model)
    ctx.bench.registry.get(dataset, "dataset")
    ctx.bench.registry.get(tokenizer, "tokenizer")
    base = CommandRequest(model, dataset, tokenizer, values, mode)
    for command in expand_grid(SearchSpace(base, tuple(axes)), schema):
        click.echo(command)


# ── runs ─────────────────────────────────────────────────────────────────


@main.group()
def run():
    """Start runs."""


@run.command("simulate")
@click.option("--model", required=True)
@click.option("--steps", required=True, type=int)
@click.option("--seed", default=0, type=int)
@click.pass_obj
@handle_errors
def run_simulate(ctx, model, steps, seed):
    """Deterministic synthetic training run (desk-scale stand-in)."""
    if ctx.server:
        body = json.loads(ctx.post("/api/runs", {
            "synthetic": True, "model": model, "steps": steps, "seed": seed}))
        click.echo(body["run_id"])
        return
    click.echo(ctx.bench.runs.synth_run(model, steps, seed))


def _train_like(ctx, mode, model, dataset, tokenizer, extra):
    """Shared body of `darkit train` / `darkit test`: validate params
    against the model schema, then simulate a run at desk scale."""
    schema = ctx.bench.params_schema(model) if not ctx.server else None
    if ctx.server:
        body = json.loads(ctx.get("/api/registry", kind="model"))
        entry = next((e for e in body["entries"] if e["name"] == model), None)
        if entry is None:
            raise DarkitError("not-found", f"unknown model {model!r}")
        from .commands import ParamSpec
        schema = [ParamSpec.from_doc(s) for s in entry.get("params_schema") or []]
    by_name = {s.name: s for s in schema}
    values = {}
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--"):
            raise click.UsageError(f"unexpected argument {arg!r}")
        name = arg[2:]
        spec = by_name.get(name)
        if spec is not None and spec.type == "flag":
            values[name] = True
            i += 1
            continue
        if i + 1 >= len(extra):
            raise click.UsageError(f"missing value for --{name}")
        values[name] = _parse_value(extra[i + 1])
        i += 2
    violations = validate_values(schema, values)
    if violations:
        raise ValidationError("invalid-values",
                              "; ".join(v["message"] for v in violations))
    steps_default = next((s.default for s in schema if s.name == "steps"), 10)
    steps = int(values.get("steps", steps_default or 10))
    if ctx.server:
        body = json.loads(ctx.post("/api/runs", {
            "synthetic": True, "model": model, "steps": steps, "seed": 0}))
        click.echo(body["run_id"])
        return
    ctx.bench.registry.get(dataset, "dataset")
    ctx.bench.registry.get(tokenizer, "tokenizer")
    click.echo(ctx.bench.runs.synth_run(model, steps))


@main.command(context_settings=dict(ignore_unknown_options=True))
@click.argument("model")
@click.option("--dataset", required=True)
@click.option("--tokenizer", required=True)
@click.argument("extra", nargs=-1, type=click.UNPROCESSED)
@click.pass_obj
@handle_errors
def train(ctx, model, dataset, tokenizer, extra):
    """Run training (simulated at desk scale); accepts schema param flags."""
    _train_like(ctx, "train", model, dataset, tokenizer, list(extra))


@main.command(context_settings=dict(ignore_unknown_options=True))
@click.argument("model")
@click.option("--dataset", required=True)
@click.option("--tokenizer", required=True)
@click.argument("extra", nargs=-1, type=click.UNPROCESSED)
@click.pass_obj
@handle_errors
def test(ctx, model, dataset, tokenizer, extra):
    """Run testing (simulated at desk scale); accepts schema param flags."""
    _train_like(ctx, "test", model, dataset, tokenizer, list(extra))


@main.group()
def runs():
    """Inspect, watch, compare, and export tracked runs."""


@runs.command("list")
@click.option("--model", default=None)
@click.option("--status", default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
@handle_errors
def runs_list(ctx, model, status, fmt):
    if ctx.server:
        params = {k: v for k, v in (("model", model), ("status", status)) if v}
        text = ctx.get("/api/runs", **params)
        if fmt == "json":
            click.echo(text)
            return
        records = json.loads(text)["runs"]
    else:
        records = ctx.bench.runs.list_runs(model, status)
        if fmt == "json":
            click.echo(dump_json({"runs": records}))
            return
    for r in records:
        click.echo(f"{r['run_id']}  {r['model']:<16} {r['status']}")


@runs.command("show")
@click.argument("run_id")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
@handle_errors
def runs_show(ctx, run_id, fmt):
    if ctx.server:
        text = ctx.get(f"/api/runs/{run_id}")
        doc = json.loads(text)
    else:
        doc = ctx.bench.runs.run(run_id).to_doc()
        text = dump_json(doc)
    if fmt == "json":
        click.echo(text)
    else:
        for key, value in doc.items():
            click.echo(f"{key}: {value}")


@runs.command("watch")
@click.argument("run_id")
@click.pass_obj
@handle_errors
def runs_watch(ctx, run_id):
    """Stream a run's live events (one JSON line each) until run_end."""
    if ctx.server:
        with httpx.stream("GET", f"{ctx.server}/api/runs/{run_id}/stream",
                          timeout=None) as resp:
            if resp.status_code >= 400:
                raise DarkitError("not-found", f"unknown run {run_id!r}")
            for line in resp.iter_lines():
                if line.startswith("data: "):
                    click.echo(line[6:])
        return
    for event in ctx.bench.runs.subscribe(run_id):
        if event is not None:
            click.echo(dump_json(event))


@runs.command("compare")
@click.argument("run_ids", nargs=-1, required=True)
@click.option("--metric", required=True)
@click.option("--max-points", default=200, type=int)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="json")
@click.option("--figure", default=None, type=click.Path(dir_okay=False),
              help="Also render a comparison chart to this image file.")
@click.pass_obj
@handle_errors
def runs_compare(ctx, run_ids, metric, max_points, fmt, figure):
    if ctx.server:
        text = ctx.get("/api/runs/compare", ids=",".join(run_ids),
                       name=metric, max_points=max_points)
        chart = json.loads(text)
    else:
        chart = ctx.bench.runs.compare_runs(list(run_ids), metric, max_points)
        text = dump_json(chart)
    click.echo(text)
    if figure:
        report.render_compare_figure(chart, figure)
        click.echo(f"wrote {figure}", err=True)


@runs.command("export")
@click.argument("run_id")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), required=True)
@click.option("-o", "--out", default=None, type=click.Path(dir_okay=False))
@click.option("--figure", default=None, type=click.Path(dir_okay=False),
              help="Also render the run's loss chart next to the export.")
@click.option("--metric", default="loss", show_default=True,
              help="Metric plotted when --figure is given.")
@click.option("--max-points", default=200, type=int)
@click.pass_obj
@handle_errors
def runs_export(ctx, run_id, fmt, out, figure, metric, max_points):
    if ctx.server:
        text = ctx.get(f"/api/runs/{run_id}/export", format=fmt)
    else:
        text = ctx.bench.runs.export_run(run_id, fmt)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text, nl=False)
    if figure:
        if ctx.server:
            series = json.loads(ctx.get(f"/api/runs/{run_id}/metrics",
                                        name=metric, max_points=max_points))
        else:
            series = ctx.bench.runs.get_series(run_id, metric, max_points)
        report.render_series_figure(series, figure)
        click.echo(f"wrote {figure}", err=True)


# ── registry ─────────────────────────────────────────────────────────────


@main.group()
def registry():
    """List, add, verify, and remove plugin entries."""


@registry.command("list")
@click.option("--kind", default=None, type=click.Choice(["dataset", "tokenizer", "model"]))
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
@handle_errors
def registry_list(ctx, kind, fmt):
    if ctx.server:
        text = ctx.get("/api/registry", **({"kind": kind} if kind else {}))
        if fmt == "json":
            click.echo(text)
            return
        entries = json.loads(text)["entries"]
    else:
        entries = [e.to_doc() for e in ctx.bench.registry.list_entries(kind)]
        if fmt == "json":
            click.echo(dump_json({"entries": entries}))
            return
    for e in entries:
        click.echo(f"{e['kind']:<10} {e['name']:<20} {e['version']:<8} {e['description']}")


@registry.command("add")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@handle_errors
def registry_add(ctx, manifest):
    """Add an entry; payload files are read relative to the manifest."""
    with open(manifest, encoding="utf-8") as fh:
        doc = json.load(fh)
    base = os.path.dirname(os.path.abspath(manifest))
    files = {}
    for f in doc.get("files") or []:
        with open(os.path.join(base, f["path"]), "rb") as fh:
            files[f["path"]] = fh.read()
    if ctx.server:
        import base64 as b64mod
        click.echo(ctx.post("/api/registry", {
            "manifest": doc,
            "files": {p: b64mod.b64encode(data).decode() for p, data in files.items()}}))
        return
    entry = ctx.bench.registry.add_entry(doc, files)
    click.echo(dump_json(entry.to_doc()))


@registry.command("verify")
@click.argument("name")
@click.argument("kind")
@click.argument("version")
@click.pass_obj
@handle_errors
def registry_verify(ctx, name, kind, version):
    if ctx.server:
        click.echo(ctx.post(f"/api/registry/{kind}/{name}/{version}/verify"))
        return
    rpt = ctx.bench.registry.verify_entry(name, kind, version)
    click.echo(dump_json(rpt))
    if not rpt["passed"]:
        sys.exit(1)


@registry.command("remove")
@click.argument("name")
@click.argument("kind")
@click.argument("version")
@click.pass_obj
@handle_errors
def registry_remove(ctx, name, kind, version):
    if ctx.server:
        click.echo(ctx.delete(f"/api/registry/{kind}/{name}/{version}"))
        return
    entry = ctx.bench.registry.remove_entry(name, kind, version)
    click.echo(dump_json(entry.to_doc()))


if __name__ == "__main__":
    main()
