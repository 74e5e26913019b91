"""End-to-end acceptance gate.

Each test covers one release criterion and prints a single PASS line on
success; any assertion failure fails the whole gate. Budgets are wall-clock
seconds on a developer laptop.
"""

import json
import random
import threading
import time

from click.testing import CliRunner

from darkit import flow as flowmod
from darkit.cli import main as cli_main
from darkit.commands import CommandRequest, SearchSpace, expand_grid, render_command
from darkit.graph import extract_static, get_code
from darkit.patch import CodePatch, ModelStore, revert_record, validate_patch
from darkit.registry import TINY_SPIKE_GPT_SCHEMA, Registry, sha256_hex
from darkit.spikedef import SourceFile, parse
from darkit.tracker import RunStore, downsample, synth_loss

from .oracles import bucket_downsample, scan_spans
from .test_flow import random_valid_graph


def _report(name: str, started: float, budget: float | None = None):
    elapsed = time.monotonic() - started
    if budget is not None:
        assert elapsed < budget, f"{name} took {elapsed:.2f}s (budget {budget}s)"
    print(f"PASS {name} ({elapsed:.2f}s)")


def test_parser_span_oracle(fixture_paths):
    started = time.monotonic()
    tiny = None
    for path in fixture_paths:
        source = SourceFile.from_path(path)
        index = parse(source)
        oracle = scan_spans(source.text)
        assert set(c.name for c in index.classes) == set(oracle)
        for cls in index.classes:
            ref = oracle[cls.name]
            assert (cls.span.start_line, cls.span.end_line) == ref["span"]
            assert (cls.init_span.start_line, cls.init_span.end_line) == ref["init"]
            assert (cls.forward_span.start_line, cls.forward_span.end_line) == ref["forward"]
            assert {a.attr: a.span.start_line for a in cls.assigns} == ref["assigns"]
        if str(path).endswith("tiny_spike_gpt.sd"):
            tiny = extract_static(index)
    assert len(fixture_paths) >= 10
    assert tiny is not None and tiny.size() == 11
    _report("parser/extractor span oracle", started, budget=1.0)


def test_flow_roundtrip():
    started = time.monotonic()
    rng = random.Random(20260824)
    for _ in range(100):
        g = random_valid_graph(rng)
        assert flowmod.validate_graph(g) == []
        source = flowmod.compile_to_source(g)
        tree = extract_static(parse(source))
        want = sorted(
            (n.kind, tuple(n.params[p] for p in flowmod.PARAM_SCHEMA[n.kind]))
            for n in g.nodes if n.kind not in ("Input", "Output", "Add"))
        got = sorted((n.kind, n.params) for n in tree.root.walk() if n.id)
        assert want == got
        # byte-determinism under node/edge permutation
        nodes, edges = list(g.nodes), list(g.edges)
        rng.shuffle(nodes)
        rng.shuffle(edges)
        shuffled = flowmod.FlowGraph(g.name, tuple(nodes), tuple(edges))
        assert flowmod.compile_to_source(shuffled).text == source.text
    _report("flow compile/extract roundtrip x100", started, budget=5.0)


def _corrupt_token(rng: random.Random, text: str) -> str:
    """One seeded single-token corruption of a code segment."""
    mutations = [
        lambda t: t.replace("Linear", "Linnear", 1),
        lambda t: t.replace("Embedding", "Embeddng", 1),
        lambda t: t.replace("LIF", "LIFF", 1),
        lambda t: t.replace("(", "", 1),
        lambda t: t.replace(")", "", 1),
        lambda t: t.replace(",", "", 1),
        lambda t: t.replace("=", "", 1),
        lambda t: t.replace("self.", "slf.", 1),
        lambda t: t.replace("        ", "       ", 1),
        lambda t: t.replace("        ", "         ", 1),
        lambda t: t.replace("16", "16.5.2", 1),
        lambda t: t + "garbage\n",
        lambda t: "\t" + t,
    ]
    mutated = rng.choice(mutations)(text)
    return mutated if mutated != text else text + ")"


def test_patch_soundness_fuzz(tiny_source):
    started = time.monotonic()
    tree = extract_static(parse(tiny_source))
    leaf_ids = [n.id for n in tree.root.walk() if not n.children and n.id]
    valid_texts = {nid: get_code(tree, nid)["text"] for nid in leaf_ids}
    rng = random.Random(77)
    false_accepts = 0
    for _ in range(1000):
        nid = rng.choice(leaf_ids)
        corrupted = _corrupt_token(rng, valid_texts[nid])
        report = validate_patch(tree, CodePatch(tree.model_name, nid, corrupted))
        if report.ok:
            # validator said yes: the parser must agree on the spliced file
            from darkit.spikedef import splice
            candidate = splice(tree.file.text, tree.node(nid).span, corrupted)
            try:
                parse(SourceFile.from_text(candidate))
            except Exception:
                false_accepts += 1
    assert false_accepts == 0

    # identity patch is byte-stable
    store_dir = None
    import tempfile
    with tempfile.TemporaryDirectory() as store_dir:
        store = ModelStore(store_dir)
        store.register("tiny", tiny_source)
        identity = CodePatch("tiny", "emb", valid_texts["emb"])
        tree2, _ = store.apply("tiny", identity, base_version=1)
        assert tree2.file.text == tiny_source.text

        # history replay reconstructs the original file
        store.apply("tiny", CodePatch(
            "tiny", "head", "        self.head = Linear(16, 256)\n"), base_version=2)
        store.apply("tiny", CodePatch(
            "tiny", "blocks.0.lif", "        self.lif = LIF(2.0, 0.9)\n"),
            base_version=3)
        text = store.tree("tiny").file.text
        for record in reversed(store.history("tiny")):
            text = revert_record(text, record)
        assert text == tiny_source.text
    _report("patch validator fuzz x1000 (0 false accepts)", started)


def _reparse_command(cmd: str, schema):
    """Independent re-parse of a rendered command line."""
    parts = cmd.split(" ")
    assert parts[0] == "darkit" and parts[1] in ("train", "test")
    model = parts[2]
    assert parts[3] == "--dataset" and parts[5] == "--tokenizer"
    dataset, tokenizer = parts[4], parts[6]
    by_name = {s.name: s for s in schema}
    values = {}
    i = 7
    while i < len(parts):
        assert parts[i].startswith("--")
        spec = by_name[parts[i][2:]]
        if spec.type == "flag":
            values[spec.name] = True
            i += 1
            continue
        raw = parts[i + 1]
        if spec.type == "int":
            values[spec.name] = int(raw)
        elif spec.type == "float":
            values[spec.name] = float(raw)
        else:
            values[spec.name] = raw
        i += 2
    return parts[1], model, dataset, tokenizer, values


def test_command_grid_laws(tmp_path):
    started = time.monotonic()
    schema = TINY_SPIKE_GPT_SCHEMA
    rng = random.Random(4242)
    pool = {
        "lr": [0.1, 0.01, 0.001, 0.0001, 3e-05],
        "batch_size": [2, 4, 8, 16, 32],
        "epochs": [1, 2, 3, 5],
        "steps": [5, 10, 50],
        "optimizer": ["adam", "sgd"],
    }
    base = CommandRequest("tiny-spike-gpt", "wikitext", "gpt2-small")
    for _ in range(50):
        names = rng.sample(list(pool), rng.randint(1, 4))
        axes = tuple(
            (n, tuple(rng.sample(pool[n], rng.randint(1, len(pool[n])))))
            for n in names)
        cmds = expand_grid(SearchSpace(base, axes), schema)
        # count law
        expected_count = 1
        for _, vals in axes:
            expected_count *= len(vals)
        assert len(cmds) == expected_count
        # odometer order against brute-force product
        import itertools
        combos = list(itertools.product(*(v for _, v in axes)))
        assert len(combos) == len(cmds)
        for cmd, combo in zip(cmds, combos):
            values = dict(zip(names, combo))
            assert cmd == render_command(
                CommandRequest(base.model, base.dataset, base.tokenizer, values),
                schema)
            # every rendered command re-parses to the values that produced it
            mode, model, dataset, tokenizer, parsed = _reparse_command(cmd, schema)
            assert (mode, model, dataset, tokenizer) == \
                ("train", base.model, base.dataset, base.tokenizer)
            assert parsed == values

    # one rendered command actually executes end to end under the CLI
    runner = CliRunner()
    rendered = render_command(CommandRequest(
        "tiny-spike-gpt", "wikitext", "gpt2-small", {"steps": 3}), schema)
    result = runner.invoke(
        cli_main, ["--data-dir", str(tmp_path)] + rendered.split(" ")[1:])
    assert result.exit_code == 0, result.output
    _report("command grid laws x50 + CLI closure", started)


def test_tracker_durability_and_downsample(tmp_path):
    started = time.monotonic()
    store = RunStore(tmp_path)
    record = store.create_run("bulk")
    rid = record.run_id
    lines = []
    rng = random.Random(10)
    for step in range(10000):
        lines.append(json.dumps({
            "type": "metric", "run": rid, "ts": 1000 + step, "step": step,
            "name": "loss", "value": rng.uniform(0.0, 5.0)}))
    result = store.ingest_events(rid, "\n".join(lines) + "\n")
    assert result == {"accepted": 10000, "rejected": []}
    before = store.get_series(rid, "loss", 10000)

    # kill/restart: a fresh store rebuilt purely from the logs
    fresh = RunStore(tmp_path)
    after = fresh.get_series(rid, "loss", 10000)
    assert before == after

    # downsample to 100 against the brute-force bucketing oracle
    points = [(p["step"], p["value"]) for p in before["points"]]
    ours = downsample(points, 100)
    ref = bucket_downsample(points, 100)
    assert [p["step"] for p in ours] == [p["step"] for p in ref]
    assert all(abs(a["value"] - b["value"]) <= 1e-12 for a, b in zip(ours, ref))

    assert synth_loss(0) == 4.5
    _report("tracker durability x10000 + downsample oracle", started)


def test_streaming_order_and_isolation(tmp_path):
    started = time.monotonic()
    store = RunStore(tmp_path, heartbeat_seconds=0.1)
    record = store.create_run("burst")
    rid = record.run_id
    sub = store.subscribe(rid)
    received = []

    def reader():
        for obj in sub:
            if obj is not None:
                received.append(obj)

    t = threading.Thread(target=reader)
    t.start()
    lines = "".join(
        json.dumps({"type": "metric", "run": rid, "step": i, "name": "loss",
                    "value": float(i)}) + "\n"
        for i in range(1000))
    store.ingest_events(rid, lines)
    store.ingest_events(rid, json.dumps(
        {"type": "run_end", "run": rid, "status": "completed"}) + "\n")
    t.join(timeout=10)
    assert not t.is_alive()
    steps = [o["step"] for o in received if o["type"] == "metric"]
    assert steps == list(range(1000))  # all events, in order, no duplicates

    # concurrent ingestion into 4 runs: each log holds only its own lines
    rids = [store.create_run(f"c{i}").run_id for i in range(4)]

    def feeder(run_id):
        for i in range(250):
            store.ingest_events(run_id, json.dumps(
                {"type": "metric", "run": run_id, "step": i, "name": "loss",
                 "value": float(i)}) + "\n")

    threads = [threading.Thread(target=feeder, args=(r,)) for r in rids]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    for run_id in rids:
        log = store._log_path(run_id)
        events = [json.loads(ln) for ln in open(log) if ln.strip()]
        metrics = [e for e in events if e["type"] == "metric"]
        assert all(e["run"] == run_id for e in events)
        assert [e["step"] for e in metrics] == list(range(250))
    _report("stream burst x1000 + 4-way ingest isolation", started)


def test_registry_flip_integrity(tmp_path):
    started = time.monotonic()
    registry = Registry(tmp_path)
    assert registry.seed_builtin() == 10
    assert len(registry.list_entries()) == 10
    registry.seed_builtin()  # idempotent
    assert len(registry.list_entries()) == 10

    files = {f"part{i}.bin": bytes(random.Random(i).randbytes(64))
             for i in range(3)}
    registry.add_entry({
        "name": "flips", "kind": "dataset", "version": "1.0.0",
        "files": [{"path": p, "sha256": sha256_hex(d), "bytes": len(d)}
                  for p, d in sorted(files.items())]}, files)
    entry = registry.get("flips", "dataset")
    rng = random.Random(55)
    for _ in range(50):
        target = rng.choice(sorted(files))
        path = registry.entry_file_path(entry, target)
        data = bytearray(open(path, "rb").read())
        i = rng.randrange(len(data))
        flip = rng.randrange(1, 256)
        data[i] ^= flip
        open(path, "wb").write(bytes(data))
        verdict = registry.verify_entry("flips", "dataset", "1.0.0")
        assert not verdict["passed"]
        failed = [f["path"] for f in verdict["files"] if not f["passed"]]
        assert failed == [target]  # exactly the flipped file
        open(path, "wb").write(files[target])
        assert registry.verify_entry("flips", "dataset", "1.0.0")["passed"]
    _report("registry single-byte flip detection x50", started)


def test_end_to_end_cli(tmp_path, fixture_paths):
    started = time.monotonic()
    runner = CliRunner()
    data = str(tmp_path / "data")
    tiny = next(p for p in fixture_paths if str(p).endswith("tiny_spike_gpt.sd"))
    work = tmp_path / "tiny.sd"
    work.write_text(open(tiny).read())

    def run(*args, **kw):
        result = runner.invoke(cli_main, ["--data-dir", data, *args], **kw)
        assert result.exit_code == 0, result.output
        return result

    # 1. extract the fixture
    out = run("extract", str(work), "--format", "json")
    assert json.loads(out.output)["model"] == "TinySpikeGPT"

    # 2. validate + apply a LIF-threshold patch
    seg = tmp_path / "lif.txt"
    seg.write_text("        self.lif = LIF(1.5, 0.9)\n")
    run("patch", str(work), "--module", "blocks.0.lif",
        "--patch", str(seg), "--check-only")
    run("patch", str(work), "--module", "blocks.0.lif", "--patch", str(seg))
    assert "LIF(1.5, 0.9)" in work.read_text()

    # 3. compile the four-node reference flow
    flow = tmp_path / "tiny.flow.json"
    flow.write_text(json.dumps({
        "name": "TinyFlow",
        "nodes": [
            {"id": "in", "kind": "Input", "params": {}},
            {"id": "emb", "kind": "Embedding", "params": {"vocab": 128, "dim": 16}},
            {"id": "head", "kind": "Linear", "params": {"in": 16, "out": 128}},
            {"id": "out", "kind": "Output", "params": {}},
        ],
        "edges": [{"from": "in", "to": "emb"}, {"from": "emb", "to": "head"},
                  {"from": "head", "to": "out"}]}))
    compiled = run("flow", "compile", str(flow))
    assert compiled.output.startswith("class TinyFlow(Module):")

    # 4. simulate a 100-step run (twice, for the comparison)
    rid_a = run("run", "simulate", "--model", "tiny-spike-gpt",
                "--steps", "100").output.strip()
    rid_b = run("run", "simulate", "--model", "tiny-spike-gpt",
                "--steps", "100").output.strip()

    # 5. export the comparative chart JSON
    out = run("runs", "compare", rid_a, rid_b, "--metric", "loss",
              "--max-points", "50")
    chart = json.loads(out.output)
    assert chart["metric"] == "loss"
    assert [r["id"] for r in chart["runs"]] == [rid_a, rid_b]
    assert all(len(r["points"]) == 50 for r in chart["runs"])
    _report("end-to-end CLI scenario", started, budget=10.0)
