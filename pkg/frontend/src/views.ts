/** DOM wiring for the five workbench views. Rendering is deliberately
 * plain: innerHTML templates plus event listeners, no framework. */

import { Api, ApiError } from "./api.js";
import { drawChart } from "./chart.js";
import { formFields, gridCount, valuesFromForm } from "./commandform.js";
import { lineCount, markersFor } from "./editor.js";
import { FlowModel, PALETTE } from "./flowmodel.js";
import { streamRun } from "./sse.js";
import type { ViewState } from "./state.js";
import { flattenTree } from "./tree.js";
import type { ParamSpecDoc, RunEvent, SeriesPoint } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function showError(target: HTMLElement, err: unknown): void {
  const msg = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  target.innerHTML = `<div class="error">${esc(msg)}</div>`;
}

// ── registry browser ─────────────────────────────────────────────────

export async function renderRegistry(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `<h2>Registry</h2><div id="reg-list">loading…</div>`;
  const list = el("reg-list");
  try {
    const { entries } = await api.listRegistry();
    list.innerHTML = `<table><tr><th>kind</th><th>name</th><th>version</th>
      <th>description</th><th></th></tr>` +
      entries.map((e) => `<tr><td>${esc(e.kind)}</td><td>${esc(e.name)}</td>
        <td>${esc(e.version)}</td><td>${esc(e.description)}</td>
        <td><button data-verify="${esc(`${e.kind}/${e.name}/${e.version}`)}">verify</button></td>
        </tr>`).join("") + "</table><div id='reg-verdict'></div>";
    list.querySelectorAll("button[data-verify]").forEach((btn) => {
      btn.addEventListener("click", async () => {
        const [kind, name, version] = (btn as HTMLElement).dataset.verify!.split("/");
        const verdict = el("reg-verdict");
        try {
          const result = await api.verifyEntry(kind, name, version);
          verdict.innerHTML = result.passed
            ? `<div class="ok">${esc(name)} verified</div>`
            : result.files.map((f) =>
                `<div class="error">${esc(f.path)}: ${esc(f.reason)}</div>`).join("");
        } catch (err) {
          showError(verdict, err);
        }
      });
    });
  } catch (err) {
    showError(list, err);
  }
}

// ── model explorer + code editor ─────────────────────────────────────

export async function renderModels(
  api: Api, root: HTMLElement, state: ViewState,
  onSelect: (moduleId: string) => void,
  onDirty: (dirty: boolean) => void,
): Promise<void> {
  const model = state.model ?? "tiny-spike-gpt";
  root.innerHTML = `<h2>Model explorer — ${esc(model)}</h2>
    <div class="split">
      <div id="tree-pane">loading…</div>
      <div id="code-pane"><em>select a module</em></div>
    </div>`;
  const treePane = el("tree-pane");
  try {
    const doc = await api.modelTree(model);
    const rows = flattenTree(doc.tree);
    treePane.innerHTML = `<div class="muted">version ${doc.version},
      ${rows.length} modules</div>` +
      rows.map((r) => `<div class="tree-row" data-id="${esc(r.id)}"
        style="padding-left:${r.depth * 16}px">${esc(r.label)}
        <span class="muted">[${esc(r.kind)}]</span></div>`).join("");
    treePane.querySelectorAll(".tree-row").forEach((row) => {
      row.addEventListener("click", () =>
        onSelect((row as HTMLElement).dataset.id ?? ""));
    });
    if (state.moduleId !== null) {
      await renderEditor(api, el("code-pane"), model, state.moduleId,
        doc.version, onDirty);
    }
  } catch (err) {
    showError(treePane, err);
  }
}

async function renderEditor(
  api: Api, pane: HTMLElement, model: string, moduleId: string,
  baseVersion: number, onDirty: (dirty: boolean) => void,
): Promise<void> {
  try {
    const code = await api.moduleCode(model, moduleId);
    pane.innerHTML = `<div class="muted">${esc(moduleId || "(root)")}
        lines ${code.span.start_line}–${code.span.end_line}</div>
      <div class="editor"><pre id="gutter"></pre><textarea id="code-text"
        spellcheck="false"></textarea></div>
      <button id="btn-validate">Validate</button>
      <button id="btn-save">Save</button>
      <div id="editor-errors"></div>`;
    const textarea = el("code-text") as HTMLTextAreaElement;
    textarea.value = code.text;
    const gutter = el("gutter");
    const renumber = () => {
      const n = Math.max(lineCount(textarea.value), 1);
      gutter.textContent = Array.from({ length: n }, (_, i) =>
        String(i + 1)).join("\n");
    };
    renumber();
    textarea.addEventListener("input", () => {
      onDirty(textarea.value !== code.text);
      renumber();
    });

    const errorsBox = el("editor-errors");
    const renderReport = (report: {
      ok: boolean;
      errors: { code: string; line: number; col: number; message: string; hint: string }[];
      checks: { name: string; passed: boolean }[];
    }) => {
      if (report.ok) {
        errorsBox.innerHTML = `<div class="ok">all checks passed</div>`;
        return;
      }
      const markers = markersFor(code.span.start_line,
        Math.max(lineCount(textarea.value), 1), report.errors);
      errorsBox.innerHTML =
        markers.map((m) => `<div class="error">line ${m.editorLine},
          col ${m.col}: ${esc(m.code)} ${esc(m.message)}
          ${m.hint ? `<div class="hint">hint: ${esc(m.hint)}</div>` : ""}</div>`)
          .join("") +
        report.checks.filter((c) => !c.passed).map((c) =>
          `<div class="error">check failed: ${esc(c.name)}</div>`).join("");
    };

    el("btn-validate").addEventListener("click", async () => {
      try {
        renderReport(await api.validateModule(model, moduleId, textarea.value));
      } catch (err) {
        showError(errorsBox, err);
      }
    });
    el("btn-save").addEventListener("click", async () => {
      try {
        await api.patchModule(model, moduleId, textarea.value, baseVersion);
        onDirty(false);
        window.dispatchEvent(new CustomEvent("darkit:refresh"));
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          errorsBox.innerHTML = `<div class="error">version conflict —
            reload the tree and reapply your edit</div>`;
        } else {
          showError(errorsBox, err);
        }
      }
    });
  } catch (err) {
    showError(pane, err);
  }
}

// ── flow designer ────────────────────────────────────────────────────

export function renderFlows(api: Api, root: HTMLElement): void {
  const flow = new FlowModel();
  root.innerHTML = `<h2>Flow designer</h2>
    <div>palette: ${PALETTE.map((p) =>
      `<button data-kind="${p.kind}">${p.kind}</button>`).join(" ")}</div>
    <div id="flow-nodes"></div>
    <div>edge: <input id="edge-from" placeholder="from id" size="8">
      → <input id="edge-to" placeholder="to id" size="8">
      <button id="btn-edge">connect</button></div>
    <button id="btn-flow-validate">Validate</button>
    <button id="btn-flow-compile" disabled>Compile</button>
    <div id="flow-status"></div><pre id="flow-source"></pre>`;
  const nodesBox = el("flow-nodes");
  const status = el("flow-status");
  const compileBtn = el("btn-flow-compile") as HTMLButtonElement;

  const redraw = (badges: Record<string, string> = {}) => {
    nodesBox.innerHTML = flow.nodes.map((n) =>
      `<div class="flow-node">${esc(n.id)} <b>${esc(n.kind)}</b>
        ${Object.keys(n.params).map((p) =>
          `${p}=<input size="4" data-node="${esc(n.id)}" data-param="${p}"
            value="${n.params[p]}">`).join(" ")}
        ${badges[n.id] ? `<span class="badge">${esc(badges[n.id])}</span>` : ""}
      </div>`).join("");
    nodesBox.querySelectorAll("input[data-node]").forEach((input) => {
      input.addEventListener("change", () => {
        const target = input as HTMLInputElement;
        const node = flow.nodes.find((n) => n.id === target.dataset.node);
        if (node) node.params[target.dataset.param!] = Number(target.value);
        compileBtn.disabled = true;
      });
    });
  };

  root.querySelectorAll("button[data-kind]").forEach((btn) => {
    btn.addEventListener("click", () => {
      flow.addNode((btn as HTMLElement).dataset.kind!);
      compileBtn.disabled = true;
      redraw();
    });
  });
  el("btn-edge").addEventListener("click", () => {
    try {
      flow.connect((el("edge-from") as HTMLInputElement).value,
        (el("edge-to") as HTMLInputElement).value);
      compileBtn.disabled = true;
      status.innerHTML = `<div class="muted">${flow.edges.length} edges</div>`;
    } catch (err) {
      showError(status, err);
    }
  });
  el("btn-flow-validate").addEventListener("click", async () => {
    try {
      const result = await api.validateFlow(flow.toDoc());
      if (result.valid) {
        const { shapes } = await api.flowShapes(flow.toDoc());
        const badges: Record<string, string> = {};
        for (const id of Object.keys(shapes)) {
          badges[id] = `[${shapes[id].join(",")}]`;
        }
        redraw(badges);
        status.innerHTML = `<div class="ok">valid</div>`;
        compileBtn.disabled = false;
      } else {
        const badges: Record<string, string> = {};
        for (const v of result.violations) {
          badges[v.locus] = v.code;
        }
        redraw(badges);
        status.innerHTML = result.violations.map((v) =>
          `<div class="error">${esc(v.code)} @ ${esc(v.locus)}:
            ${esc(v.message)}</div>`).join("");
        compileBtn.disabled = true;
      }
    } catch (err) {
      showError(status, err);
    }
  });
  compileBtn.addEventListener("click", async () => {
    try {
      const { source } = await api.compileFlow(flow.toDoc());
      el("flow-source").textContent = source;
    } catch (err) {
      showError(status, err);
    }
  });
}

// ── command builder ──────────────────────────────────────────────────

export async function renderCommands(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `<h2>Command builder</h2><div id="cmd-body">loading…</div>`;
  const body = el("cmd-body");
  try {
    const [models, datasets, tokenizers] = await Promise.all([
      api.listRegistry("model"), api.listRegistry("dataset"),
      api.listRegistry("tokenizer")]);
    const options = (entries: { name: string }[]) =>
      entries.map((e) => `<option>${esc(e.name)}</option>`).join("");
    body.innerHTML = `
      <div>model <select id="cmd-model">${options(models.entries)}</select>
        dataset <select id="cmd-dataset">${options(datasets.entries)}</select>
        tokenizer <select id="cmd-tokenizer">${options(tokenizers.entries)}</select>
        mode <select id="cmd-mode"><option>train</option><option>test</option></select>
      </div>
      <div id="cmd-params"></div>
      <button id="btn-render">Render</button>
      <div id="cmd-out"></div>
      <h3>Grid</h3>
      <div>axes (one per line, <code>name=v1,v2</code>):
        <textarea id="grid-axes" rows="3" cols="40"></textarea></div>
      <div id="grid-count" class="muted"></div>
      <button id="btn-grid">Generate</button>
      <pre id="grid-out"></pre>`;
    const schemaOf = (): ParamSpecDoc[] => {
      const name = (el("cmd-model") as HTMLSelectElement).value;
      const entry = models.entries.find((e) => e.name === name);
      return entry?.params_schema ?? [];
    };
    const renderForm = () => {
      el("cmd-params").innerHTML = formFields(schemaOf()).map((f) => {
        if (f.widget === "select") {
          return `<label>${esc(f.name)} <select data-param="${esc(f.name)}">
            <option value=""></option>
            ${(f.choices ?? []).map((c) => `<option>${esc(c)}</option>`).join("")}
          </select></label>`;
        }
        if (f.widget === "checkbox") {
          return `<label>${esc(f.name)}
            <input type="checkbox" data-param="${esc(f.name)}"></label>`;
        }
        return `<label>${esc(f.name)} <input data-param="${esc(f.name)}"
          placeholder="${esc(f.placeholder)}" size="12"></label>`;
      }).join(" ");
    };
    renderForm();
    el("cmd-model").addEventListener("change", renderForm);
    el("btn-render").addEventListener("click", async () => {
      const raw: Record<string, string | boolean> = {};
      el("cmd-params").querySelectorAll("[data-param]").forEach((input) => {
        const node = input as HTMLInputElement | HTMLSelectElement;
        raw[node.dataset.param!] = node instanceof HTMLInputElement &&
          node.type === "checkbox" ? node.checked : node.value;
      });
      const out = el("cmd-out");
      try {
        const { command } = await api.renderCommand({
          model: (el("cmd-model") as HTMLSelectElement).value,
          dataset: (el("cmd-dataset") as HTMLSelectElement).value,
          tokenizer: (el("cmd-tokenizer") as HTMLSelectElement).value,
          mode: (el("cmd-mode") as HTMLSelectElement).value,
          values: valuesFromForm(schemaOf(), raw),
        });
        out.innerHTML = `<code id="cmd-line">${esc(command)}</code>
          <button id="btn-copy">copy</button>`;
        el("btn-copy").addEventListener("click", () =>
          navigator.clipboard.writeText(command));
      } catch (err) {
        showError(out, err);
      }
    });

    const parseAxes = () =>
      (el("grid-axes") as HTMLTextAreaElement).value.split("\n")
        .map((line) => line.trim()).filter((line) => line.includes("="))
        .map((line) => {
          const [param, raw] = line.split("=", 2);
          return {
            param: param.trim(),
            values: raw.split(",").map((v) => {
              const n = Number(v);
              return Number.isFinite(n) && v.trim() !== "" ? n : v.trim();
            }),
          };
        });
    el("grid-axes").addEventListener("input", () => {
      const axes = parseAxes();
      el("grid-count").textContent =
        axes.length ? `${gridCount(axes)} commands` : "";
    });
    el("btn-grid").addEventListener("click", async () => {
      const out = el("grid-out");
      try {
        const result = await api.expandGrid({
          base: {
            model: (el("cmd-model") as HTMLSelectElement).value,
            dataset: (el("cmd-dataset") as HTMLSelectElement).value,
            tokenizer: (el("cmd-tokenizer") as HTMLSelectElement).value,
            mode: (el("cmd-mode") as HTMLSelectElement).value,
          },
          axes: parseAxes(),
        });
        out.textContent = result.commands.join("\n");
      } catch (err) {
        showError(out, err);
      }
    });
  } catch (err) {
    showError(body, err);
  }
}

// ── run dashboard ────────────────────────────────────────────────────

export async function renderRuns(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `<h2>Runs</h2>
    <div>steps <input id="synth-steps" value="100" size="5">
      <button id="btn-synth">start synthetic run</button></div>
    <div id="run-list">loading…</div>
    <button id="btn-compare">compare selected</button>
    <canvas id="run-chart" width="640" height="300"></canvas>
    <div id="run-status"></div>`;
  const list = el("run-list");
  const canvas = el("run-chart") as HTMLCanvasElement;
  const status = el("run-status");

  const refresh = async () => {
    const { runs } = await api.listRuns();
    list.innerHTML = `<table><tr><th></th><th>run</th><th>model</th>
      <th>status</th><th></th></tr>` +
      runs.map((r) => `<tr>
        <td><input type="checkbox" data-run="${esc(r.run_id)}"></td>
        <td><code>${esc(r.run_id)}</code></td><td>${esc(r.model)}</td>
        <td>${esc(r.status)}</td>
        <td><a href="${api.exportUrl(r.run_id, "csv")}">csv</a>
          <a href="${api.exportUrl(r.run_id, "json")}">json</a></td>
      </tr>`).join("") + "</table>";
  };
  await refresh().catch((err) => showError(list, err));

  el("btn-synth").addEventListener("click", async () => {
    try {
      const steps = parseInt((el("synth-steps") as HTMLInputElement).value, 10);
      const run = await api.createSyntheticRun("tiny-spike-gpt", steps);
      await refresh();
      // live chart: subscribe and grow the series as events arrive
      const points: SeriesPoint[] = [];
      const onEvent = (event: RunEvent) => {
        if (event.type === "metric" && typeof event.step === "number" &&
            typeof event.value === "number") {
          points.push({ step: event.step, value: event.value });
          drawChart(canvas, [{ label: run.run_id, points }]);
        }
      };
      await streamRun(api.streamUrl(run.run_id), {
        onEvent,
        onEnd: () => refresh(),
        onGap: async (lastStep) => {
          const series = await api.runSeries(run.run_id, "loss", 10000);
          for (const p of series.points) {
            if (p.step > lastStep) points.push(p);
          }
          drawChart(canvas, [{ label: run.run_id, points }]);
        },
      });
      if (points.length === 0) {
        // completed before we subscribed: fall back to the stored series
        const series = await api.runSeries(run.run_id, "loss", 10000);
        drawChart(canvas, [{ label: run.run_id, points: series.points }]);
      }
    } catch (err) {
      showError(status, err);
    }
  });

  el("btn-compare").addEventListener("click", async () => {
    const ids: string[] = [];
    list.querySelectorAll("input[data-run]:checked").forEach((box) =>
      ids.push((box as HTMLElement).dataset.run!));
    try {
      const chart = await api.compareRuns(ids, "loss", 200);
      drawChart(canvas, chart.runs.filter((r) => !r.missing).map((r) =>
        ({ label: r.id, points: r.points })));
      status.innerHTML = chart.runs.filter((r) => r.missing).map((r) =>
        `<div class="error">missing run ${esc(r.id)}</div>`).join("");
    } catch (err) {
      showError(status, err);
    }
  });
}
