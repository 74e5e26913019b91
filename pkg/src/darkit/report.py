"""Chart rendering for run metrics.

Renders single-run and comparative metric charts to image files with
matplotlib, so the CLI's report path can drop a figure next to the
delimited export.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_series_figure(series: dict, out_path: str) -> str:
    """Plot one downsampled metric series to out_path (format by suffix)."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    steps = [p["step"] for p in series["points"]]
    values = [p["value"] for p in series["points"]]
    ax.plot(steps, values, marker="o", markersize=3, linewidth=1.2)
    ax.set_xlabel("step")
    ax.set_ylabel(series["name"])
    ax.set_title(f"{series['name']} — run {series['run']}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_compare_figure(chart: dict, out_path: str) -> str:
    """Plot a compare_runs chart document: one line per run."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for run in chart["runs"]:
        if run.get("missing"):
            continue
        steps = [p["step"] for p in run["points"]]
        values = [p["value"] for p in run["points"]]
        ax.plot(steps, values, linewidth=1.2, label=run["id"])
    ax.set_xlabel("step")
    ax.set_ylabel(chart["metric"])
    ax.set_title(f"{chart['metric']} across {len(chart['runs'])} runs")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
