"""Evaluation report output: per-item JSONL, summary JSON and a figure.

Given a prefix P the writer produces P.items.jsonl, P.summary.json and
P.png. All three are byte-deterministic for identical inputs.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .grading import FAILURE, SUCCESS, UNPARSEABLE, EvalReport
from .llm import ChatResponse

_VERDICT_ORDER = (SUCCESS, FAILURE, UNPARSEABLE)
_VERDICT_COLORS = {SUCCESS: "#2a9d4e", FAILURE: "#d1493f", UNPARSEABLE: "#b9b9b9"}


def report_paths(prefix: str | Path) -> dict[str, Path]:
    prefix = Path(prefix)
    return {
        "items": prefix.with_name(prefix.name + ".items.jsonl"),
        "summary": prefix.with_name(prefix.name + ".summary.json"),
        "figure": prefix.with_name(prefix.name + ".png"),
    }


def write_report(
    report: EvalReport,
    prefix: str | Path,
    responses: list[ChatResponse] | None = None,
) -> dict[str, Path]:
    paths = report_paths(prefix)
    paths["items"].parent.mkdir(parents=True, exist_ok=True)

    with paths["items"].open("w", encoding="utf-8") as fp:
        for i, result in enumerate(report.results):
            row = asdict(result)
            if responses is not None:
                row["response"] = responses[i].text
            fp.write(json.dumps(row, ensure_ascii=False) + "\n")

    summary = {
        "dataset_id": report.dataset_id,
        "items": len(report.results),
        "success_rate": report.success_rate,
        "counts": {v: report.counts.get(v, 0) for v in _VERDICT_ORDER},
    }
    paths["summary"].write_text(
        json.dumps(summary, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    render_report_figure(report, paths["figure"])
    return paths


def render_report_figure(report: EvalReport, path: str | Path) -> None:
    counts = [report.counts.get(v, 0) for v in _VERDICT_ORDER]
    fig, ax = plt.subplots(figsize=(5.0, 3.2), dpi=120)
    bars = ax.bar(
        _VERDICT_ORDER, counts, color=[_VERDICT_COLORS[v] for v in _VERDICT_ORDER]
    )
    ax.bar_label(bars, padding=2)
    ax.set_ylabel("items")
    ax.set_title(
        f"{report.dataset_id}: success rate {report.success_rate:.3f} "
        f"(n={len(report.results)})"
    )
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.margins(y=0.15)
    fig.tight_layout()
    # Fixed metadata keeps the PNG byte-identical across runs.
    fig.savefig(path, format="png", metadata={"Software": "osmag-bench"})
    plt.close(fig)
