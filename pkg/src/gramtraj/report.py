"""Evaluation report rendering: JSON, text table, CSV, and figures.

`write_report` drops four kinds of artifact into an output directory:

  report.json      canonical machine-readable report (deterministic bytes)
  report.txt       human-readable summary, including wall-clock timings
  timings.json     volatile per-stage timings, kept out of report.json
  confusion.csv    confusion matrix, rows = true class (optional)
  confusion_matrix.png / accuracy_vs_k.png   rendered figures

Figures use the Agg backend so report generation works headless.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from gramtraj.evaluation import EvalReport


def report_json_bytes(report: EvalReport) -> bytes:
    """Canonical report serialization (no volatile fields)."""
    payload = json.dumps(report.to_dict(include_timings=False), sort_keys=True, separators=(",", ":"))
    return (payload + "\n").encode("utf-8")


def confusion_csv_bytes(report: EvalReport) -> bytes:
    lines = ["true\\predicted," + ",".join(report.classes)]
    for i, cls in enumerate(report.classes):
        lines.append(cls + "," + ",".join(str(int(v)) for v in report.confusion[i]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def format_text_report(report: EvalReport) -> str:
    lines = []
    lines.append("gramtraj evaluation report")
    lines.append("=" * 38)
    lines.append(f"protocol          {report.protocol['kind']}"
                 + (f" (folds={report.protocol['folds']})" if report.protocol["kind"] == "kfold" else ""))
    lines.append(f"classifier        {report.classifier}")
    lines.append(f"samples           {report.n_samples}")
    lines.append(f"classes           {', '.join(report.classes)}")
    lines.append(f"seed              {report.seed}")
    lines.append("")
    lines.append(f"accuracy          {100.0 * report.mean_accuracy:.2f}% +/- {100.0 * report.std_accuracy:.2f}%")
    lines.append(f"folds             {len(report.per_fold_accuracy)}")
    for part, values in sorted(report.chosen_spd_weight.items()):
        uniq = sorted(set(values))
        shown = f"{uniq[0]:g}" if len(uniq) == 1 else ", ".join(f"{v:g}" for v in uniq)
        lines.append(f"spd weight [{part}]  {shown}")
    lines.append("")
    lines.append("confusion matrix (rows = true class)")
    width = max(len(c) for c in report.classes) + 2
    header = " " * width + " ".join(f"{c:>{width}}" for c in report.classes)
    lines.append(header)
    for i, cls in enumerate(report.classes):
        row = f"{cls:>{width}}" + " ".join(f"{int(v):>{width}}" for v in report.confusion[i])
        lines.append(row)
    if report.timings:
        lines.append("")
        lines.append("stage timings (wall-clock seconds)")
        for stage, secs in report.timings.items():
            lines.append(f"  {stage:<26} {secs:9.3f}")
    return "\n".join(lines) + "\n"


def render_confusion_figure(report: EvalReport, path) -> None:
    k = len(report.classes)
    counts = report.confusion.astype(float)
    totals = counts.sum(axis=1, keepdims=True)
    rates = np.divide(counts, np.maximum(totals, 1.0))
    fig, ax = plt.subplots(figsize=(1.0 + 0.8 * k, 0.8 + 0.8 * k))
    im = ax.imshow(rates, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(k), report.classes, rotation=45, ha="right")
    ax.set_yticks(range(k), report.classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(k):
        for j in range(k):
            if counts[i, j] > 0:
                color = "white" if rates[i, j] > 0.5 else "black"
                ax.text(j, i, int(counts[i, j]), ha="center", va="center", color=color, fontsize=9)
    fig.colorbar(im, ax=ax, fraction=0.046)
    ax.set_title(f"accuracy {100.0 * report.mean_accuracy:.1f}%")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_grid_figure(report: EvalReport, path) -> bool:
    """Inner-CV accuracy versus SPD weight, one curve per part.

    Returns False (writing nothing) when the run used a fixed weight.
    """
    if not report.grid_accuracy:
        return False
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for part, scores in sorted(report.grid_accuracy.items()):
        ks = sorted(scores, key=float)
        ax.plot([float(k) for k in ks], [100.0 * scores[k] for k in ks], marker="o", markersize=3, label=part)
    ax.set_xlabel("SPD weight")
    ax.set_ylabel("inner-CV accuracy (%)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return True


def write_report(report: EvalReport, out_dir, *, confusion_csv: bool = True, figures: bool = True) -> dict:
    """Write all report artifacts; returns {artifact name: path}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    (out / "report.json").write_bytes(report_json_bytes(report))
    written["report_json"] = out / "report.json"

    (out / "report.txt").write_text(format_text_report(report), encoding="utf-8")
    written["report_txt"] = out / "report.txt"

    timings = json.dumps(report.timings, sort_keys=True, indent=2)
    (out / "timings.json").write_text(timings + "\n", encoding="utf-8")
    written["timings_json"] = out / "timings.json"

    if confusion_csv:
        (out / "confusion.csv").write_bytes(confusion_csv_bytes(report))
        written["confusion_csv"] = out / "confusion.csv"

    if figures:
        render_confusion_figure(report, out / "confusion_matrix.png")
        written["confusion_png"] = out / "confusion_matrix.png"
        if render_grid_figure(report, out / "accuracy_vs_k.png"):
            written["grid_png"] = out / "accuracy_vs_k.png"
    return written
