"""Report rendering: delimited output plus matplotlib figures.

Every evaluation command can point at a report directory; it receives
the JSON report, a per-image CSV, and PNG figures (PSNR per image, the
fitted tone curves, rank-error saturation for basis builds).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .basis import CurveBasis
from .evaluate import EvalReport, report_to_json


def _csv_value(v: float) -> str:
    if v is None:
        return ""
    return "inf" if math.isinf(v) else f"{v:.6f}"


def write_per_image_csv(report: EvalReport, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["input", "gt", *report.metrics])
        for o in report.outcomes:
            writer.writerow(
                [o.input_path, o.gt_path, *(_csv_value(o.psnrs[m]) for m in report.metrics)]
            )


def _finite_or_cap(values):
    finite = [v for v in values if math.isfinite(v)]
    cap = (max(finite) if finite else 0.0) + 5.0
    return [v if math.isfinite(v) else cap for v in values], cap


def save_psnr_figure(report: EvalReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    x = range(len(report.outcomes))
    for metric in report.metrics:
        values = [o.psnrs[metric] for o in report.outcomes]
        plotted, cap = _finite_or_cap(values)
        ax.plot(x, plotted, marker="o", markersize=3, linewidth=1, label=metric)
    ax.set_xlabel("pair index")
    ax.set_ylabel("PSNR (dB)")
    title = f"{report.dataset} ({report.kind})"
    if report.style:
        title += f" style={report.style}"
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_curves_figure(curves, path: Path, title: str = "fitted tone curves",
                       max_curves: int = 12) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    shown = list(curves)[:max_curves]
    for curve in shown:
        ax.plot(range(256), curve, linewidth=1, alpha=0.8)
    ax.plot([0, 255], [0, 255], "k--", linewidth=0.8, alpha=0.5)
    ax.set_xlim(0, 255)
    ax.set_ylim(0, 255)
    ax.set_xlabel("input intensity")
    ax.set_ylabel("output intensity")
    ax.set_title(f"{title} (first {len(shown)})")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_rank_error_figure(points, path: Path) -> None:
    ms = [m for m, _ in points]
    errs = [e for _, e in points]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ms, errs, marker="o")
    ax.set_xlabel("component count")
    ax.set_ylabel("mean reconstruction RMSE")
    ax.set_title("rank-error saturation")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_basis_figure(b: CurveBasis, path: Path, max_vectors: int = 6) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for j in range(min(b.m, max_vectors)):
        ax.plot(range(256), b.vectors[:, j], linewidth=1, label=f"u{j + 1}")
    ax.set_xlabel("intensity index")
    ax.set_ylabel("basis value")
    ax.set_title("leading basis curves")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_eval_report(report: EvalReport, out_dir, no_meta: bool = False) -> list[Path]:
    """Write JSON + CSV + figures for one evaluation; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(report_to_json(report, no_meta=no_meta), indent=2) + "\n")
    written.append(json_path)
    csv_path = out_dir / "per_image.csv"
    write_per_image_csv(report, csv_path)
    written.append(csv_path)
    psnr_path = out_dir / "psnr.png"
    save_psnr_figure(report, psnr_path)
    written.append(psnr_path)
    curves = [o.curve for o in report.outcomes if o.curve is not None]
    if curves:
        curves_path = out_dir / "tone_curves.png"
        save_curves_figure(curves, curves_path)
        written.append(curves_path)
    return written


def write_rank_error_report(points, out_dir, basis: CurveBasis | None = None) -> list[Path]:
    """Write rank-error CSV + figure (and basis curves when provided)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out_dir / "rank_error.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "mean_rmse"])
        for m, err in points:
            writer.writerow([m, f"{err:.9f}"])
    written.append(csv_path)
    fig_path = out_dir / "rank_error.png"
    save_rank_error_figure(points, fig_path)
    written.append(fig_path)
    if basis is not None:
        basis_path = out_dir / "basis_curves.png"
        save_basis_figure(basis, basis_path)
        written.append(basis_path)
    return written
