"""Render figures from a run directory's CSV artifacts.

The renderer never recomputes posterior statistics: the overlay and band plots
draw the columns of summary.csv verbatim, and the corner grid only bins the
per-node sample traces stored in marginals.csv (fixed 40x40 bins). Styling is
fixed and output metadata carries no timestamps, so re-rendering the same
inputs reproduces identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "fracfigs"

FIGURE_KINDS = ("overlay", "ci_band", "corner")
CORNER_BINS = 40

SUMMARY_COLUMNS = ["x", "truth", "posterior_mean", "ci_lower", "ci_upper"]
MARGINAL_COLUMNS = ["index", "sample_id", "value"]


class SchemaError(ValueError):
    """An input file is missing or does not match the documented schema."""


@dataclass(frozen=True)
class FigureJob:
    """One rendering request over a single run directory."""

    input_dir: str | Path
    figure_kinds: tuple[str, ...] = FIGURE_KINDS
    out_format: str = "png"
    output_dir: str | Path | None = None  # defaults to input_dir

    def __post_init__(self):
        bad = [k for k in self.figure_kinds if k not in FIGURE_KINDS]
        if bad:
            raise SchemaError(f"unknown figure kinds {bad}; choose from {FIGURE_KINDS}")
        if not self.figure_kinds:
            raise SchemaError("no figure kinds requested")


def _read_csv(path: Path, expected_columns) -> dict[str, np.ndarray]:
    if not path.exists():
        raise SchemaError(f"missing input file {path}")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        if header != expected_columns:
            raise SchemaError(
                f"{path} has columns {header}, expected {expected_columns}"
            )
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path} holds no data rows")
    try:
        data = np.array(rows, dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path} holds non-numeric cells: {exc}") from None
    return {name: data[:, i] for i, name in enumerate(expected_columns)}


def _load_meta(input_dir: Path) -> dict:
    path = input_dir / "run_meta.json"
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError:
        return {}


def _run_label(meta: dict) -> str:
    config = meta.get("config", {})
    if not config:
        return ""
    prior = config.get("prior", "?")
    if prior == "GFTG":
        return f"GFTG psi={config.get('psi', '?')} alpha={config.get('alpha', '?')}"
    return f"{prior} psi={config.get('psi', '?')}"


def build_overlay(summary: dict[str, np.ndarray], label: str = ""):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(summary["x"], summary["truth"], "k--", lw=1.4, label="truth")
    ax.plot(summary["x"], summary["posterior_mean"], "b-", lw=1.4, label="posterior mean")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    if label:
        ax.set_title(label)
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def build_ci_band(summary: dict[str, np.ndarray], label: str = ""):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.fill_between(
        summary["x"], summary["ci_lower"], summary["ci_upper"],
        color="tab:blue", alpha=0.3, linewidth=0, label="95% CI",
    )
    ax.plot(summary["x"], summary["truth"], "k--", lw=1.4, label="truth")
    ax.plot(summary["x"], summary["posterior_mean"], "b-", lw=1.2, label="posterior mean")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    if label:
        ax.set_title(label)
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def _traces(marginal: dict[str, np.ndarray]) -> dict[int, np.ndarray]:
    indices = marginal["index"].astype(int)
    traces = {}
    for idx in sorted(set(indices.tolist())):
        sel = indices == idx
        order = np.argsort(marginal["sample_id"][sel], kind="stable")
        traces[idx] = marginal["value"][sel][order]
    lengths = {len(v) for v in traces.values()}
    if len(lengths) != 1:
        raise SchemaError("marginal traces have unequal lengths")
    return traces


def build_corner(marginal: dict[str, np.ndarray], label: str = ""):
    """Lower-triangular grid: 1-D histograms on the diagonal, pairwise 2-D
    histograms below it; k(k+1)/2 populated panels for k tracked nodes."""
    traces = _traces(marginal)
    indices = list(traces)
    k = len(indices)
    fig, axes = plt.subplots(k, k, figsize=(2.1 * k, 2.1 * k), squeeze=False)
    for row in range(k):
        for col in range(k):
            ax = axes[row][col]
            if col > row:
                ax.set_visible(False)
                continue
            if col == row:
                ax.hist(traces[indices[row]], bins=CORNER_BINS, density=True,
                        color="tab:blue")
            else:
                ax.hist2d(traces[indices[col]], traces[indices[row]],
                          bins=CORNER_BINS, cmap="Blues")
            if row == k - 1:
                ax.set_xlabel(f"node {indices[col]}")
            else:
                ax.set_xticklabels([])
            if col == 0 and row > 0:
                ax.set_ylabel(f"node {indices[row]}")
            elif col != row:
                ax.set_yticklabels([])
    if label:
        fig.suptitle(label)
    fig.tight_layout()
    return fig


def _save(fig, path: Path, out_format: str):
    # strip per-run metadata so identical inputs give identical bytes
    metadata = {}
    if out_format == "png":
        metadata = {"Software": "fracfigs"}
    elif out_format == "pdf":
        metadata = {"CreationDate": None, "Producer": "fracfigs", "Creator": "fracfigs"}
    elif out_format == "svg":
        metadata = {"Date": None}
    fig.savefig(path, format=out_format, metadata=metadata)
    plt.close(fig)


def render(job: FigureJob) -> list[Path]:
    """Render the requested figure kinds; returns the written file paths."""
    input_dir = Path(job.input_dir)
    output_dir = Path(job.output_dir) if job.output_dir is not None else input_dir
    output_dir.mkdir(parents=True, exist_ok=True)
    label = _run_label(_load_meta(input_dir))

    needs_summary = bool({"overlay", "ci_band"} & set(job.figure_kinds))
    summary = _read_csv(input_dir / "summary.csv", SUMMARY_COLUMNS) if needs_summary else None
    marginal = (
        _read_csv(input_dir / "marginals.csv", MARGINAL_COLUMNS)
        if "corner" in job.figure_kinds
        else None
    )

    written = []
    for kind in job.figure_kinds:
        if kind == "overlay":
            fig = build_overlay(summary, label)
        elif kind == "ci_band":
            fig = build_ci_band(summary, label)
        else:
            fig = build_corner(marginal, label)
        path = output_dir / f"{kind}.{job.out_format}"
        _save(fig, path, job.out_format)
        written.append(path)
    return written
