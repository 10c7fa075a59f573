from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("fig3", "scatter", "scaling")


class SchemaError(ValueError):
    """CSV is missing, mistagged, or lacks the columns the figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    """One rendering job: which CSV, which figure kind, where to write."""

    input: str
    kind: str
    output: str
    true_value: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"figure kind must be one of {KINDS}, got {self.kind!r}")


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Parse a CLI CSV into (metadata, header, rows).

    Metadata lines are ``# key=value`` comments ahead of the header.
    """
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    data_lines = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            meta[key] = value
        elif line.strip():
            data_lines.append(line)
    for record in csv.reader(data_lines):
        if header is None:
            header = record
        else:
            rows.append(record)
    if header is None:
        raise SchemaError(f"{path} has no header row")
    return meta, header, rows


def _column(header, rows, name) -> np.ndarray:
    try:
        idx = header.index(name)
    except ValueError as exc:
        raise SchemaError(f"missing column {name!r} (have {header})") from exc
    return np.array([float(r[idx]) for r in rows])


def _check_schema(meta, path, kind):
    tag = meta.get("schema")
    if tag != kind:
        raise SchemaError(f"{path} is tagged schema={tag!r}, refusing to render as {kind!r}")


def _render_fig3(header, rows, ax):
    xi = _column(header, rows, "xi")
    order = _column(header, rows, "order")
    ax.step(xi, order, where="post", color="tab:blue")
    ax.set_xlabel(r"noise resistance $\xi$")
    ax.set_ylabel("truncation order K")
    ax.set_ylim(0, order.max() if order.size else 1)
    return {"order": len(order)}


def _render_scatter(header, rows, ax, true_value, epsilon):
    trial = _column(header, rows, "trial")
    series = {}
    noisy = _column(header, rows, "noisy")
    ax.plot(trial, noisy, "^", color="tab:blue", markersize=4, label="noisy")
    series["noisy"] = len(noisy)
    if "mitigated" in header:
        mitigated = _column(header, rows, "mitigated")
        ax.plot(trial, mitigated, "o", color="tab:red", markersize=4, label="mitigated")
        series["mitigated"] = len(mitigated)
    else:
        warnings.warn("scatter CSV has no mitigated column; rendering the noisy series only")
    if true_value is not None:
        ax.axhline(true_value, color="black", linewidth=1, label="true value")
        if epsilon is not None:
            ax.axhspan(
                true_value - 2 * epsilon,
                true_value + 2 * epsilon,
                color="gray",
                alpha=0.2,
                label=r"$\pm 2\varepsilon$",
            )
    ax.set_xlabel("trial")
    ax.set_ylabel("estimate")
    ax.legend(loc="best", fontsize=8)
    return series


def _render_scaling(header, rows, ax, true_value):
    qubits = _column(header, rows, "qubits")
    series = {}
    for name, marker, color in (("noisy", "^", "tab:blue"), ("mitigated", "o", "tab:red")):
        mean = _column(header, rows, f"{name}_mean")
        err = _column(header, rows, f"{name}_stderr")
        ax.errorbar(
            qubits, mean, yerr=err, fmt=marker, color=color, markersize=5,
            capsize=3, label=name,
        )
        series[name] = len(mean)
    if true_value is None and "true_value" in header:
        true_value = float(_column(header, rows, "true_value")[0])
    if true_value is not None:
        ax.axhline(true_value, color="black", linewidth=1, label="true value")
    ax.set_xlabel("qubit count n")
    ax.set_ylabel("average estimate")
    ax.legend(loc="best", fontsize=8)
    return series


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns the plotted point count per series.

    Pure with respect to the CSV: identical input produces identical
    plotted data.
    """
    meta, header, rows = read_table(spec.input)
    _check_schema(meta, spec.input, spec.kind)
    true_value = spec.true_value
    if true_value is None and "true_value" in meta:
        true_value = float(meta["true_value"])
    epsilon = spec.epsilon
    if epsilon is None and "epsilon" in meta:
        epsilon = float(meta["epsilon"])

    fig, ax = plt.subplots(figsize=(6, 4), dpi=120)
    try:
        if spec.kind == "fig3":
            series = _render_fig3(header, rows, ax)
        elif spec.kind == "scatter":
            series = _render_scatter(header, rows, ax, true_value, epsilon)
        else:
            series = _render_scaling(header, rows, ax, true_value)
        fig.tight_layout()
        out = Path(spec.output)
        if out.parent != Path("."):
            out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    finally:
        plt.close(fig)
    return {"kind": spec.kind, "output": str(spec.output), "series": series}
