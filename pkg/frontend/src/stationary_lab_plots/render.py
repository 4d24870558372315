"""Render figures from stationary-lab CSV files.

Three plot kinds, selected by the state-count dimensionality of the input:

line             two-type chains: stacked panels of transitions (optional),
                 relative entropy, and the chosen value column against the
                 first type's count
ternary-heatmap  three-type state spaces: barycentric heatmap of a value
                 column, optionally omitting the boundary
face-heatmap     four-type state spaces: ternary heatmap of one boundary
                 face (a chosen coordinate pinned at zero)

The renderer is strictly read-only over the CSV: values are plotted as
written, never recomputed.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass
from typing import Optional

import click
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402
from matplotlib.tri import Triangulation  # noqa: E402

PLOT_KINDS = ("line", "ternary-heatmap", "face-heatmap")


class PlotInputError(ValueError):
    """Malformed CSV or a plot spec inconsistent with it."""


@dataclass(frozen=True)
class PlotSpec:
    input_path: str
    value: str = "stationary"
    kind: str = "ternary-heatmap"
    out: str = "figure.png"
    face: Optional[int] = None
    transitions: Optional[str] = None
    omit_boundary: bool = False
    log_scale: bool = False

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise PlotInputError(f"unknown plot kind {self.kind!r}; expected {PLOT_KINDS}")


@dataclass
class Table:
    header: list
    counts: np.ndarray
    columns: dict

    @property
    def n(self) -> int:
        return self.counts.shape[1]


def read_table(path: str) -> Table:
    """Parse a per-state CSV: leading a1..an count columns, then values."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotInputError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    count_cols = []
    for name in header:
        if name == f"a{len(count_cols) + 1}":
            count_cols.append(name)
        else:
            break
    if not count_cols:
        raise PlotInputError(f"{path} has no leading a1..an count columns: {header}")
    n = len(count_cols)
    counts = np.array([[int(r[i]) for i in range(n)] for r in rows], dtype=np.int64)
    columns = {}
    for j, name in enumerate(header[n:], start=n):
        vals = np.full(len(rows), np.nan)
        for i, r in enumerate(rows):
            cell = r[j]
            if cell != "" and not _is_label(cell):
                vals[i] = float(cell)
        columns[name] = vals
    return Table(header=header, counts=counts, columns=columns)


def _is_label(cell: str) -> bool:
    try:
        float(cell)
        return False
    except ValueError:
        return True


def _value_column(table: Table, name: str) -> np.ndarray:
    if name not in table.columns:
        raise PlotInputError(
            f"value column {name!r} not in CSV header {table.header}"
        )
    return table.columns[name]


def _norm(values: np.ndarray, log_scale: bool):
    finite = values[np.isfinite(values)]
    if log_scale:
        positive = finite[finite > 0]
        if positive.size == 0:
            raise PlotInputError("log scale requested but no positive values")
        return LogNorm(vmin=positive.min(), vmax=positive.max())
    return None


# ---------------------------------------------------------------------------
# plot kinds
# ---------------------------------------------------------------------------

_SQRT3_2 = math.sqrt(3.0) / 2.0


def _barycentric_xy(counts: np.ndarray) -> np.ndarray:
    """Project three-type counts onto the plane triangle."""
    share = counts / counts.sum(axis=1, keepdims=True)
    x = share[:, 1] + 0.5 * share[:, 2]
    y = _SQRT3_2 * share[:, 2]
    return np.stack([x, y], axis=1)


def _render_ternary(ax, counts, values, spec: PlotSpec):
    mask = np.isfinite(values)
    if spec.omit_boundary:
        mask &= (counts > 0).all(axis=1)
    if spec.log_scale:
        mask &= values > 0
    counts, values = counts[mask], values[mask]
    if len(values) < 3:
        raise PlotInputError("fewer than three plottable states")
    xy = _barycentric_xy(counts)
    tri = Triangulation(xy[:, 0], xy[:, 1])
    pc = ax.tripcolor(tri, values, shading="gouraud", norm=_norm(values, spec.log_scale),
                      cmap="viridis")
    ax.set_aspect("equal")
    ax.set_axis_off()
    return pc


def render_ternary_heatmap(spec: PlotSpec, table: Table):
    if table.n != 3:
        raise PlotInputError(f"ternary heatmap needs three count columns, found {table.n}")
    values = _value_column(table, spec.value)
    fig, ax = plt.subplots(figsize=(6, 5.5))
    pc = _render_ternary(ax, table.counts, values, spec)
    fig.colorbar(pc, ax=ax, shrink=0.8, label=spec.value)
    return fig


def render_face_heatmap(spec: PlotSpec, table: Table):
    if table.n != 4:
        raise PlotInputError(f"face heatmap needs four count columns, found {table.n}")
    face = 3 if spec.face is None else spec.face
    if not 0 <= face < 4:
        raise PlotInputError(f"face index must be in 0..3, got {face}")
    values = _value_column(table, spec.value)
    on_face = table.counts[:, face] == 0
    if not on_face.any():
        raise PlotInputError(f"no states with a{face + 1} = 0")
    counts = np.delete(table.counts[on_face], face, axis=1)
    fig, ax = plt.subplots(figsize=(6, 5.5))
    pc = _render_ternary(ax, counts, values[on_face], spec)
    fig.colorbar(pc, ax=ax, shrink=0.8, label=spec.value)
    ax.set_title(f"face a{face + 1} = 0")
    return fig


def _read_transitions(path: str, N: int):
    """Up/down transition curves from a two-type kernel dump."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:5] != ["src_a1", "src_a2", "dst_a1", "dst_a2", "probability"]:
            raise PlotInputError(f"unexpected transitions header: {header}")
        up = np.full(N + 1, np.nan)
        down = np.full(N + 1, np.nan)
        for row in reader:
            if not row:
                continue
            i, j, ti, tj, p = int(row[0]), int(row[1]), int(row[2]), int(row[3]), float(row[4])
            if ti == i + 1:
                up[i] = p
            elif ti == i - 1:
                down[i] = p
    return up, down


def render_line(spec: PlotSpec, table: Table):
    if table.n != 2:
        raise PlotInputError(f"line panels need two count columns, found {table.n}")
    values = _value_column(table, spec.value)
    i = table.counts[:, 0]
    order = np.argsort(i)
    i = i[order]
    panels = []
    if spec.transitions:
        panels.append("transitions")
    entropy_col = "D_1" if "D_1" in table.columns and spec.value != "D_1" else None
    if entropy_col:
        panels.append(entropy_col)
    panels.append(spec.value)

    fig, axes = plt.subplots(len(panels), 1, figsize=(7, 2.4 * len(panels)), sharex=True)
    axes = np.atleast_1d(axes)
    for ax, panel in zip(axes, panels):
        if panel == "transitions":
            up, down = _read_transitions(spec.transitions, int(i.max()))
            ax.plot(np.arange(len(up)), up, label="up", color="tab:blue")
            ax.plot(np.arange(len(down)), down, label="down", color="tab:green")
            ax.legend(loc="best", fontsize=8)
            ax.set_ylabel("transition")
        else:
            ax.plot(i, table.columns[panel][order], color="tab:red" if panel == spec.value else "tab:purple")
            ax.set_ylabel(panel)
            if spec.log_scale and panel == spec.value:
                ax.set_yscale("log")
    axes[-1].set_xlabel("a1")
    fig.align_ylabels(axes)
    return fig


def render(spec: PlotSpec) -> str:
    """Render the spec to its output path and return the path."""
    table = read_table(spec.input_path)
    if spec.kind == "line":
        fig = render_line(spec, table)
    elif spec.kind == "ternary-heatmap":
        fig = render_ternary_heatmap(spec, table)
    else:
        fig = render_face_heatmap(spec, table)
    fig.savefig(spec.out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return spec.out


# ---------------------------------------------------------------------------


@click.command()
@click.option("--input", "input_path", required=True, help="per-state CSV")
@click.option("--value", default="stationary", help="value column to plot")
@click.option("--kind", type=click.Choice(PLOT_KINDS), default="ternary-heatmap")
@click.option("--out", default="figure.png", help="output image path")
@click.option("--face", type=int, default=None,
              help="which coordinate is pinned at zero (face-heatmap, 0-based)")
@click.option("--transitions", default=None,
              help="two-type kernel dump CSV for the transitions panel (line)")
@click.option("--omit-boundary", is_flag=True, default=False,
              help="drop boundary states from heatmaps")
@click.option("--log-scale", is_flag=True, default=False)
def main(input_path, value, kind, out, face, transitions, omit_boundary, log_scale):
    """Render a figure from a stationary-lab CSV."""
    spec = PlotSpec(
        input_path=input_path, value=value, kind=kind, out=out, face=face,
        transitions=transitions, omit_boundary=omit_boundary, log_scale=log_scale,
    )
    try:
        path = render(spec)
    except (PlotInputError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(path)


if __name__ == "__main__":
    main()
