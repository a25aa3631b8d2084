"""Render network structures as figures.

Nodes are placed on a layered layout (columns by longest-path depth) and
drawn with matplotlib, so the CLI can drop a picture of each compiled
network next to its text file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

from .dag import Dag

_ROLE_COLORS = {"U": "#c6dbef", "Y": "#c7e9c0", "X": "#fdd0a2", "Z": "#dadaeb"}


def _layout(g: Dag) -> dict[int, tuple[float, float]]:
    depth = [0] * g.node_count
    for v in g.topological_order:
        if g.parents[v]:
            depth[v] = 1 + max(depth[p] for p in g.parents[v])
    columns: dict[int, list[int]] = {}
    for v in range(g.node_count):
        columns.setdefault(depth[v], []).append(v)
    pos = {}
    for d, nodes in columns.items():
        nodes.sort()
        for row, v in enumerate(nodes):
            pos[v] = (float(d), row - (len(nodes) - 1) / 2.0)
    return pos


def draw_dag(g: Dag, path: str, title: str | None = None) -> None:
    """Draw the graph to an image file (format chosen by extension)."""
    pos = _layout(g)
    xs = [p[0] for p in pos.values()]
    ys = [p[1] for p in pos.values()]
    width = max(3.0, 1.6 * (max(xs) - min(xs) + 1))
    height = max(2.5, 0.7 * (max(ys) - min(ys) + 1))
    fig, ax = plt.subplots(figsize=(width, height))
    for i, j in sorted(g.edges):
        ax.add_patch(FancyArrowPatch(
            pos[i], pos[j], arrowstyle="-|>", mutation_scale=12,
            shrinkA=14, shrinkB=14, color="0.35", lw=1.0,
            connectionstyle="arc3,rad=0.08",
        ))
    for v in range(g.node_count):
        label = g.node_labels[v]
        color = _ROLE_COLORS.get(label.split("_", 1)[0], "#f0f0f0")
        ax.annotate(
            label, pos[v], ha="center", va="center", fontsize=9,
            bbox=dict(boxstyle="round,pad=0.35", fc=color, ec="0.3", lw=0.8),
        )
    if title:
        ax.set_title(title)
    ax.set_xlim(min(xs) - 0.7, max(xs) + 0.7)
    ax.set_ylim(min(ys) - 0.7, max(ys) + 0.7)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
