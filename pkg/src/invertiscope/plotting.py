"""Matplotlib figures for 2-D level sets and lift paths (written as files)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .levelsets import LevelSetMesh  # noqa: E402
from .lift import LiftResult  # noqa: E402


def _component_polylines(mesh: LevelSetMesh) -> list[list[tuple[float, float]]]:
    """Order the edges of each 1-D component into a single walk where possible."""
    cx = mesh.complex
    adj: dict[int, list[int]] = {}
    for a, b in cx.cells_of(1):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    lines = []
    for comp in mesh.components:
        ends = [v for v in comp if len(adj.get(v, ())) == 1]
        start = ends[0] if ends else comp[0]
        walk, prev, cur = [start], None, start
        while True:
            nxt = [u for u in adj.get(cur, ()) if u != prev]
            if not nxt or nxt[0] == start:
                if nxt and nxt[0] == start:
                    walk.append(start)
                break
            prev, cur = cur, nxt[0]
            walk.append(cur)
            if len(walk) > len(comp) + 1:
                break
        lines.append([tuple(cx.coords[v][:2]) for v in walk])
    return lines


def plot_levelset(mesh: LevelSetMesh, dest: str | Path, title: str | None = None) -> Path:
    """One polyline per component; components that touch the box boundary are dashed."""
    if len(mesh.box) != 2:
        raise ValueError("level-set plots are only available for n = 2")
    fig, ax = plt.subplots(figsize=(5, 5))
    for line, touches in zip(_component_polylines(mesh), mesh.touches_box_boundary):
        xs, ys = zip(*line)
        ax.plot(xs, ys, "--" if touches else "-", lw=1.2)
    (x0, x1), (y0, y1) = mesh.box
    ax.add_patch(plt.Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False, lw=0.6, color="grey"))
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    dest = Path(dest)
    fig.savefig(dest, format="svg")
    plt.close(fig)
    return dest


def plot_lifts(lifts: Sequence[LiftResult], box, dest: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    for res in lifts:
        pts = res.path[:, 1:3]
        ax.plot(pts[:, 0], pts[:, 1], lw=1.0, label=res.status.kind)
    (x0, x1), (y0, y1) = box[:2]
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    dest = Path(dest)
    fig.savefig(dest, format=dest.suffix.lstrip(".") or "svg")
    plt.close(fig)
    return dest
