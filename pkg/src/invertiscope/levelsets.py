"""PL approximations of hyperplane preimages {x : <f(x), v> = c} inside a box.

Two dimensions use marching squares with the asymptotic decider for saddle
cells.  Three dimensions use marching tetrahedra on the Freudenthal split
of every grid cube (six tetrahedra sharing the main diagonal), which has no
ambiguous configurations.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import SimplicialComplex
from .mapdsl import MapSpec, evaluate, jacobian
from .z2chains import BettiVector, betti

log = logging.getLogger(__name__)

Box = tuple[tuple[float, float], ...]

BOUNDARY_TOL = 1e-9
ZERO_NUDGE = 1e-12


@dataclass(frozen=True)
class Hyperplane:
    v: tuple[float, ...]
    c: float

    def __init__(self, v: Sequence[float], c: float):
        v = tuple(float(x) for x in v)
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-12:
            raise ValueError(f"hyperplane normal {v} is not a unit vector")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", float(c))

    @classmethod
    def normalized(cls, v: Sequence[float], c: float = 0.0) -> "Hyperplane":
        """The same set {<x, v> = c}, rewritten with a unit normal."""
        arr = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(arr))
        if norm == 0:
            raise ValueError("hyperplane normal must be nonzero")
        return cls(arr / norm, c / norm)


def as_box(box) -> Box:
    out = tuple((float(lo), float(hi)) for lo, hi in box)
    if any(not hi > lo for lo, hi in out):
        raise ValueError(f"degenerate box {out}")
    return out


@dataclass
class GridSample:
    """Map values at the nodes of a regular grid with ``resolution`` cells per axis."""

    box: Box
    resolution: int
    axes: list[np.ndarray]
    values: np.ndarray  # shape (res+1,)*n + (n,)

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def spacing(self) -> float:
        return max((hi - lo) / self.resolution for lo, hi in self.box)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def heights(self, v: Sequence[float]) -> np.ndarray:
        return self.values @ np.asarray(v, dtype=float)


def sample_grid(m: MapSpec, box, resolution: int) -> GridSample:
    box = as_box(box)
    if len(box) != m.n:
        raise ValueError(f"box has {len(box)} axes, map has n={m.n}")
    axes = [np.linspace(lo, hi, resolution + 1) for lo, hi in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return GridSample(box, resolution, axes, evaluate(m, pts))


@dataclass
class LevelSetMesh:
    complex: SimplicialComplex
    components: list[list[int]]
    touches_box_boundary: list[bool]
    resolution: float  # grid spacing
    box: Box
    hyperplane: Hyperplane | None = None
    cells_per_axis: int = 0

    @property
    def is_empty(self) -> bool:
        return self.complex.is_empty()


@dataclass(frozen=True)
class TopologySummary:
    nonempty: bool
    betti: BettiVector
    components: int
    boundary_touching_components: int
    closed_loops: int

    def to_dict(self) -> dict:
        return {
            "nonempty": self.nonempty,
            "betti": self.betti.as_list(),
            "components": self.components,
            "boundary_touching_components": self.boundary_touching_components,
            "closed_loops": self.closed_loops,
        }


def extract_levelset(m: MapSpec, h: Hyperplane, box, resolution: int,
                     grid: GridSample | None = None) -> LevelSetMesh:
    """Extract f^{-1}(H) clipped to ``box`` from a grid with ``resolution`` cells per axis."""
    if resolution < 8:
        raise ValueError("resolution must be at least 8 cells per axis")
    box = as_box(box)
    if grid is None:
        grid = sample_grid(m, box, resolution)
    elif grid.box != box or grid.resolution != resolution:
        raise ValueError("grid sample does not match box/resolution")
    if len(h.v) != m.n:
        raise ValueError("hyperplane dimension does not match map")
    g = grid.heights(h.v) - h.c
    mesh = extract_from_values(g, grid.axes, box)
    mesh.hyperplane = h
    return mesh


def extract_from_values(g: np.ndarray, axes: list[np.ndarray], box: Box) -> LevelSetMesh:
    g = np.array(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite height values on the grid")
    scale = float(np.max(np.abs(g))) or 1.0
    g[g == 0.0] = ZERO_NUDGE * scale
    res = len(axes[0]) - 1
    if g.ndim == 2:
        simplices, coords = _marching_squares(g, axes)
    elif g.ndim == 3:
        simplices, coords = _marching_tetrahedra(g, axes)
    else:
        raise ValueError("only 2-D and 3-D grids are supported")
    cx = SimplicialComplex.from_simplices(simplices, coords)
    comps = _components(cx)
    span = max(hi - lo for lo, hi in box)
    touching = []
    for comp in comps:
        touching.append(any(_on_box_boundary(coords[v], box, BOUNDARY_TOL * span) for v in comp))
    spacing = max((hi - lo) / res for lo, hi in box)
    return LevelSetMesh(cx, comps, touching, spacing, box, cells_per_axis=res)


def _on_box_boundary(p: np.ndarray, box: Box, tol: float) -> bool:
    return any(abs(x - lo) <= tol or abs(x - hi) <= tol for x, (lo, hi) in zip(p, box))


def _interp(p0, p1, g0, g1):
    t = g0 / (g0 - g1)
    return p0 + t * (p1 - p0)


def _marching_squares(g: np.ndarray, axes):
    nx, ny = g.shape
    pos = g > 0
    xs, ys = axes
    coords: dict[int, np.ndarray] = {}
    ids: dict[tuple, int] = {}

    def vertex(key):
        if key not in ids:
            kind, i, j = key
            if kind == "x":  # (i,j)-(i+1,j)
                p = _interp(np.array([xs[i], ys[j]]), np.array([xs[i + 1], ys[j]]), g[i, j], g[i + 1, j])
            else:  # (i,j)-(i,j+1)
                p = _interp(np.array([xs[i], ys[j]]), np.array([xs[i], ys[j + 1]]), g[i, j], g[i, j + 1])
            ids[key] = len(ids)
            coords[ids[key]] = p
        return ids[key]

    a, b = pos[:-1, :-1], pos[1:, :-1]
    c, d = pos[1:, 1:], pos[:-1, 1:]
    mixed = ~((a == b) & (b == c) & (c == d))
    segments = []
    for i, j in zip(*np.nonzero(mixed)):
        i, j = int(i), int(j)
        # edges: bottom, right, top, left
        edges = [("x", i, j), ("y", i + 1, j), ("x", i, j + 1), ("y", i, j)]
        corners = [pos[i, j], pos[i + 1, j], pos[i + 1, j + 1], pos[i, j + 1]]
        crossing = [k for k in range(4) if corners[k] != corners[(k + 1) % 4]]
        if len(crossing) == 2:
            segments.append(tuple(vertex(edges[k]) for k in crossing))
            continue
        va, vb, vc, vd = g[i, j], g[i + 1, j], g[i + 1, j + 1], g[i, j + 1]
        denom = va - vb + vc - vd
        saddle = (va * vc - vb * vd) / denom if denom != 0 else va
        if (saddle > 0) == corners[0]:
            # a and c joined through the centre: cut off corners b and d
            pairs = [(0, 1), (2, 3)]
        else:
            pairs = [(3, 0), (1, 2)]
        for p, q in pairs:
            segments.append((vertex(edges[p]), vertex(edges[q])))
    return segments, coords


_KUHN_TETS = [
    [(0, 0, 0)] + [tuple(int(k in perm[: s + 1]) for k in range(3)) for s in range(3)]
    for perm in itertools.permutations(range(3))
]


def _marching_tetrahedra(g: np.ndarray, axes):
    shape = g.shape
    pos = g > 0
    flat = g.ravel()
    flat_pos = pos.ravel()
    strides = np.array([shape[1] * shape[2], shape[2], 1])
    nodes = np.stack(np.meshgrid(*(np.arange(s - 1) for s in shape), indexing="ij"), axis=-1).reshape(-1, 3)
    grid_pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    coords: dict[int, np.ndarray] = {}
    ids: dict[tuple[int, int], int] = {}

    def vertex(p: int, q: int) -> int:
        key = (p, q) if p < q else (q, p)
        if key not in ids:
            ids[key] = len(ids)
            coords[ids[key]] = _interp(grid_pts[key[0]], grid_pts[key[1]], flat[key[0]], flat[key[1]])
        return ids[key]

    tets = []
    for offsets in _KUHN_TETS:
        tets.append(np.stack([(nodes + np.array(o)) @ strides for o in offsets], axis=1))
    # interleave so that tets of one cube stay together (deterministic order by cube)
    tets = np.stack(tets, axis=1).reshape(-1, 4)
    signs = flat_pos[tets]
    count = signs.sum(axis=1)
    triangles = []
    for t in np.nonzero((count > 0) & (count < 4))[0]:
        verts = [int(x) for x in tets[t]]
        sg = signs[t]
        inside = [verts[k] for k in range(4) if sg[k]]
        outside = [verts[k] for k in range(4) if not sg[k]]
        if len(inside) == 1 or len(outside) == 1:
            lone, others = (inside[0], outside) if len(inside) == 1 else (outside[0], inside)
            triangles.append(tuple(vertex(lone, o) for o in others))
        else:
            p, q = inside
            r, s = outside
            a, b, c, d = vertex(p, r), vertex(p, s), vertex(q, s), vertex(q, r)
            triangles.append((a, b, c))
            triangles.append((a, c, d))
    return triangles, coords


def _components(cx: SimplicialComplex) -> list[list[int]]:
    parent = {v: v for v in cx.vertices()}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in cx.cells_of(1):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in cx.vertices():
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values(), key=lambda comp: comp[0])


def _boundary_vertices(cx: SimplicialComplex) -> set[int]:
    """Vertices of the mod-2 boundary of the sum of all top cells."""
    k = cx.dim
    if k < 1:
        return set(cx.vertices())
    odd: set[int] = set()
    for i in range(cx.n_cells(k)):
        for f in cx.facets(k, i):
            odd ^= {f}
    return {v for f in odd for v in cx.cells_of(k - 1)[f]}


def topology_summary(mesh: LevelSetMesh) -> TopologySummary:
    cx = mesh.complex
    if cx.is_empty():
        return TopologySummary(False, BettiVector((0,)), 0, 0, 0)
    on_boundary = _boundary_vertices(cx)
    closed = sum(1 for comp in mesh.components if not on_boundary.intersection(comp))
    return TopologySummary(
        nonempty=True,
        betti=betti(cx),
        components=len(mesh.components),
        boundary_touching_components=sum(mesh.touches_box_boundary),
        closed_loops=closed,
    )


def min_height_gradient(m: MapSpec, h: Hyperplane, grid: GridSample) -> float:
    """Smallest |grad <f, v>| over the grid nodes (regular-value check)."""
    jac = jacobian(m, grid.points())
    grad = np.einsum("...ij,i->...j", jac, np.asarray(h.v))
    val = float(np.min(np.linalg.norm(grad, axis=-1)))
    if val < 1e-8:
        log.warning("height function nearly critical on the grid (min |grad| = %.3g)", val)
    return val


def component_complexes(mesh: LevelSetMesh) -> list[SimplicialComplex]:
    """Split the mesh into one complex per connected component."""
    cx = mesh.complex
    out = []
    for comp in mesh.components:
        members = set(comp)
        tops = [s for layer in cx.cells for s in layer if s[0] in members]
        out.append(cx.subcomplex(tops))
    return out
