"""Finite abstract simplicial complexes with optional geometric realization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

Simplex = tuple[int, ...]


@dataclass(frozen=True, order=True)
class CellRef:
    dim: int
    index: int


class SimplicialComplex:
    """Cells stored per dimension as strictly increasing vertex tuples.

    ``coords`` maps vertex id to a point; when given, every vertex must have one.
    Instances are treated as immutable.
    """

    def __init__(
        self,
        cells: Sequence[Iterable[Sequence[int]]],
        coords: Mapping[int, Sequence[float]] | None = None,
    ):
        cleaned: list[tuple[Simplex, ...]] = []
        for k, layer in enumerate(cells):
            seen: dict[Simplex, None] = {}
            for c in layer:
                s = tuple(c)
                if len(s) != k + 1:
                    raise ValueError(f"cell {s} listed in dimension {k}")
                if any(a >= b for a, b in zip(s, s[1:])):
                    raise ValueError(f"cell {s} is not strictly increasing")
                if s in seen:
                    raise ValueError(f"duplicate cell {s}")
                seen[s] = None
            cleaned.append(tuple(seen))
        while cleaned and not cleaned[-1]:
            cleaned.pop()
        self._cells = tuple(cleaned)
        self._index = [{s: i for i, s in enumerate(layer)} for layer in self._cells]
        for k in range(1, len(self._cells)):
            below = self._index[k - 1]
            for s in self._cells[k]:
                for face in _facets(s):
                    if face not in below:
                        raise ValueError(f"face {face} of {s} missing")
        if coords is not None:
            pts = {int(v): np.asarray(p, dtype=float) for v, p in coords.items()}
            missing = [s[0] for s in self.cells_of(0) if s[0] not in pts]
            if missing:
                raise ValueError(f"vertices without coordinates: {missing[:5]}")
            self.coords: dict[int, np.ndarray] | None = {
                s[0]: pts[s[0]] for s in self.cells_of(0)
            }
        else:
            self.coords = None

    @classmethod
    def from_simplices(
        cls,
        simplices: Iterable[Sequence[int]],
        coords: Mapping[int, Sequence[float]] | None = None,
    ) -> "SimplicialComplex":
        """Close a collection of simplices under taking faces."""
        layers: list[set[Simplex]] = []
        for s in simplices:
            s = tuple(sorted(set(s)))
            if not s:
                continue
            for size in range(1, len(s) + 1):
                while len(layers) < size:
                    layers.append(set())
                layers[size - 1].update(itertools.combinations(s, size))
        return cls([sorted(layer) for layer in layers], coords)

    @property
    def dim(self) -> int:
        return len(self._cells) - 1

    @property
    def cells(self) -> tuple[tuple[Simplex, ...], ...]:
        return self._cells

    def cells_of(self, k: int) -> tuple[Simplex, ...]:
        if 0 <= k < len(self._cells):
            return self._cells[k]
        return ()

    def n_cells(self, k: int) -> int:
        return len(self.cells_of(k))

    def is_empty(self) -> bool:
        return not self._cells

    def __contains__(self, simplex: Sequence[int]) -> bool:
        s = tuple(simplex)
        k = len(s) - 1
        return 0 <= k < len(self._index) and s in self._index[k]

    def ref(self, simplex: Sequence[int]) -> CellRef:
        s = tuple(simplex)
        k = len(s) - 1
        if not (0 <= k < len(self._index)) or s not in self._index[k]:
            raise KeyError(f"{s} is not a cell")
        return CellRef(k, self._index[k][s])

    def index_of(self, simplex: Sequence[int]) -> int:
        return self.ref(simplex).index

    def cell(self, ref: CellRef) -> Simplex:
        self._check(ref)
        return self._cells[ref.dim][ref.index]

    def _check(self, ref: CellRef) -> None:
        if not (0 <= ref.dim < len(self._cells)) or not (
            0 <= ref.index < len(self._cells[ref.dim])
        ):
            raise IndexError("cell out of range")

    def facets(self, k: int, i: int) -> tuple[int, ...]:
        """Indices of the (k-1)-faces of the k-cell ``i``."""
        return self._facet_table[k][i]

    @cached_property
    def _facet_table(self) -> list[list[tuple[int, ...]]]:
        table: list[list[tuple[int, ...]]] = [[() for _ in self._cells[0]]] if self._cells else []
        for k in range(1, len(self._cells)):
            below = self._index[k - 1]
            table.append([tuple(below[f] for f in _facets(s)) for s in self._cells[k]])
        return table

    @cached_property
    def _coface_table(self) -> list[list[list[int]]]:
        table = [[[] for _ in layer] for layer in self._cells]
        for k in range(1, len(self._cells)):
            for i, fs in enumerate(self._facet_table[k]):
                for f in fs:
                    table[k - 1][f].append(i)
        return table

    def cofaces(self, k: int, i: int) -> tuple[int, ...]:
        """Indices of the (k+1)-cells having the k-cell ``i`` as a facet."""
        return tuple(self._coface_table[k][i])

    def vertices(self) -> list[int]:
        return [s[0] for s in self.cells_of(0)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(layer) for k, layer in enumerate(self._cells))

    def point(self, v: int) -> np.ndarray:
        if self.coords is None:
            raise ValueError("no geometric realization")
        return self.coords[v]

    def points(self, simplex: Sequence[int]) -> np.ndarray:
        if self.coords is None:
            raise ValueError("no geometric realization")
        return np.array([self.coords[v] for v in simplex])

    @property
    def ambient_dim(self) -> int:
        if self.coords is None or not self.coords:
            raise ValueError("no geometric realization")
        return len(next(iter(self.coords.values())))

    def subcomplex(self, simplices: Iterable[Sequence[int]]) -> "SimplicialComplex":
        """Closure of the given cells, keeping coordinates of the vertices used."""
        sub = SimplicialComplex.from_simplices(simplices)
        coords = None
        if self.coords is not None:
            coords = {v: self.coords[v] for v in sub.vertices()}
        return SimplicialComplex(sub.cells, coords)

    def __repr__(self) -> str:
        counts = ", ".join(str(len(layer)) for layer in self._cells)
        return f"SimplicialComplex(f=({counts}))"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return [set(x) for x in self._cells] == [set(x) for x in other._cells]

    __hash__ = None  # type: ignore[assignment]


def _facets(s: Simplex) -> list[Simplex]:
    if len(s) == 1:
        return []
    return [s[:i] + s[i + 1 :] for i in range(len(s))]


def star(complex: SimplicialComplex, cell: CellRef) -> list[CellRef]:
    """All cells having ``cell`` as a face, including ``cell`` itself."""
    complex._check(cell)
    out = [cell]
    frontier = {cell.index}
    for k in range(cell.dim, complex.dim):
        nxt: set[int] = set()
        for i in frontier:
            nxt.update(complex.cofaces(k, i))
        out.extend(CellRef(k + 1, j) for j in sorted(nxt))
        frontier = nxt
    return out


def link(complex: SimplicialComplex, cell: CellRef) -> SimplicialComplex:
    """Cells disjoint from ``cell`` whose join with it is a cell of the complex."""
    sigma = set(complex.cell(cell))
    pieces = []
    for ref in star(complex, cell):
        rest = tuple(v for v in complex.cell(ref) if v not in sigma)
        if rest:
            pieces.append(rest)
    sub = SimplicialComplex.from_simplices(pieces)
    coords = None
    if complex.coords is not None:
        coords = {v: complex.coords[v] for v in sub.vertices()}
    return SimplicialComplex(sub.cells, coords)


def barycentric_subdivide(complex: SimplicialComplex) -> SimplicialComplex:
    """Vertices are the faces of ``complex``; simplices are flags of nested faces.

    New vertex ids number the old faces by (dimension, index).
    """
    ids: dict[Simplex, int] = {}
    for layer in complex.cells:
        for s in layer:
            ids[s] = len(ids)

    # flags[k][i]: all flags whose largest element is the k-cell i
    flags: list[list[list[tuple[int, ...]]]] = []
    for k, layer in enumerate(complex.cells):
        row = []
        for i, s in enumerate(layer):
            mine = [(ids[s],)]
            for face in _all_proper_faces(s):
                fk = len(face) - 1
                for fl in flags[fk][complex.index_of(face)]:
                    mine.append(fl + (ids[s],))
            row.append(mine)
        flags.append(row)

    simplices = [fl for row in flags for per_cell in row for fl in per_cell]
    top: dict[int, list[Simplex]] = {}
    for fl in simplices:
        top.setdefault(len(fl) - 1, []).append(tuple(sorted(fl)))
    layers = [sorted(top.get(k, [])) for k in range(max(top) + 1)] if top else []

    coords = None
    if complex.coords is not None:
        coords = {ids[s]: complex.points(s).mean(axis=0) for s in ids}
    return SimplicialComplex(layers, coords)


def _all_proper_faces(s: Simplex) -> list[Simplex]:
    return [f for size in range(1, len(s)) for f in itertools.combinations(s, size)]


def mesh_size(complex: SimplicialComplex) -> float:
    """Largest Euclidean diameter over all cells (the longest edge)."""
    if complex.coords is None:
        raise ValueError("no geometric realization")
    best = 0.0
    for a, b in complex.cells_of(1):
        best = max(best, float(np.linalg.norm(complex.coords[a] - complex.coords[b])))
    return best


def subdivide_until(complex: SimplicialComplex, target_mesh: float, max_rounds: int = 8) -> SimplicialComplex:
    """Barycentric subdivision repeated until the mesh drops below ``target_mesh``."""
    out = complex
    for _ in range(max_rounds):
        if mesh_size(out) < target_mesh:
            return out
        out = barycentric_subdivide(out)
    if mesh_size(out) < target_mesh:
        return out
    raise ValueError(f"mesh {mesh_size(out):.3g} still above target after {max_rounds} rounds")


# canonical constructions

def sphere(d: int, refinement: int = 0) -> SimplicialComplex:
    """Hexagon (d=1) or octahedron (d=2), subdivided and pushed to the unit sphere."""
    if refinement < 0:
        raise ValueError("refinement must be >= 0")
    if d == 0:
        base = SimplicialComplex([[(0,), (1,)]], {0: [-1.0], 1: [1.0]})
    elif d == 1:
        angles = np.arange(6) * np.pi / 3
        coords = {i: [np.cos(a), np.sin(a)] for i, a in enumerate(angles)}
        base = SimplicialComplex.from_simplices(
            [tuple(sorted((i, (i + 1) % 6))) for i in range(6)], coords
        )
    elif d == 2:
        coords = {
            0: [1, 0, 0], 1: [-1, 0, 0], 2: [0, 1, 0],
            3: [0, -1, 0], 4: [0, 0, 1], 5: [0, 0, -1],
        }
        tris = [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
        base = SimplicialComplex.from_simplices(tris, coords)
    else:
        raise ValueError(f"unsupported sphere dimension {d}")
    out = base
    for _ in range(refinement):
        out = barycentric_subdivide(out)
        out = _project_to_unit_sphere(out)
    return out


def _project_to_unit_sphere(c: SimplicialComplex) -> SimplicialComplex:
    assert c.coords is not None
    return SimplicialComplex(c.cells, {v: p / np.linalg.norm(p) for v, p in c.coords.items()})


def cone(complex: SimplicialComplex, apex: int | None = None, apex_point: Sequence[float] | None = None) -> SimplicialComplex:
    """Join of ``complex`` with a new apex vertex."""
    if apex is None:
        apex = max(complex.vertices(), default=-1) + 1
    if apex in complex.vertices():
        raise ValueError(f"apex id {apex} already used")
    simplices = [s + (apex,) if s[-1] < apex else (apex,) + s
                 for layer in complex.cells for s in layer]
    simplices.append((apex,))
    coords = None
    if complex.coords is not None:
        coords = dict(complex.coords)
        if apex_point is None:
            apex_point = np.zeros(complex.ambient_dim)
        coords[apex] = np.asarray(apex_point, dtype=float)
    return SimplicialComplex.from_simplices(simplices, coords)


def disk(d: int, refinement: int = 0) -> SimplicialComplex:
    """Cone over ``sphere(d, refinement)`` with apex at the origin."""
    return cone(sphere(d, refinement))


def grid(box: Sequence[tuple[float, float]], resolution: int | Sequence[int]) -> SimplicialComplex:
    """Freudenthal triangulation of an axis-aligned box (d! simplices per cube)."""
    d = len(box)
    res = [resolution] * d if isinstance(resolution, int) else list(resolution)
    if len(res) != d or any(r < 1 for r in res):
        raise ValueError("resolution must be >= 1 per axis")
    shape = [r + 1 for r in res]
    strides = [int(np.prod(shape[i + 1:])) for i in range(d)]
    axes = [np.linspace(lo, hi, r + 1) for (lo, hi), r in zip(box, res)]
    coords = {}
    for idx in itertools.product(*(range(s) for s in shape)):
        coords[sum(i * st for i, st in zip(idx, strides))] = [axes[a][i] for a, i in enumerate(idx)]
    tops = []
    for base in itertools.product(*(range(r) for r in res)):
        for perm in itertools.permutations(range(d)):
            cur = list(base)
            verts = [sum(i * st for i, st in zip(cur, strides))]
            for axis in perm:
                cur[axis] += 1
                verts.append(sum(i * st for i, st in zip(cur, strides)))
            tops.append(verts)
    return SimplicialComplex.from_simplices(tops, coords)


def make_canonical(name: str, *args) -> SimplicialComplex:
    """Dispatch ``sphere(d, r)``, ``disk(d, r)`` or ``grid(box, res)`` by name."""
    makers = {"sphere": sphere, "disk": disk, "grid": grid}
    if name not in makers:
        raise ValueError(f"unknown canonical complex {name!r}")
    return makers[name](*args)


def _standard_corners(d: int) -> dict[int, tuple[float, ...]]:
    # the origin followed by the unit basis vectors of R^d
    return {i: tuple(float(i == j + 1) for j in range(d)) for i in range(d + 1)}


def boundary_of_simplex(d: int) -> SimplicialComplex:
    """All proper faces of the standard d-simplex, e.g. d=3 gives a 2-sphere."""
    return SimplicialComplex.from_simplices(itertools.combinations(range(d + 1), d), _standard_corners(d))


def simplex(d: int) -> SimplicialComplex:
    return SimplicialComplex.from_simplices([tuple(range(d + 1))], _standard_corners(d))
