"""Product chains and the skeleton-by-skeleton gap-filling assembly.

A base sphere B (dimension m) carries one fiber complex per cell.  Step 0
picks a chain over every top cell; step k visits the (m-k)-cells, sums the
chains built over their cofaces, and fills that cycle with a bounding chain
inside the fiber.  The pieces ``filler x cell`` add up to a lateral chain
whose boundary telescopes down to the two end caps.

Fiber cells are identified by vertex tuples in a vertex namespace shared by
all fibers, so chains built over neighbouring base cells can cancel.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .complexes import SimplicialComplex, cone, sphere
from .z2chains import Z2Chain, boundary, is_acyclic, is_cycle, solve_bounding_chain

Simplex = tuple[int, ...]


class ProductCell(NamedTuple):
    fiber: Simplex
    base: Simplex

    @property
    def dim(self) -> int:
        return len(self.fiber) + len(self.base) - 2


@dataclass(frozen=True)
class ProductChain:
    dim: int
    support: frozenset[ProductCell]

    def __init__(self, dim: int, support: Iterable[ProductCell] = ()):
        cells: set[ProductCell] = set()
        for c in support:
            c = ProductCell(tuple(c[0]), tuple(c[1]))
            if c.dim != dim:
                raise ValueError(f"{c} has dimension {c.dim}, expected {dim}")
            cells ^= {c}
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "support", frozenset(cells))

    def __add__(self, other: "ProductChain") -> "ProductChain":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return ProductChain(self.dim, self.support ^ other.support)

    def __len__(self) -> int:
        return len(self.support)

    def __bool__(self) -> bool:
        return bool(self.support)

    @classmethod
    def product(cls, fiber_chain: Iterable[Simplex], base_cell: Simplex) -> "ProductChain":
        cells = [ProductCell(tuple(f), tuple(base_cell)) for f in fiber_chain]
        if not cells:
            raise ValueError("use ProductChain(dim) for an empty product")
        return cls(cells[0].dim, cells)


def _faces(s: Simplex) -> list[Simplex]:
    return [s[:i] + s[i + 1:] for i in range(len(s))]


def leibniz_boundary(p: ProductChain) -> ProductChain:
    """d(a x b) = da x b + a x db mod 2; a 0-dimensional factor has no boundary."""
    if p.dim < 1:
        raise ValueError("cannot take boundary of a 0-dimensional product chain")
    out: set[ProductCell] = set()
    for cell in p.support:
        if len(cell.fiber) > 1:
            for f in _faces(cell.fiber):
                out ^= {ProductCell(f, cell.base)}
        if len(cell.base) > 1:
            for b in _faces(cell.base):
                out ^= {ProductCell(cell.fiber, b)}
    return ProductChain(p.dim - 1, out)


@dataclass
class FiberAssignment:
    """Fiber complexes over the base cells plus the two endpoint vertices.

    ``fibers`` maps every base cell (vertex tuple) to its fiber.  When a
    cell is a face of another, the larger cell's fiber must sit inside the
    smaller cell's fiber.  ``paths`` optionally fixes the step-0 chain over
    some top cells; the rest are solved for.
    """

    fibers: dict[Simplex, SimplicialComplex]
    u0: int
    u1: int
    paths: dict[Simplex, frozenset] = field(default_factory=dict)

    @classmethod
    def uniform(cls, base: SimplicialComplex, fiber: SimplicialComplex, u0: int, u1: int,
                paths: Mapping[Simplex, Iterable[Simplex]] | None = None) -> "FiberAssignment":
        fibers = {s: fiber for layer in base.cells for s in layer}
        return cls(fibers, u0, u1, {k: frozenset(map(tuple, v)) for k, v in (paths or {}).items()})

    def fiber(self, cell: Simplex) -> SimplicialComplex:
        try:
            return self.fibers[tuple(cell)]
        except KeyError:
            raise KeyError(f"no fiber assigned to base cell {cell}") from None


@dataclass
class StepRecord:
    step: int
    cell: Simplex
    cycle_size: int
    filler_size: int
    seed: int
    solved: bool

    def to_dict(self) -> dict:
        return {"step": self.step, "cell": list(self.cell), "cycle_size": self.cycle_size,
                "filler_size": self.filler_size, "seed": self.seed, "solved": self.solved}


@dataclass
class StepTrace:
    records: list[StepRecord] = field(default_factory=list)
    # fillers[(cell)] = chain of fiber cells placed over that base cell
    fillers: dict[Simplex, frozenset] = field(default_factory=dict)

    def solves(self, step: int | None = None) -> int:
        return sum(r.solved for r in self.records if step is None or r.step == step)

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.records], indent=1)


@dataclass
class CylinderAssembly:
    cycle: ProductChain
    lateral: ProductChain
    cap0: ProductChain
    cap1: ProductChain
    trace: StepTrace
    fibers: FiberAssignment

    def __iter__(self):
        # allows ``cycle, lateral, trace = assemble_cylinder(...)``
        return iter((self.cycle, self.lateral, self.trace))


def _fill(base: SimplicialComplex, fibers: Mapping[Simplex, SimplicialComplex],
          start: Mapping[Simplex, frozenset], start_dim: int, seed: int,
          trace: StepTrace) -> ProductChain:
    m = base.dim
    dim = start_dim + m
    lateral: set[ProductCell] = set()
    built: dict[Simplex, frozenset] = {}
    for s in base.cells_of(m):
        chain = frozenset(start[s])
        built[s] = chain
        trace.fillers[s] = chain
        trace.records.append(StepRecord(0, s, 0, len(chain), seed, False))
        for f in chain:
            lateral ^= {ProductCell(f, s)}
    rng = random.Random(seed)
    for k in range(1, m + 1):
        for i, s in enumerate(base.cells_of(m - k)):
            # cofaces are the joins of s with the vertices of its link
            gathered: set[Simplex] = set()
            for j in base.cofaces(m - k, i):
                gathered ^= built[base.cells_of(m - k + 1)[j]]
            cycle = frozenset(gathered)
            fiber = fibers[s]
            if not cycle:
                filler: frozenset = frozenset()
                solved = False
            else:
                u = Z2Chain.from_cells(fiber, cycle, dim=start_dim + k - 1)
                if u.dim > 0 and not is_cycle(fiber, u):
                    raise RuntimeError("internal: cancellation failure")
                if u.dim == 0 and len(u) % 2:
                    raise RuntimeError("internal: cancellation failure")
                step_seed = rng.randrange(2**31)
                w = solve_bounding_chain(fiber, u, seed=step_seed)
                if w is None:
                    raise ValueError("fiber violates acyclicity hypothesis")
                filler = frozenset(w.cells(fiber))
                solved = True
            built[s] = filler
            trace.fillers[s] = filler
            trace.records.append(StepRecord(k, s, len(cycle), len(filler),
                                            step_seed if solved else seed, solved))
            for f in filler:
                lateral ^= {ProductCell(f, s)}
    return ProductChain(dim, lateral)


def _check_fibers(base: SimplicialComplex, fibers: Mapping[Simplex, SimplicialComplex]) -> None:
    for layer in base.cells:
        for s in layer:
            if s not in fibers:
                raise ValueError(f"no fiber assigned to base cell {s}")
    checked: dict[int, bool] = {}
    for s, fib in fibers.items():
        key = id(fib)
        if key not in checked:
            checked[key] = is_acyclic(fib)
        if not checked[key]:
            raise ValueError("fiber violates acyclicity hypothesis")


def cap_chain(base: SimplicialComplex, endpoint: int, apex: int | None = None) -> ProductChain:
    """Disk cap ``endpoint x cone(base)`` whose boundary is ``endpoint x base``."""
    coned = cone(SimplicialComplex(base.cells), apex=apex)
    apex_id = coned.vertices()[-1] if apex is None else apex
    m = base.dim
    cells = [ProductCell((endpoint,), s) for s in coned.cells_of(m + 1) if apex_id in s]
    return ProductChain(m + 1, cells)


def end_sphere(base: SimplicialComplex, endpoint: int) -> ProductChain:
    return ProductChain(base.dim, [ProductCell((endpoint,), s) for s in base.cells_of(base.dim)])


def assemble_cylinder(base: SimplicialComplex, fibers: FiberAssignment, seed: int = 0) -> CylinderAssembly:
    """Build the closed chain cap0 + lateral + cap1 over a base sphere.

    Step 0 joins ``u0`` to ``u1`` inside the fiber over each top cell
    (a prescribed path when given, otherwise a solved one).
    """
    if base.dim < 0:
        raise ValueError("empty base")
    if fibers.u0 == fibers.u1:
        raise ValueError("endpoints must differ")
    _check_fibers(base, fibers.fibers)
    start: dict[Simplex, frozenset] = {}
    rng = random.Random(seed ^ 0x5EED)
    for s in base.cells_of(base.dim):
        fib = fibers.fiber(s)
        if s in fibers.paths:
            path = fibers.paths[s]
            w = Z2Chain.from_cells(fib, path, dim=1)
            ends = boundary(fib, w)
            if set(ends.cells(fib)) != {(fibers.u0,), (fibers.u1,)}:
                raise ValueError(f"path over {s} does not join the endpoints")
            start[s] = frozenset(path)
        else:
            u = Z2Chain.from_cells(fib, [(fibers.u0,), (fibers.u1,)])
            w = solve_bounding_chain(fib, u, seed=rng.randrange(2**31))
            if w is None:
                raise ValueError("fiber violates acyclicity hypothesis")
            start[s] = frozenset(w.cells(fib))
    trace = StepTrace()
    lateral = _fill(base, fibers.fibers, start, 1, seed, trace)
    apex = _fresh_vertex(base)
    cap0 = cap_chain(base, fibers.u0, apex)
    cap1 = cap_chain(base, fibers.u1, apex)
    return CylinderAssembly(cap0 + lateral + cap1, lateral, cap0, cap1, trace, fibers)


def assemble_level_cycle(base: SimplicialComplex, fibers: Mapping[Simplex, SimplicialComplex],
                         points: Mapping[Simplex, int], seed: int = 0) -> tuple[ProductChain, StepTrace]:
    """Fixed-parameter variant: step 0 places one fiber point per top cell.

    Broken pieces over lower cells are filled the same way; the result is a
    closed product chain of dimension ``base.dim``.
    """
    _check_fibers(base, fibers)
    start = {}
    for s in base.cells_of(base.dim):
        p = points[s]
        if (p,) not in fibers[s]:
            raise ValueError(f"point {p} not in fiber over {s}")
        start[s] = frozenset({(p,)})
    trace = StepTrace()
    return _fill(base, fibers, start, 0, seed, trace), trace


def _fresh_vertex(base: SimplicialComplex) -> int:
    return max(base.vertices(), default=-1) + 1


@dataclass(frozen=True)
class AssemblyCheck:
    boundary_matches_caps: bool
    cycle_closed: bool
    supported_in_fibers: bool

    def all(self) -> bool:
        return self.boundary_matches_caps and self.cycle_closed and self.supported_in_fibers


def verify_assembly(cycle: ProductChain, lateral: ProductChain, cap0: ProductChain,
                    cap1: ProductChain, fibers: FiberAssignment | None = None) -> AssemblyCheck:
    """Check d(lateral) = d(cap0) + d(cap1), d(cycle) = 0, and fiber support."""
    caps = leibniz_boundary(cap0) + leibniz_boundary(cap1)
    a = leibniz_boundary(lateral) == caps
    b = not leibniz_boundary(cycle)
    c = True
    if fibers is not None:
        c = all(cell.fiber in fibers.fibers.get(cell.base, _EMPTY) for cell in lateral.support)
    return AssemblyCheck(a, b, c)


_EMPTY = SimplicialComplex([])


def random_cone_fibers(base: SimplicialComplex, n_vertices: int, edge_prob: float,
                       seed: int) -> FiberAssignment:
    """Fibers that are cones over random graphs, nested along base faces.

    Each top cell gets its own random graph on a shared vertex pool; the
    fiber over any cell is the cone over the union of the graphs of the top
    cells containing it.  Cones are contractible, hence acyclic.
    """
    rng = random.Random(seed)
    verts = list(range(n_vertices))
    apex = n_vertices
    graphs: dict[Simplex, set[Simplex]] = {}
    for s in base.cells_of(base.dim):
        edges = {(a, b) for a in verts for b in verts if a < b and rng.random() < edge_prob}
        graphs[s] = edges
    fibers: dict[Simplex, SimplicialComplex] = {}
    cache: dict[frozenset, SimplicialComplex] = {}
    for layer in base.cells:
        for s in layer:
            tops = [t for t in graphs if set(s) <= set(t)]
            edges = frozenset().union(*(graphs[t] for t in tops))
            if edges not in cache:
                graph = SimplicialComplex.from_simplices(list(edges) + [(v,) for v in verts])
                cache[edges] = cone(graph, apex=apex)
            fibers[s] = cache[edges]
    return FiberAssignment(fibers, 0, 1)


def demo_assembly(seed: int = 0) -> CylinderAssembly:
    """Hexagon base, one disk fiber, two different paths on alternating edges."""
    base = sphere(1, 0)
    base = SimplicialComplex(base.cells)
    fiber = _square_disk()
    upper = [(0, 2), (1, 2)]
    lower = [(0, 3), (1, 3)]
    # edge (a, a+1) sits at position a around the hexagon, the closing edge (0, 5) at position 5
    paths = {(a, b): (upper if (a if b == a + 1 else b) % 2 == 0 else lower) for a, b in base.cells_of(1)}
    return assemble_cylinder(base, FiberAssignment.uniform(base, fiber, 0, 1, paths), seed)


def _square_disk() -> SimplicialComplex:
    # square u0=0, u1=1 with 2 above and 3 below, coned from 4
    return SimplicialComplex.from_simplices([(0, 2, 4), (1, 2, 4), (0, 3, 4), (1, 3, 4)])


def path_complex(length: int) -> SimplicialComplex:
    """Path 0 - 2 - 3 - ... - 1 with endpoints 0 and 1."""
    order = [0] + list(range(2, length + 1)) + [1]
    return SimplicialComplex.from_simplices(
        [tuple(sorted(p)) for p in zip(order, order[1:])])


def path_edges(length: int) -> list[Simplex]:
    order = [0] + list(range(2, length + 1)) + [1]
    return [tuple(sorted(p)) for p in zip(order, order[1:])]
