"""Chains with Z/2 coefficients, boundaries, Betti numbers and bounding chains.

Boundary matrices are kept as Python ints used as bit vectors: column j of
the k-th boundary matrix is an int whose set bits are the facets of the
k-cell j.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .complexes import SimplicialComplex


@dataclass(frozen=True)
class Z2Chain:
    dim: int
    support: frozenset[int]

    def __init__(self, dim: int, support: Iterable[int] = ()):
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "support", frozenset(support))

    def __add__(self, other: "Z2Chain") -> "Z2Chain":
        if other.dim != self.dim:
            raise ValueError("cannot add chains of different dimension")
        return Z2Chain(self.dim, self.support ^ other.support)

    def __len__(self) -> int:
        return len(self.support)

    def __bool__(self) -> bool:
        return bool(self.support)

    @classmethod
    def from_cells(cls, host: SimplicialComplex, cells: Iterable[Sequence[int]], dim: int | None = None) -> "Z2Chain":
        """Chain from vertex tuples; listing a cell twice cancels it."""
        support: set[int] = set()
        k = dim
        for c in cells:
            ref = host.ref(tuple(sorted(c)))
            if k is None:
                k = ref.dim
            elif ref.dim != k:
                raise ValueError("mixed dimensions in chain")
            support ^= {ref.index}
        if k is None:
            raise ValueError("dimension required for an empty chain")
        return cls(k, support)

    def cells(self, host: SimplicialComplex) -> list[tuple[int, ...]]:
        layer = host.cells_of(self.dim)
        return sorted(layer[i] for i in self.support)

    def to_bits(self) -> int:
        out = 0
        for i in self.support:
            out |= 1 << i
        return out

    @classmethod
    def from_bits(cls, dim: int, bits: int) -> "Z2Chain":
        return cls(dim, _bit_indices(bits))

    def validate(self, host: SimplicialComplex) -> None:
        n = host.n_cells(self.dim)
        if any(not (0 <= i < n) for i in self.support):
            raise IndexError("chain index out of range")


def _bit_indices(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def boundary(host: SimplicialComplex, c: Z2Chain) -> Z2Chain:
    if c.dim < 1:
        raise ValueError("cannot take boundary of 0-chain")
    out: set[int] = set()
    for i in c.support:
        for f in host.facets(c.dim, i):
            out ^= {f}
    return Z2Chain(c.dim - 1, out)


def boundary_columns(host: SimplicialComplex, k: int) -> list[int]:
    """Columns of the boundary map from k-chains to (k-1)-chains as bit vectors."""
    if k < 1:
        return [0] * host.n_cells(k)
    cols = []
    for fs in host._facet_table[k] if k <= host.dim else []:
        bits = 0
        for f in fs:
            bits |= 1 << f
        cols.append(bits)
    return cols


def gf2_rank(columns: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for col in columns:
        while col:
            top = col.bit_length() - 1
            if top in basis:
                col ^= basis[top]
            else:
                basis[top] = col
                break
    return len(basis)


@dataclass(frozen=True)
class BettiVector:
    b: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.b[k] if 0 <= k < len(self.b) else 0

    def __iter__(self):
        return iter(self.b)

    def __len__(self) -> int:
        return len(self.b)

    def as_list(self) -> list[int]:
        return list(self.b)


def betti(host: SimplicialComplex) -> BettiVector:
    """Unreduced mod-2 Betti numbers b_0..b_dim; all zeros for an empty complex."""
    if host.is_empty():
        return BettiVector((0,))
    ranks = [0] + [gf2_rank(boundary_columns(host, k)) for k in range(1, host.dim + 1)] + [0]
    return BettiVector(tuple(
        host.n_cells(k) - ranks[k] - ranks[k + 1] for k in range(host.dim + 1)
    ))


def is_acyclic(host: SimplicialComplex) -> bool:
    """Non-empty with the mod-2 homology of a point."""
    if host.is_empty():
        return False
    b = betti(host)
    return b[0] == 1 and all(x == 0 for x in b.b[1:])


def is_cycle(host: SimplicialComplex, c: Z2Chain) -> bool:
    return not boundary(host, c)


def _is_reduced_cycle(host: SimplicialComplex, u: Z2Chain) -> bool:
    # 0-chains count as cycles in reduced homology when they have an even number of points
    if u.dim == 0:
        return len(u) % 2 == 0
    return is_cycle(host, u)


def solve_bounding_chain(host: SimplicialComplex, u: Z2Chain, seed: int = 0) -> Z2Chain | None:
    """Some W with boundary(W) == u exactly, or None when u is not a boundary.

    For a 0-chain ``u`` the cycle condition is the reduced one (even
    cardinality), so two points are filled by a path.  ``seed`` permutes the
    pivot order, selecting among the equally valid solutions.
    """
    if not _is_reduced_cycle(host, u):
        raise ValueError("input chain is not a cycle")
    u.validate(host)
    if not u:
        return Z2Chain(u.dim + 1)
    k = u.dim + 1
    cols = boundary_columns(host, k) if k <= host.dim else []
    order = list(range(len(cols)))
    random.Random(seed).shuffle(order)
    # basis keyed by leading bit: (reduced column, combination of original columns)
    basis: dict[int, tuple[int, int]] = {}
    for j in order:
        col, combo = cols[j], 1 << j
        while col:
            top = col.bit_length() - 1
            if top not in basis:
                basis[top] = (col, combo)
                break
            bcol, bcombo = basis[top]
            col ^= bcol
            combo ^= bcombo
    target, combo = u.to_bits(), 0
    while target:
        top = target.bit_length() - 1
        if top not in basis:
            return None
        bcol, bcombo = basis[top]
        target ^= bcol
        combo ^= bcombo
    return Z2Chain.from_bits(k, combo)
