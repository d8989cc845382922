"""Mod-2 intersection and linking numbers of PL chains in R^2 and R^3.

Only the pairs used by the inversion arguments are supported: a 1-chain
against an (n-1)-chain, and linking built on top of it.  Orientation
predicates use plain floating point with a guard band; anything inside the
band is reported as degenerate and resolved by perturbing the 1-chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import SimplicialComplex
from .z2chains import Z2Chain, is_cycle, solve_bounding_chain

GUARD = 1e-12


class NonTransverseError(ValueError):
    pass


@dataclass(frozen=True)
class PLChain:
    host: SimplicialComplex
    chain: Z2Chain

    def __post_init__(self):
        if self.host.coords is None:
            raise ValueError("no geometric realization")
        self.chain.validate(self.host)

    @classmethod
    def whole(cls, host: SimplicialComplex, dim: int | None = None) -> "PLChain":
        """Sum of all cells of dimension ``dim`` (default: top dimension)."""
        k = host.dim if dim is None else dim
        return cls(host, Z2Chain(k, range(host.n_cells(k))))

    @classmethod
    def polyline(cls, points: Sequence[Sequence[float]], closed: bool = False) -> "PLChain":
        pts = [np.asarray(p, dtype=float) for p in points]
        n = len(pts)
        edges = [(i, i + 1) for i in range(n - 1)]
        if closed:
            edges.append((0, n - 1))
        host = SimplicialComplex.from_simplices(edges, dict(enumerate(pts)))
        return cls(host, Z2Chain.from_cells(host, edges))

    @property
    def dim(self) -> int:
        return self.chain.dim

    @property
    def ambient_dim(self) -> int:
        return self.host.ambient_dim

    def simplices(self) -> np.ndarray:
        cells = self.chain.cells(self.host)
        if not cells:
            return np.zeros((0, self.dim + 1, self.ambient_dim))
        return np.array([self.host.points(c) for c in cells])

    def vertex_ids(self) -> list[int]:
        return sorted({v for c in self.chain.cells(self.host) for v in c})

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        pts = np.array([self.host.coords[v] for v in self.vertex_ids()])
        return pts.min(axis=0), pts.max(axis=0)


@dataclass(frozen=True)
class NormalZeroCycle:
    near: tuple[float, ...]
    far: tuple[float, ...]

    def __init__(self, near: Sequence[float], far: Sequence[float]):
        near = tuple(float(x) for x in near)
        far = tuple(float(x) for x in far)
        if near == far:
            raise ValueError("near and far points must differ")
        object.__setattr__(self, "near", near)
        object.__setattr__(self, "far", far)


def _orient2(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _orient3(a, b, c, d):
    u, v, w = b - a, c - a, d - a
    return (u[..., 0] * (v[..., 1] * w[..., 2] - v[..., 2] * w[..., 1])
            - u[..., 1] * (v[..., 0] * w[..., 2] - v[..., 2] * w[..., 0])
            + u[..., 2] * (v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]))


def _sign(x, tol):
    return np.where(x > tol, 1, np.where(x < -tol, -1, 0))


def _crossings(segs: np.ndarray, simps: np.ndarray, scale: float) -> tuple[int, bool]:
    """Parity of segment/simplex crossings and whether any pair is too close to call."""
    if len(segs) == 0 or len(simps) == 0:
        return 0, False
    n = segs.shape[-1]
    p = segs[:, None, 0, :]
    q = segs[:, None, 1, :]
    if n == 2:
        a, b = simps[None, :, 0, :], simps[None, :, 1, :]
        tol = GUARD * scale ** 2
        s1 = _sign(_orient2(a, b, p), tol)
        s2 = _sign(_orient2(a, b, q), tol)
        s3 = _sign(_orient2(p, q, a), tol)
        s4 = _sign(_orient2(p, q, b), tol)
        possible = (s1 * s2 <= 0) & (s3 * s4 <= 0)
        degenerate = possible & ((s1 == 0) | (s2 == 0) | (s3 == 0) | (s4 == 0))
        hit = possible & ~degenerate
    elif n == 3:
        a, b, c = simps[None, :, 0, :], simps[None, :, 1, :], simps[None, :, 2, :]
        tol = GUARD * scale ** 3
        sp = _sign(_orient3(a, b, c, p), tol)
        sq = _sign(_orient3(a, b, c, q), tol)
        e1 = _sign(_orient3(p, q, a, b), tol)
        e2 = _sign(_orient3(p, q, b, c), tol)
        e3 = _sign(_orient3(p, q, c, a), tol)
        inside_possible = ~(((e1 > 0) | (e2 > 0) | (e3 > 0)) & ((e1 < 0) | (e2 < 0) | (e3 < 0)))
        possible = (sp * sq <= 0) & inside_possible
        degenerate = possible & ((sp == 0) | (sq == 0) | (e1 == 0) | (e2 == 0) | (e3 == 0))
        hit = possible & ~degenerate
    else:
        raise ValueError("only R^2 and R^3 are supported")
    return int(np.count_nonzero(hit)) % 2, bool(np.any(degenerate))


def _scale(*chains: PLChain) -> float:
    lo = np.min([c.bbox()[0] for c in chains], axis=0)
    hi = np.max([c.bbox()[1] for c in chains], axis=0)
    return float(np.linalg.norm(hi - lo)) or 1.0


def intersection_mod2(a: PLChain, b: PLChain, perturbation: float | None = None,
                      retries: int = 3, seed: int = 0) -> int:
    """Parity of transverse intersections of a 1-chain ``a`` with an (n-1)-chain ``b``.

    Degenerate configurations trigger a deterministic perturbation of the
    vertices of ``a`` (default size 1e-9 times the bounding-box diameter),
    retried up to ``retries`` times.
    """
    n = a.ambient_dim
    if b.ambient_dim != n or n not in (2, 3):
        raise ValueError("chains must live in the same R^2 or R^3")
    if a.dim != 1 or b.dim != n - 1:
        raise ValueError(f"dimension mismatch: need a 1-chain and a {n - 1}-chain in R^{n}")
    if not a.chain or not b.chain:
        return 0
    scale = _scale(a, b)
    size = 1e-9 * scale if perturbation is None else perturbation
    cells = a.chain.cells(a.host)
    verts = a.vertex_ids()
    base = {v: a.host.coords[v] for v in verts}
    simps = b.simplices()
    for attempt in range(retries + 1):
        if attempt == 0:
            coords = base
        else:
            rng = np.random.default_rng(seed * 7919 + attempt)
            dirs = rng.normal(size=(len(verts), n))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            coords = {v: base[v] + size * attempt * d for v, d in zip(verts, dirs)}
        segs = np.array([[coords[u], coords[w]] for u, w in cells])
        parity, degenerate = _crossings(segs, simps, scale)
        if not degenerate:
            return parity
    raise NonTransverseError("non-transverse configuration")


def _point_simplex_distance(x: np.ndarray, simps: np.ndarray) -> float:
    n = x.shape[0]
    if n == 2:
        a, b = simps[:, 0], simps[:, 1]
        return float(np.min(_point_segment_distance(x, a, b)))
    a, b, c = simps[:, 0], simps[:, 1], simps[:, 2]
    normal = np.cross(b - a, c - a)
    nn = np.linalg.norm(normal, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = normal / nn[:, None]
    dist_plane = np.einsum("ij,ij->i", x - a, unit)
    proj = x - dist_plane[:, None] * unit
    # barycentric test for the projected point
    v0, v1, v2 = b - a, c - a, proj - a
    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    den = d00 * d11 - d01 * d01
    with np.errstate(invalid="ignore", divide="ignore"):
        s = (d11 * d20 - d01 * d21) / den
        t = (d00 * d21 - d01 * d20) / den
    inside = (s >= 0) & (t >= 0) & (s + t <= 1) & (nn > 0)
    edge = np.minimum.reduce([
        _point_segment_distance(x, a, b),
        _point_segment_distance(x, b, c),
        _point_segment_distance(x, c, a),
    ])
    return float(np.min(np.where(inside, np.abs(dist_plane), edge)))


def _point_segment_distance(x, a, b):
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(np.einsum("ij,ij->i", x - a, d) / dd, 0.0, 1.0)
    t = np.where(dd > 0, t, 0.0)
    return np.linalg.norm(a + t[:, None] * d - x, axis=1)


def exterior_point(surface: PLChain, seed: int, near: Sequence[float] | None = None) -> np.ndarray:
    """A random point well outside the bounding box of ``surface`` (and ``near``)."""
    lo, hi = surface.bbox()
    pts = [lo, hi] + ([np.asarray(near, dtype=float)] if near is not None else [])
    lo, hi = np.min(pts, axis=0), np.max(pts, axis=0)
    center = (lo + hi) / 2
    radius = float(np.linalg.norm(hi - lo)) or 1.0
    rng = np.random.default_rng(seed)
    d = rng.normal(size=len(center))
    d /= np.linalg.norm(d)
    return center + (1.5 + rng.random()) * radius * d


def linking_point(surface: PLChain, probe: NormalZeroCycle, ray_seed: int = 0, max_rays: int = 16) -> int:
    """Lk(surface, near - far) as the crossing parity of the segment near -> far.

    If that segment is degenerate against the surface, the far point is
    re-drawn from ``ray_seed``.
    """
    n = surface.ambient_dim
    if surface.dim != n - 1:
        raise ValueError(f"surface must be an {n - 1}-chain in R^{n}")
    if not is_cycle(surface.host, surface.chain):
        raise ValueError("input chain is not a cycle")
    near = np.asarray(probe.near, dtype=float)
    far = np.asarray(probe.far, dtype=float)
    simps = surface.simplices()
    lo, hi = surface.bbox()
    scale = float(np.linalg.norm(hi - lo)) or 1.0
    for p in (near, far):
        if _point_simplex_distance(p, simps) <= GUARD * 1e3 * scale:
            raise ValueError("probe on chain support")
    if np.all((far >= lo) & (far <= hi)):
        raise ValueError("far point must lie outside the surface's bounding box")
    for attempt in range(max_rays):
        seg = np.array([[near, far]])
        parity, degenerate = _crossings(seg, simps, max(scale, float(np.linalg.norm(far - near))))
        if not degenerate:
            return parity
        far = exterior_point(surface, ray_seed * 1009 + attempt, near)
    raise NonTransverseError("non-transverse configuration")


def linking_cycles(x: PLChain, y: PLChain, seed: int = 0,
                   ambient: SimplicialComplex | None = None) -> int:
    """Lk(x, y) = #(Z, y) for a bounding chain Z of x found by the GF(2) solver.

    ``x`` is an (n-2)-cycle and ``y`` a 1-cycle in R^n.  Without ``ambient``
    the solver works in the union of two cones over ``x`` with apexes drawn
    from ``seed``, which always contains a bounding chain.
    """
    n = x.ambient_dim
    if y.ambient_dim != n or n not in (2, 3):
        raise ValueError("cycles must live in the same R^2 or R^3")
    if x.dim != n - 2 or y.dim != 1:
        raise ValueError(f"need an {n - 2}-cycle and a 1-cycle in R^{n}")
    if x.dim == 0:
        if len(x.chain) % 2:
            raise ValueError("input chain is not a cycle")
    elif not is_cycle(x.host, x.chain):
        raise ValueError("input chain is not a cycle")
    if not is_cycle(y.host, y.chain):
        raise ValueError("input chain is not a cycle")
    cells = x.chain.cells(x.host)
    if ambient is None:
        ambient = _double_cone(x, y, seed)
    z_chain = solve_bounding_chain(ambient, Z2Chain.from_cells(ambient, cells, dim=x.dim), seed=seed)
    if z_chain is None:
        raise ValueError("ambient complex too small")
    return intersection_mod2(y, PLChain(ambient, z_chain), seed=seed)


def _double_cone(x: PLChain, y: PLChain, seed: int) -> SimplicialComplex:
    cells = x.chain.cells(x.host)
    lo = np.min([x.bbox()[0], y.bbox()[0]], axis=0)
    hi = np.max([x.bbox()[1], y.bbox()[1]], axis=0)
    center = (lo + hi) / 2
    radius = float(np.linalg.norm(hi - lo)) or 1.0
    rng = np.random.default_rng(seed)
    top = max(x.vertex_ids()) + 1
    apexes = {}
    for k in range(2):
        d = rng.normal(size=len(center))
        d /= np.linalg.norm(d)
        apexes[top + k] = center + (0.3 + 0.9 * rng.random()) * radius * d
    simplices = list(cells) + [tuple(c) + (a,) for c in cells for a in apexes]
    coords = {v: x.host.coords[v] for v in x.vertex_ids()}
    coords.update(apexes)
    return SimplicialComplex.from_simplices(simplices, coords)
