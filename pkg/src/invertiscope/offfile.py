"""ASCII OFF import/export for complexes that carry coordinates.

Faces are the top-dimensional cells of dimension 1 or 2 (polylines are
written as two-vertex faces).  Points are padded to three coordinates.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO

import numpy as np

from .complexes import SimplicialComplex


def write_off(complex: SimplicialComplex, dest: str | Path | TextIO) -> None:
    if complex.coords is None:
        raise ValueError("no geometric realization")
    if complex.dim > 2:
        raise ValueError("OFF export supports complexes of dimension <= 2")
    verts = complex.vertices()
    pos = {v: i for i, v in enumerate(verts)}
    faces = _maximal_cells(complex)
    n_edges = complex.n_cells(1)
    lines = ["OFF", f"{len(verts)} {len(faces)} {n_edges}"]
    for v in verts:
        p = list(complex.coords[v]) + [0.0] * (3 - len(complex.coords[v]))
        lines.append(" ".join(repr(float(x)) for x in p))
    for f in faces:
        lines.append(" ".join([str(len(f))] + [str(pos[v]) for v in f]))
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)


def _maximal_cells(complex: SimplicialComplex) -> list[tuple[int, ...]]:
    """Cells of dim >= 1 that are not a face of anything larger."""
    out = []
    for k in range(1, complex.dim + 1):
        for i, s in enumerate(complex.cells_of(k)):
            if k == complex.dim or not complex.cofaces(k, i):
                out.append(s)
    return out


def read_off(src: str | Path | TextIO, ambient_dim: int | None = None) -> SimplicialComplex:
    """Parse an OFF file; ``ambient_dim=2`` drops the z coordinate."""
    if isinstance(src, Path) or (isinstance(src, str) and "\n" not in src):
        text = Path(src).read_text()
    elif isinstance(src, str):
        text = src
    else:
        text = src.read()
    tokens = []
    for raw in io.StringIO(text):
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append(line)
    if not tokens or not tokens[0].startswith("OFF"):
        raise ValueError("missing OFF header")
    header = tokens[0][3:].split() or tokens.pop(1).split()
    try:
        nv, nf = int(header[0]), int(header[1])
    except (IndexError, ValueError) as exc:
        raise ValueError("bad OFF counts line") from exc
    body = tokens[1:]
    if len(body) < nv + nf:
        raise ValueError("OFF file truncated")
    pts = np.array([[float(x) for x in body[i].split()[:3]] for i in range(nv)])
    if ambient_dim is not None:
        pts = pts[:, :ambient_dim]
    faces = []
    for line in body[nv:nv + nf]:
        parts = [int(x) for x in line.split()]
        k = parts[0]
        face = parts[1:1 + k]
        if len(face) != k or any(not (0 <= v < nv) for v in face):
            raise ValueError(f"bad face line {line!r}")
        if k > 3:
            # polygons are fan-triangulated
            faces.extend([face[0], face[i], face[i + 1]] for i in range(1, k - 1))
        else:
            faces.append(face)
    used = {v for f in faces for v in f}
    isolated = [(v,) for v in range(nv) if v not in used]
    return SimplicialComplex.from_simplices(faces + isolated, {i: pts[i] for i in range(nv)})
