"""Grid estimates of the Hadamard-Plastock and Nollet-Xavier infima (Euclidean metric)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .levelsets import as_box
from .mapdsl import MapSpec, jacobian


@dataclass(frozen=True)
class BoundEstimate:
    value: float
    argmin_point: tuple[float, ...]
    samples: int
    box: tuple[tuple[float, float], ...]
    direction: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "argmin_point": list(self.argmin_point),
            "samples": self.samples,
            "box": [list(b) for b in self.box],
        }
        if self.direction is not None:
            out["direction"] = list(self.direction)
        return out


def _grid_points(box, grid_resolution: int) -> np.ndarray:
    if grid_resolution < 4:
        raise ValueError("grid_resolution must be at least 4 per axis")
    box = as_box(box)
    axes = [np.linspace(lo, hi, grid_resolution + 1) for lo, hi in box]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(box))


def smallest_singular_value(jac: np.ndarray) -> np.ndarray:
    """sigma_min of each 2x2 or 3x3 matrix from the eigenvalues of J^T J in closed form."""
    jac = np.asarray(jac, dtype=float)
    n = jac.shape[-1]
    gram = np.einsum("...ki,...kj->...ij", jac, jac)
    if n == 2:
        a, b, d = gram[..., 0, 0], gram[..., 0, 1], gram[..., 1, 1]
        tr = a + d
        det = (jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]) ** 2
        disc = np.sqrt(np.maximum((a - d) ** 2 + 4 * b * b, 0.0))
        lam_max = 0.5 * (tr + disc)
        with np.errstate(invalid="ignore", divide="ignore"):
            lam_min = np.where(lam_max > 0, det / lam_max, 0.0)
    elif n == 3:
        lam_min = _sym3_min_eig(gram)
    elif n == 1:
        lam_min = gram[..., 0, 0]
    else:
        raise ValueError("only n <= 3 supported")
    return np.sqrt(np.maximum(lam_min, 0.0))


def _sym3_min_eig(a: np.ndarray) -> np.ndarray:
    # trigonometric solution for symmetric 3x3 matrices
    p1 = a[..., 0, 1] ** 2 + a[..., 0, 2] ** 2 + a[..., 1, 2] ** 2
    q = np.trace(a, axis1=-2, axis2=-1) / 3
    p2 = (a[..., 0, 0] - q) ** 2 + (a[..., 1, 1] - q) ** 2 + (a[..., 2, 2] - q) ** 2 + 2 * p1
    p = np.sqrt(p2 / 6)
    eye = np.eye(3)
    with np.errstate(invalid="ignore", divide="ignore"):
        b = (a - q[..., None, None] * eye) / p[..., None, None]
        r = np.clip(np.linalg.det(b) / 2, -1.0, 1.0)
    phi = np.arccos(r) / 3
    lam_min = q + 2 * p * np.cos(phi + 2 * np.pi / 3)
    return np.where(p > 0, lam_min, q)


def hadamard_bound(m: MapSpec, box, grid_resolution: int) -> BoundEstimate:
    """min over grid nodes of sigma_min(Df(x)) = ||Df(x)^{-1}||^{-1}."""
    pts = _grid_points(box, grid_resolution)
    sig = smallest_singular_value(jacobian(m, pts))
    i = int(np.argmin(sig))
    return BoundEstimate(float(sig[i]), tuple(map(float, pts[i])), len(pts), as_box(box))


def nollet_xavier_bound(m: MapSpec, v: Sequence[float], box, grid_resolution: int) -> BoundEstimate:
    """min over grid nodes of ||Df(x)^T v|| for a unit vector v."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("v must be a unit vector")
    pts = _grid_points(box, grid_resolution)
    jac = jacobian(m, pts)
    norms = np.linalg.norm(np.einsum("...ij,i->...j", jac, v), axis=-1)
    i = int(np.argmin(norms))
    return BoundEstimate(float(norms[i]), tuple(map(float, pts[i])), len(pts), as_box(box),
                         tuple(map(float, v)))

