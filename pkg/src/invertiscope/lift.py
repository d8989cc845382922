"""Numerical maximal lifts of straight lines through a local diffeomorphism.

The lift solves f(gamma(t)) = f(x0) + t*w.  Each step integrates
gamma' = Df(gamma)^{-1} w with classical RK4 and then applies at most three
Newton corrections back onto the exact constraint.  Steps that fail are
halved.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .mapdsl import MapSpec, evaluate_with_jacobian

SINGULAR_DET = 1e-12
COMPLETED = "Completed"
LEFT_BOX = "LeftBox"
STEP_COLLAPSE = "StepCollapse"
SINGULAR = "SingularJacobian"


class _Singular(Exception):
    pass


@dataclass(frozen=True)
class LiftStatus:
    kind: str
    t: float

    def __str__(self) -> str:
        return f"{self.kind}({self.t:.12g})"


@dataclass
class LiftResult:
    ts: list[float] = field(default_factory=list)
    points: list[np.ndarray] = field(default_factory=list)
    status: LiftStatus = LiftStatus(COMPLETED, 0.0)
    drift: float = 0.0

    @property
    def path(self) -> np.ndarray:
        return np.column_stack([self.ts, np.array(self.points)])

    def write_csv(self, dest: str | Path | TextIO) -> None:
        n = len(self.points[0]) if self.points else 0
        header = ["t"] + [f"x{i + 1}" for i in range(n)]
        if isinstance(dest, (str, Path)):
            with open(dest, "w", newline="") as fh:
                self._write(csv.writer(fh), header)
        else:
            self._write(csv.writer(dest), header)

    def _write(self, w, header) -> None:
        w.writerow(header)
        for t, p in zip(self.ts, self.points):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in p])


def _inside(x: np.ndarray, box) -> bool:
    return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, box))


def lift_line(m: MapSpec, x0: Sequence[float], w: Sequence[float], t_max: float, box,
              tol: float = 1e-9, h0: float | None = None) -> LiftResult:
    """Follow the lift of t -> f(x0) + t*w for t in [0, t_max].

    Terminates as Completed, LeftBox (at the exit parameter), StepCollapse
    (step below 1e-12*t_max) or SingularJacobian.
    """
    x = np.asarray(x0, dtype=float)
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        raise ValueError("direction w must be nonzero")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if not _inside(x, box):
        raise ValueError("x0 outside the box")
    p0, jac = evaluate_with_jacobian(m, x)
    if abs(np.linalg.det(jac)) <= SINGULAR_DET:
        raise ValueError("Df(x0) is singular")

    def fj(y):
        val, jj = evaluate_with_jacobian(m, y)
        if not np.all(np.isfinite(val)) or abs(np.linalg.det(jj)) < SINGULAR_DET:
            raise _Singular(y)
        return val, jj

    def velocity(y):
        return np.linalg.solve(fj(y)[1], w)

    h_init = t_max / 1024 if h0 is None else h0
    # accepted steps may double up to this cap; Newton keeps the residual at tol regardless
    h_max = max(h_init, t_max / 128)
    h_min = 1e-12 * t_max
    result = LiftResult([0.0], [x.copy()])
    drift = 0.0
    t, h = 0.0, h_init
    while True:
        if t >= t_max:
            result.status = LiftStatus(COMPLETED, t)
            break
        last = h >= t_max - t
        h = min(h, t_max - t)
        try:
            k1 = velocity(x)
            k2 = velocity(x + 0.5 * h * k1)
            k3 = velocity(x + 0.5 * h * k2)
            k4 = velocity(x + h * k3)
            y_pred = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            y, resid = _newton(fj, y_pred, p0 + (t + h) * w, tol)
        except _Singular as exc:
            stuck = np.asarray(exc.args[0])
            if not _inside(stuck, box):
                if h / 2 < h_min:
                    result.status = LiftStatus(LEFT_BOX, t + h)
                    break
                ok = False
            else:
                if h / 2 >= h_min:
                    h /= 2
                    continue
                result.status = LiftStatus(SINGULAR, t)
                break
        else:
            step = np.linalg.norm(y_pred - x)
            ok = resid <= tol and np.linalg.norm(y - y_pred) <= 0.25 * step + 10 * tol
            if ok and not _inside(y, box):
                if h / 2 < h_min:
                    result.status = LiftStatus(LEFT_BOX, t + h)
                    break
                ok = False
            if ok:
                t = t_max if last else t + h
                x = y
                drift = max(drift, resid)
                result.ts.append(t)
                result.points.append(x.copy())
                h = min(2 * h, h_max)
                continue
        if h / 2 < h_min:
            result.status = LiftStatus(STEP_COLLAPSE, t)
            break
        h /= 2
    result.drift = drift
    return result


def _newton(fj, y, target, tol, iters: int = 3):
    val, jac = fj(y)
    resid = float(np.linalg.norm(val - target))
    for _ in range(iters):
        if resid <= tol:
            break
        y = y - np.linalg.solve(jac, val - target)
        val, jac = fj(y)
        resid = float(np.linalg.norm(val - target))
    return y, resid
