"""Sampled-hyperplane analysis of a map and its JSON/text report.

A bijective local diffeomorphism of R^n has non-empty, acyclic preimages of
all affine hyperplanes, and conversely.  The analysis only sees finitely
many hyperplanes inside a box, so verdicts are phrased as evidence:

* an empty preimage (confirmed on an enlarged box) is evidence against
  surjectivity;
* a closed component, or components that stay apart on an enlarged box,
  is evidence against injectivity;
* otherwise the map is reported as consistent with being bijective.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Any, Sequence

import numpy as np

from .bounds import hadamard_bound, nollet_xavier_bound
from .levelsets import (GridSample, LevelSetMesh, as_box, extract_from_values,
                        sample_grid, topology_summary)
from .lift import lift_line
from .mapdsl import MapDomainError, MapSpec, corpus, evaluate, jacobian, to_source

CONSISTENT = "ConsistentWithBijective"
NOT_SURJECTIVE = "NotSurjectiveEvidence"
NOT_INJECTIVE = "NotInjectiveEvidence"
LOCAL_DIFFEO_VIOLATED = "LocalDiffeoViolated"
INCONCLUSIVE = "Inconclusive"
VERDICTS = (CONSISTENT, NOT_SURJECTIVE, NOT_INJECTIVE, LOCAL_DIFFEO_VIOLATED, INCONCLUSIVE)

REPORT_VERSION = "1.0"


@dataclass
class AnalysisConfig:
    box: tuple[tuple[float, float], ...]
    grid_resolution: int = 64
    directions: int = 16
    offsets: int = 9
    lift_directions: int = 8
    lift_tol: float = 1e-9
    lift_t_max: float | None = None
    det_eps: float = 1e-10
    bound_resolution: int | None = None
    confirm_scale: float = 2.0
    extra_hyperplanes: list = field(default_factory=list)
    seed: int = 0

    @classmethod
    def for_dimension(cls, n: int, box=None, **kw) -> "AnalysisConfig":
        if box is None:
            box = ((-2.0, 2.0),) * n
        if n == 3:
            kw.setdefault("grid_resolution", 16)
            kw.setdefault("directions", 64)
        return cls(box=as_box(box), **kw)

    def validate(self, n: int) -> None:
        self.box = as_box(self.box)
        if len(self.box) != n:
            raise ValueError(f"box has {len(self.box)} axes but the map has n={n}")
        for name in ("directions", "offsets", "lift_directions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.grid_resolution < 8:
            raise ValueError("grid_resolution must be >= 8")
        if self.confirm_scale <= 1:
            raise ValueError("confirm_scale must exceed 1")
        for v, _c in self.extra_hyperplanes:
            if len(v) != n or not np.any(v):
                raise ValueError(f"bad extra hyperplane normal {v}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box"] = [list(b) for b in self.box]
        d["extra_hyperplanes"] = [[list(map(float, v)), float(c)] for v, c in self.extra_hyperplanes]
        return d


@dataclass
class Report:
    map: dict
    config: dict
    det_scan: dict
    samples: list
    lifts: list
    bounds: dict | None
    verdict: str
    supporting: list
    version: str = REPORT_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def sample_directions(n: int, count: int) -> np.ndarray:
    """Uniform angles on a half circle (n=2) or a Fibonacci upper hemisphere (n=3).

    v and -v give the same family of hyperplanes, so half the sphere suffices.
    """
    if n == 2:
        ang = np.pi * np.arange(count) / count
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        # cos(pi/2) is 6e-17 in floating point; report axis directions exactly
        dirs[np.abs(dirs) < 1e-15] = 0.0
        return dirs
    if n == 3:
        i = np.arange(count)
        z = 1.0 - (i + 0.5) / count
        r = np.sqrt(1 - z * z)
        phi = i * np.pi * (3 - math.sqrt(5))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise ValueError("n must be 2 or 3")


def lift_directions(n: int, count: int, seed: int) -> np.ndarray:
    """Unit directions over the full circle/sphere with a seeded rotation."""
    rng = np.random.default_rng(seed)
    if n == 2:
        ang = 2 * np.pi * (np.arange(count) + rng.random()) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    i = np.arange(count)
    z = 1.0 - 2 * (i + 0.5) / count
    r = np.sqrt(1 - z * z)
    phi = i * np.pi * (3 - math.sqrt(5)) + 2 * np.pi * rng.random()
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def scaled_box(box, factor: float):
    return tuple(((lo + hi) / 2 - factor * (hi - lo) / 2, (lo + hi) / 2 + factor * (hi - lo) / 2)
                 for lo, hi in box)


def _floats(x) -> list[float]:
    return [float(v) for v in x]


class _Analysis:
    def __init__(self, m: MapSpec, cfg: AnalysisConfig):
        self.m = m
        self.cfg = cfg
        self._grids: dict[str, GridSample | None] = {}

    def grid(self, which: str) -> GridSample | None:
        """'base', 'enlarged' (same cell count) or 'fine' (enlarged, same spacing)."""
        if which not in self._grids:
            cfg = self.cfg
            if which == "base":
                box, res = cfg.box, cfg.grid_resolution
            elif which == "enlarged":
                box, res = scaled_box(cfg.box, cfg.confirm_scale), cfg.grid_resolution
            else:
                box = scaled_box(cfg.box, cfg.confirm_scale)
                res = int(round(cfg.grid_resolution * cfg.confirm_scale))
            try:
                g = sample_grid(self.m, box, res)
                if not np.all(np.isfinite(g.values)):
                    g = None
            except MapDomainError:
                g = None
            self._grids[which] = g
        return self._grids[which]

    def mesh(self, which: str, v, c) -> LevelSetMesh:
        g = self.grid(which)
        return extract_from_values(g.heights(v) - c, g.axes, g.box)

    def persistent_components(self, mesh: LevelSetMesh, v, c) -> int | None:
        """Number of distinct components of the fine enlarged mesh met by ``mesh``'s components."""
        big_grid = self.grid("fine")
        if big_grid is None:
            return None
        big = extract_from_values(big_grid.heights(v) - c, big_grid.axes, big_grid.box)
        if big.complex.is_empty():
            return None
        big_ids = np.array(big.complex.vertices())
        big_pts = np.array([big.complex.coords[i] for i in big_ids])
        owner = {}
        for k, comp in enumerate(big.components):
            for vid in comp:
                owner[vid] = k
        hit = set()
        for comp in mesh.components:
            p = mesh.complex.coords[comp[0]]
            j = int(np.argmin(np.linalg.norm(big_pts - p, axis=1)))
            hit.add(owner[int(big_ids[j])])
        return len(hit)


def _det_scan(m: MapSpec, grid: GridSample, eps: float) -> dict:
    pts = grid.points().reshape(-1, m.n)
    det = np.linalg.det(jacobian(m, pts))
    i = int(np.argmin(np.abs(det)))
    min_abs = float(abs(det[i]))
    sign_change = bool(np.any(det > 0) and np.any(det < 0))
    return {
        "min_abs_det": min_abs,
        "argmin_point": _floats(pts[i]),
        "sign_change": sign_change,
        "samples": int(len(det)),
        "violated": bool(sign_change or min_abs < eps or not np.all(np.isfinite(det))),
    }


def analyze(m: MapSpec, cfg: AnalysisConfig) -> Report:
    cfg.validate(m.n)
    run = _Analysis(m, cfg)
    map_info = {"name": m.name, "n": m.n, "source": to_source(m)}
    supporting: list[dict] = []

    grid = run.grid("base")
    if grid is None:
        return Report(map_info, cfg.to_dict(), {"violated": False, "error": "map not finite on grid"},
                      [], [], None, INCONCLUSIVE,
                      [{"v": None, "c": None, "finding": "map evaluation failed on the analysis grid"}])
    det_scan = _det_scan(m, grid, cfg.det_eps)
    if det_scan["violated"]:
        finding = "det Df changes sign" if det_scan["sign_change"] else "det Df nearly zero"
        supporting.append({"v": None, "c": None, "finding": f"{finding} near {det_scan['argmin_point']}"})
        return Report(map_info, cfg.to_dict(), det_scan, [], [], None, LOCAL_DIFFEO_VIOLATED, supporting)

    samples = []
    planes: list[tuple[np.ndarray, float]] = []
    for v in sample_directions(m.n, cfg.directions):
        h = grid.heights(v)
        lo, hi = float(h.min()), float(h.max())
        pad = 0.1 * (hi - lo)
        cs = [0.5 * (lo + hi)] if cfg.offsets == 1 else np.linspace(lo - pad, hi + pad, cfg.offsets)
        planes.extend((v, float(c)) for c in cs)
    for v, c in cfg.extra_hyperplanes:
        v = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(v))
        planes.append((v / norm, float(c) / norm))

    for v, c in planes:
        rec = _analyze_plane(run, v, c)
        samples.append(rec)
        if rec["finding"] in ("empty_preimage", "closed_loop", "disconnected"):
            supporting.append({"v": rec["v"], "c": rec["c"], "finding": rec["finding"]})

    lifts = _run_lifts(m, cfg, grid)
    bounds = {
        "condition": "euclidean",
        "hadamard": hadamard_bound(m, cfg.box, cfg.bound_resolution or cfg.grid_resolution).to_dict(),
        "nollet_xavier": [
            {"v": _floats(v), **_nx(m, v, cfg)} for v in sample_directions(m.n, cfg.directions)
        ],
    }
    findings = {s["finding"] for s in supporting}
    if findings & {"closed_loop", "disconnected"}:
        verdict = NOT_INJECTIVE
    elif "empty_preimage" in findings:
        verdict = NOT_SURJECTIVE
    elif samples and all(s["error"] for s in samples):
        verdict = INCONCLUSIVE
    else:
        verdict = CONSISTENT
    return Report(map_info, cfg.to_dict(), det_scan, samples, lifts, bounds, verdict, supporting)


def _nx(m, v, cfg) -> dict:
    est = nollet_xavier_bound(m, v, cfg.box, cfg.bound_resolution or cfg.grid_resolution)
    return {"value": est.value, "argmin_point": list(est.argmin_point)}


def _analyze_plane(run: _Analysis, v: np.ndarray, c: float) -> dict:
    rec: dict[str, Any] = {
        "v": _floats(v), "c": float(c), "nonempty": False, "betti": [0], "components": 0,
        "loops": 0, "boundary_touching": 0, "box_used": "base", "confirmed_empty": False,
        "persistent_components": None, "finding": "ok", "error": None,
    }
    try:
        mesh = run.mesh("base", v, c)
        if mesh.complex.is_empty():
            big = run.grid("enlarged")
            if big is None:
                rec["finding"] = "empty_in_box"
                return rec
            h = big.heights(v)
            if c < h.min() or c > h.max():
                rec["confirmed_empty"] = True
                rec["finding"] = "empty_preimage"
                return rec
            mesh = run.mesh("enlarged", v, c)
            rec["box_used"] = "enlarged"
        summary = topology_summary(mesh)
        rec.update(nonempty=summary.nonempty, betti=summary.betti.as_list(),
                   components=summary.components, loops=summary.closed_loops,
                   boundary_touching=summary.boundary_touching_components)
        if summary.closed_loops:
            rec["finding"] = "closed_loop"
        elif summary.components >= 2:
            persistent = run.persistent_components(mesh, v, c)
            rec["persistent_components"] = persistent
            rec["finding"] = "disconnected" if persistent and persistent >= 2 else "clipped_disconnection"
        elif any(b for b in summary.betti.b[1:]):
            rec["finding"] = "clipped_cycle"
    except (ValueError, ArithmeticError) as exc:
        rec["error"] = str(exc)
        rec["finding"] = "error"
    return rec


def _run_lifts(m: MapSpec, cfg: AnalysisConfig, grid: GridSample) -> list[dict]:
    center = np.array([(lo + hi) / 2 for lo, hi in cfg.box])
    out = []
    try:
        p0 = evaluate(m, center)
    except MapDomainError as exc:
        return [{"w": None, "status": "error", "t_exit": None, "drift": None, "error": str(exc)}]
    vals = grid.values.reshape(-1, m.n)
    t_max = cfg.lift_t_max or 2.0 * float(np.max(np.linalg.norm(vals - p0, axis=1)))
    for w in lift_directions(m.n, cfg.lift_directions, cfg.seed):
        rec: dict[str, Any] = {"w": _floats(w), "status": None, "t_exit": None, "drift": None, "error": None}
        try:
            res = lift_line(m, center, w, t_max, cfg.box, tol=cfg.lift_tol)
            rec.update(status=res.status.kind, t_exit=float(res.status.t), drift=float(res.drift))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            rec.update(status="error", error=str(exc))
        out.append(rec)
    return out


def corpus_configs() -> dict[str, AnalysisConfig]:
    sq2 = ((-2.0, 2.0),) * 2
    return {
        "identity": AnalysisConfig(sq2),
        "linear_2i": AnalysisConfig(sq2),
        "exp_polar": AnalysisConfig(((-4.0, 4.0),) * 2, grid_resolution=128,
                                    extra_hyperplanes=[([1.0, 0.0], 0.0)]),
        "slab": AnalysisConfig(sq2, extra_hyperplanes=[([0.0, 1.0], 2.0)]),
        "rotation": AnalysisConfig(sq2),
        "shear": AnalysisConfig(sq2),
        "identity3": AnalysisConfig(((-1.0, 1.0),) * 3, grid_resolution=12, directions=16, offsets=5),
        "exp_cylinder": AnalysisConfig(((-2.0, 2.0),) * 3, grid_resolution=16, directions=16,
                                       offsets=5, extra_hyperplanes=[([1.0, 0.0, 0.0], 0.0)]),
    }


def run_corpus(names: Sequence[str] | None = None) -> dict[str, Report]:
    maps = corpus()
    cfgs = corpus_configs()
    out = {}
    for name in names or list(maps):
        out[name] = analyze(maps[name], cfgs[name])
    return out


def emit_report(report: Report, format: str = "json") -> str:
    if format == "json":
        return report.to_json()
    if format == "text":
        return _text(report)
    raise ValueError(f"unknown format {format!r}")


def _text(r: Report) -> str:
    lines = [f"map {r.map['name']} (n={r.map['n']})", f"verdict: {r.verdict}"]
    ds = r.det_scan
    if "min_abs_det" in ds:
        lines.append(f"det scan: min |det Df| = {ds['min_abs_det']:.4g}"
                     f"{', sign change' if ds['sign_change'] else ''}")
    if r.samples:
        ok = sum(1 for s in r.samples if s["finding"] == "ok")
        lines.append(f"hyperplanes sampled: {len(r.samples)} ({ok} nonempty and acyclic in box)")
    for s in r.supporting:
        where = "" if s["v"] is None else f" v={_fmt(s['v'])} c={s['c']:.6g}"
        lines.append(f"  evidence:{where} {s['finding']}")
    if r.lifts:
        kinds: dict[str, int] = {}
        for l in r.lifts:
            kinds[l["status"]] = kinds.get(l["status"], 0) + 1
        lines.append("lifts: " + ", ".join(f"{k} x{n}" for k, n in sorted(kinds.items())))
    if r.bounds:
        nx = min(b["value"] for b in r.bounds["nollet_xavier"])
        lines.append(f"hadamard bound (euclidean, sampled): {r.bounds['hadamard']['value']:.6g}")
        lines.append(f"min nollet-xavier bound over directions: {nx:.6g}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.4g}" for x in v) + ")"


def report_schema() -> dict:
    text = resources.files("invertiscope").joinpath("data/report.schema.json").read_text()
    return json.loads(text)
