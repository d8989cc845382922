"""``invertiscope`` command line.

Exit codes: 0 when the analysis ran, 2 when the map is not a local
diffeomorphism on the box, 3 for invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .assembly import demo_assembly
from .complexes import SimplicialComplex
from .levelsets import Hyperplane, extract_levelset, topology_summary
from .lift import lift_line
from .mapdsl import MapDomainError, MapSpec, MapSyntaxError, corpus, load_map, parse_map
from .offfile import read_off, write_off
from .report import (LOCAL_DIFFEO_VIOLATED, AnalysisConfig, analyze, corpus_configs, emit_report,
                     run_corpus, scaled_box)
from .z2chains import betti

EXIT_OK, EXIT_NOT_LOCAL_DIFFEO, EXIT_INVALID = 0, 2, 3
MAX_FIGURES = 12

log = logging.getLogger("invertiscope")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*args, **kw)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# flags whose values commonly start with a minus sign ("-2:2,...", "-1,0")
_VECTOR_FLAGS = ("--box", "--v", "--w", "--x0", "--hyperplane")


def _glue_vector_flags(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VECTOR_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def parse_box(text: str) -> tuple[tuple[float, float], ...]:
    """``lo:hi,lo:hi[,lo:hi]`` or a flat ``lo,hi,lo,hi,...`` list."""
    if ":" in text:
        axes = []
        for part in text.split(","):
            lo, _, hi = part.partition(":")
            axes.append((float(lo), float(hi)))
    else:
        vals = _floats(text)
        if len(vals) % 2:
            raise InputError(f"box needs an even number of bounds: {text!r}")
        axes = list(zip(vals[::2], vals[1::2]))
    for lo, hi in axes:
        if not lo < hi:
            raise InputError(f"degenerate box axis [{lo}, {hi}]")
    return tuple(axes)


def _global_flags(argument_default=None) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argument_default, allow_abbrev=False)
    p.add_argument("--map-file", help="map definition file")
    p.add_argument("--map-inline", help="map source text, or a built-in corpus name")
    p.add_argument("--box", help="analysis box, e.g. -2:2,-2:2")
    p.add_argument("--res", type=int, help="grid cells per axis")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--out", help="output file (or directory for corpus)")
    p.add_argument("--format", choices=["json", "text"], help="report format")
    p.add_argument("--svg", help="write an SVG figure to this path (directory for analyze)")
    return p


_DEFAULTS = {"map_file": None, "map_inline": None, "box": None, "res": None, "seed": 0,
             "out": None, "format": "json", "svg": None}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="invertiscope", parents=[_global_flags()],
                     description="Sampled-hyperplane invertibility analysis of maps R^n -> R^n.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    flags = _global_flags(argparse.SUPPRESS)

    p = sub.add_parser("analyze", parents=[flags], help="full report for one map")
    p.add_argument("--directions", type=int)
    p.add_argument("--offsets", type=int)
    p.add_argument("--lift-directions", type=int)
    p.add_argument("--hyperplane", action="append", default=[], metavar="V:C",
                   help="extra hyperplane, e.g. 0,1:2 (repeatable)")

    p = sub.add_parser("levelset", parents=[flags], help="topology of one hyperplane preimage")
    p.add_argument("--v", required=True, help="normal vector, e.g. 1,0")
    p.add_argument("--c", type=float, required=True, help="offset")
    p.add_argument("--off", help="write the extracted mesh as OFF")

    p = sub.add_parser("lift", parents=[flags], help="lift a line through the map")
    p.add_argument("--x0", help="start point (default: box center)")
    p.add_argument("--w", required=True, help="line direction in the target")
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("homology", parents=[flags], help="Betti numbers of an OFF mesh")
    p.add_argument("off_file", nargs="?")
    p.add_argument("--assemble-demo", action="store_true",
                   help="run the cylinder assembly demo and dump its trace")

    sub.add_parser("corpus", parents=[flags], help="analyze every built-in map")
    return parser


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    for k, v in _DEFAULTS.items():
        if getattr(args, k, None) is None:
            setattr(args, k, v)
    return args


def _load_map(args) -> MapSpec:
    if args.map_file and args.map_inline:
        raise InputError("give only one of --map-file and --map-inline")
    if args.map_file:
        path = Path(args.map_file)
        try:
            return parse_map(path.read_text(), path.stem)
        except OSError as exc:
            raise InputError(f"cannot read map file: {exc}") from None
    if args.map_inline:
        return load_map(args.map_inline)
    raise InputError("a map is required (--map-file or --map-inline)")


def _box(args, n: int):
    if args.box:
        box = parse_box(args.box)
        if len(box) != n:
            raise InputError(f"box has {len(box)} axes but the map has n={n}")
        return box
    return ((-2.0, 2.0),) * n


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_analyze(args) -> int:
    m = _load_map(args)
    kw = {"seed": args.seed}
    if args.res:
        kw["grid_resolution"] = args.res
    for name in ("directions", "offsets", "lift_directions"):
        if getattr(args, name):
            kw[name] = getattr(args, name)
    extras = []
    for spec in args.hyperplane:
        v, _, c = spec.partition(":")
        if not c:
            raise InputError(f"hyperplane must look like V:C, got {spec!r}")
        extras.append((_floats(v), float(c)))
    cfg = AnalysisConfig.for_dimension(m.n, _box(args, m.n), extra_hyperplanes=extras, **kw)
    report = analyze(m, cfg)
    _write(emit_report(report, args.format), args.out)
    if args.svg and m.n == 2 and report.samples:
        _analysis_figures(m, cfg, report, Path(args.svg))
    return EXIT_NOT_LOCAL_DIFFEO if report.verdict == LOCAL_DIFFEO_VIOLATED else EXIT_OK


def _analysis_figures(m, cfg, report, outdir: Path) -> None:
    from .plotting import plot_levelset

    outdir.mkdir(parents=True, exist_ok=True)
    chosen = [s for s in report.supporting if s["v"] is not None] or [report.samples[len(report.samples) // 2]]
    for i, s in enumerate(chosen[:MAX_FIGURES]):
        box = cfg.box
        rec = next((r for r in report.samples if r["v"] == s["v"] and r["c"] == s["c"]), None)
        if rec and rec["box_used"] == "enlarged":
            box = scaled_box(box, cfg.confirm_scale)
        mesh = extract_levelset(m, Hyperplane.normalized(s["v"], s["c"]), box, cfg.grid_resolution)
        plot_levelset(mesh, outdir / f"levelset_{i:02d}.svg",
                      title=f"v=({s['v'][0]:.3g}, {s['v'][1]:.3g})  c={s['c']:.3g}")


def cmd_levelset(args) -> int:
    m = _load_map(args)
    v = _floats(args.v)
    if len(v) != m.n:
        raise InputError(f"--v needs {m.n} components")
    h = Hyperplane.normalized(v, args.c)
    box = _box(args, m.n)
    mesh = extract_levelset(m, h, box, args.res or (64 if m.n == 2 else 16))
    summary = topology_summary(mesh)
    if args.format == "json":
        _write(json.dumps({"v": list(h.v), "c": h.c, **summary.to_dict()}, indent=2), args.out)
    else:
        _write(f"betti {summary.betti.as_list()}, components {summary.components}, "
               f"closed loops {summary.closed_loops}, boundary-touching "
               f"{summary.boundary_touching_components}", args.out)
    if args.off:
        write_off(mesh.complex, args.off)
    if args.svg:
        if m.n != 2:
            raise InputError("--svg is only available for n = 2")
        from .plotting import plot_levelset
        plot_levelset(mesh, args.svg)
    return EXIT_OK


def cmd_lift(args) -> int:
    m = _load_map(args)
    box = _box(args, m.n)
    x0 = _floats(args.x0) if args.x0 else [(lo + hi) / 2 for lo, hi in box]
    w = _floats(args.w)
    if len(x0) != m.n or len(w) != m.n:
        raise InputError(f"--x0 and --w need {m.n} components")
    res = lift_line(m, x0, w, args.t_max, box, tol=args.tol)
    if args.out:
        res.write_csv(args.out)
    else:
        res.write_csv(sys.stdout)
    sys.stderr.write(f"status {res.status} drift {res.drift:.3g}\n")
    if args.svg:
        from .plotting import plot_lifts
        plot_lifts([res], box, args.svg)
    return EXIT_OK


def cmd_homology(args) -> int:
    if args.assemble_demo:
        result = demo_assembly(args.seed)
        _write(result.trace.to_json(), args.out)
        return EXIT_OK
    if not args.off_file:
        raise InputError("an OFF file or --assemble-demo is required")
    try:
        cx: SimplicialComplex = read_off(args.off_file)
    except OSError as exc:
        raise InputError(f"cannot read OFF file: {exc}") from None
    b = betti(cx).as_list()
    _write(json.dumps({"betti": b}) if args.format == "json" else " ".join(map(str, b)), args.out)
    return EXIT_OK


def cmd_corpus(args) -> int:
    reports = run_corpus()
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["map", "n", "verdict", "samples", "evidence", "hadamard"])
            for name, r in reports.items():
                w.writerow([name, r.map["n"], r.verdict, len(r.samples), len(r.supporting),
                            r.bounds["hadamard"]["value"] if r.bounds else ""])
        for name, r in reports.items():
            (outdir / f"{name}.json").write_text(r.to_json())
        if args.svg:
            maps, configs = corpus(), corpus_configs()
            for name, r in reports.items():
                if r.map["n"] == 2 and r.samples:
                    _analysis_figures(maps[name], configs[name], r, Path(args.svg) / name)
    if args.format == "json":
        sys.stdout.write(json.dumps({k: r.verdict for k, r in reports.items()}, indent=2) + "\n")
    else:
        for name, r in reports.items():
            sys.stdout.write(f"{name:14s} {r.verdict}\n")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "levelset": cmd_levelset, "lift": cmd_lift,
            "homology": cmd_homology, "corpus": cmd_corpus}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _resolve(build_parser().parse_args(_glue_vector_flags(argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, MapSyntaxError, MapDomainError, ValueError, KeyError) as exc:
        sys.stderr.write(f"invertiscope: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
