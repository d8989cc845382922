"""Topological tools for deciding whether a local diffeomorphism of R^n is invertible.

The package combines Z/2 simplicial homology, product-chain assembly,
PL intersection and linking numbers, level-set extraction, numerical line
lifts and analytic bounds into a sampled-hyperplane report.
"""

__version__ = "0.1.0"

from .complexes import CellRef, SimplicialComplex, barycentric_subdivide, cone, disk, sphere
from .mapdsl import MapSpec, load_map, parse_map
from .report import AnalysisConfig, Report, analyze, emit_report, run_corpus
from .z2chains import Z2Chain, betti, boundary, is_acyclic, solve_bounding_chain

__all__ = [
    "AnalysisConfig", "CellRef", "MapSpec", "Report", "SimplicialComplex", "Z2Chain", "__version__",
    "analyze", "barycentric_subdivide", "betti", "boundary", "cone", "disk", "emit_report",
    "is_acyclic", "load_map", "parse_map", "run_corpus", "solve_bounding_chain", "sphere",
]
