import itertools
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from invertiscope.complexes import boundary_of_simplex, disk, sphere

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
# HYPOTHESIS_PROFILE=stress draws fresh random examples on every run
settings.register_profile("stress", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def dense_gf2_rank(rows: np.ndarray) -> int:
    """Plain Gaussian elimination over GF(2) on a 0/1 matrix (test oracle)."""
    a = (np.array(rows, dtype=np.uint8) % 2).copy()
    rank = 0
    n_rows, n_cols = a.shape if a.size else (0, 0)
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if a[r, col]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        for r in range(n_rows):
            if r != rank and a[r, col]:
                a[r] ^= a[rank]
        rank += 1
    return rank


def dense_boundary(cx, k: int) -> np.ndarray:
    """Boundary matrix of dimension k built straight from vertex tuples."""
    rows = {s: i for i, s in enumerate(cx.cells_of(k - 1))}
    mat = np.zeros((len(rows), cx.n_cells(k)), dtype=np.uint8)
    for j, s in enumerate(cx.cells_of(k)):
        for face in itertools.combinations(s, k):
            mat[rows[face], j] = 1
    return mat


def oracle_betti(cx) -> list[int]:
    ranks = [0] + [dense_gf2_rank(dense_boundary(cx, k)) for k in range(1, cx.dim + 1)] + [0]
    return [cx.n_cells(k) - ranks[k] - ranks[k + 1] for k in range(cx.dim + 1)]


CANONICAL = {
    "circle": lambda: sphere(1, 0),
    "circle_r1": lambda: sphere(1, 1),
    "octahedron": lambda: sphere(2, 0),
    "tetra_boundary": lambda: boundary_of_simplex(3),
    "disk1": lambda: disk(1, 0),
    "disk2": lambda: disk(2, 0),
}


@pytest.fixture(params=sorted(CANONICAL))
def canonical(request):
    return CANONICAL[request.param]()


# acceptance criterion number -> (passed, one-line detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
