import pytest
from hypothesis import given
from hypothesis import strategies as st

from invertiscope.assembly import (FiberAssignment, ProductCell, ProductChain, assemble_cylinder,
                                   assemble_level_cycle, cap_chain, demo_assembly, end_sphere,
                                   leibniz_boundary, path_complex, path_edges, random_cone_fibers,
                                   verify_assembly)
from invertiscope.complexes import SimplicialComplex, barycentric_subdivide, sphere

HEXAGON = SimplicialComplex(sphere(1, 0).cells)
TWO_POINTS = SimplicialComplex(sphere(0, 0).cells)


def test_boundary_of_a_square():
    square = ProductChain.product([(0, 1)], (5, 6))
    assert leibniz_boundary(square) == ProductChain(1, [
        ProductCell((0,), (5, 6)), ProductCell((1,), (5, 6)),
        ProductCell((0, 1), (5,)), ProductCell((0, 1), (6,)),
    ])


def test_path_times_closed_base_keeps_only_endpoint_terms():
    path = path_edges(3)
    prod = ProductChain(2, [ProductCell(f, b) for f in path for b in HEXAGON.cells_of(1)])
    expected = end_sphere(HEXAGON, 0) + end_sphere(HEXAGON, 1)
    assert leibniz_boundary(prod) == expected


@st.composite
def product_chains(draw):
    fib = draw(st.lists(st.sets(st.integers(0, 5), min_size=1, max_size=3), min_size=1, max_size=8))
    base = draw(st.lists(st.sets(st.integers(10, 14), min_size=1, max_size=3), min_size=1, max_size=8))
    cells = {ProductCell(tuple(sorted(f)), tuple(sorted(b))) for f, b in zip(fib, base)}
    by_dim = {}
    for c in cells:
        by_dim.setdefault(c.dim, set()).add(c)
    dim = max(by_dim, key=lambda d: len(by_dim[d]))
    return ProductChain(dim, by_dim[dim])


@given(product_chains())
def test_leibniz_boundary_squared_is_zero(p):
    if p.dim < 2:
        return
    assert not leibniz_boundary(leibniz_boundary(p))


def test_product_chain_rejects_mixed_dimensions():
    with pytest.raises(ValueError):
        ProductChain(1, [ProductCell((0,), (1, 2)), ProductCell((0, 1), (2, 3))])


def test_cap_boundary_is_the_end_sphere():
    cap = cap_chain(HEXAGON, 0, apex=100)
    assert leibniz_boundary(cap) == end_sphere(HEXAGON, 0)


def test_identical_paths_need_no_gap_filling():
    fib = path_complex(3)
    paths = {s: path_edges(3) for s in HEXAGON.cells_of(1)}
    res = assemble_cylinder(HEXAGON, FiberAssignment.uniform(HEXAGON, fib, 0, 1, paths))
    assert res.trace.solves(1) == 0
    assert leibniz_boundary(res.lateral) == end_sphere(HEXAGON, 0) + end_sphere(HEXAGON, 1)
    assert verify_assembly(res.cycle, res.lateral, res.cap0, res.cap1, res.fibers).all()


def test_alternating_paths_fill_six_gaps():
    res = demo_assembly(seed=0)
    assert res.trace.solves(1) == 6
    assert not leibniz_boundary(res.cycle)
    assert verify_assembly(res.cycle, res.lateral, res.cap0, res.cap1, res.fibers).all()


def test_two_point_base_gives_closed_loop():
    fib = path_complex(4)
    res = assemble_cylinder(TWO_POINTS, FiberAssignment.uniform(TWO_POINTS, fib, 0, 1))
    assert res.cycle.dim == 1
    assert not leibniz_boundary(res.cycle)
    assert verify_assembly(res.cycle, res.lateral, res.cap0, res.cap1, res.fibers).all()


def test_unpacking_gives_cycle_lateral_and_trace():
    cycle, lateral, trace = demo_assembly(1)
    assert trace.records and not leibniz_boundary(cycle)
    assert lateral.dim == cycle.dim


def test_deleting_a_cell_breaks_the_boundary_check():
    res = demo_assembly(0)
    victim = sorted(res.lateral.support)[0]
    broken = res.lateral + ProductChain(res.lateral.dim, [victim])
    check = verify_assembly(res.cap0 + broken + res.cap1, broken, res.cap0, res.cap1)
    assert not check.boundary_matches_caps


def test_lateral_without_caps_is_not_closed():
    res = demo_assembly(0)
    check = verify_assembly(res.lateral, res.lateral, res.cap0, res.cap1)
    assert check.boundary_matches_caps and not check.cycle_closed


def test_non_acyclic_fiber_is_rejected():
    circle = SimplicialComplex(sphere(1, 0).cells)
    with pytest.raises(ValueError, match="acyclicity"):
        assemble_cylinder(HEXAGON, FiberAssignment.uniform(HEXAGON, circle, 0, 3))


def test_bad_prescribed_path_is_rejected():
    fib = path_complex(3)
    paths = {HEXAGON.cells_of(1)[0]: [(0, 2)]}
    with pytest.raises(ValueError, match="does not join"):
        assemble_cylinder(HEXAGON, FiberAssignment.uniform(HEXAGON, fib, 0, 1, paths))


def test_trace_dump_is_json():
    import json
    rows = json.loads(demo_assembly(0).trace.to_json())
    assert {"step", "cell", "cycle_size", "filler_size", "seed"} <= set(rows[0])


@given(st.integers(0, 10_000), st.integers(0, 50))
def test_random_cone_fibers_always_assemble(fiber_seed, seed):
    fibers = random_cone_fibers(HEXAGON, 6, 0.35, fiber_seed)
    res = assemble_cylinder(HEXAGON, fibers, seed)
    assert verify_assembly(res.cycle, res.lateral, res.cap0, res.cap1, res.fibers).all()


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_boundary_identity_is_seed_invariant(s1, s2):
    fibers = random_cone_fibers(HEXAGON, 5, 0.5, 7)
    a = assemble_cylinder(HEXAGON, fibers, s1)
    b = assemble_cylinder(HEXAGON, fibers, s2)
    assert leibniz_boundary(a.lateral) == leibniz_boundary(b.lateral)


def induced_on_subdivision(base, fibers):
    """Each flag of faces inherits the fiber of its largest face."""
    order = [s for layer in base.cells for s in layer]
    sub = barycentric_subdivide(base)
    induced = {}
    for layer in sub.cells:
        for flag in layer:
            largest = max((order[v] for v in flag), key=len)
            induced[flag] = fibers.fibers[largest]
    return sub, FiberAssignment(induced, fibers.u0, fibers.u1)


@pytest.mark.parametrize("fiber_seed", range(5))
def test_assembly_survives_subdividing_the_base(fiber_seed):
    fibers = random_cone_fibers(HEXAGON, 5, 0.4, fiber_seed)
    sub, induced = induced_on_subdivision(HEXAGON, fibers)
    res = assemble_cylinder(sub, induced, seed=fiber_seed)
    assert verify_assembly(res.cycle, res.lateral, res.cap0, res.cap1, res.fibers).all()


@pytest.mark.parametrize("seed", range(5))
def test_level_cycle_from_points_is_closed(seed):
    fibers = random_cone_fibers(HEXAGON, 6, 0.3, seed)
    points = {s: (seed + i) % 6 for i, s in enumerate(HEXAGON.cells_of(1))}
    chain, trace = assemble_level_cycle(HEXAGON, fibers.fibers, points, seed)
    assert chain.dim == 1
    assert not leibniz_boundary(chain)


def test_level_cycle_over_a_sphere_base():
    octa = SimplicialComplex(sphere(2, 0).cells)
    fibers = random_cone_fibers(octa, 5, 0.4, 3)
    points = {s: i % 5 for i, s in enumerate(octa.cells_of(2))}
    chain, trace = assemble_level_cycle(octa, fibers.fibers, points, 0)
    assert chain.dim == 2 and not leibniz_boundary(chain)
    assert trace.solves(1) > 0


def test_cylinder_over_a_sphere_base():
    octa = SimplicialComplex(sphere(2, 0).cells)
    fibers = random_cone_fibers(octa, 6, 0.35, 11)
    res = assemble_cylinder(octa, fibers, seed=2)
    assert res.cycle.dim == 3
    assert verify_assembly(res.cycle, res.lateral, res.cap0, res.cap1, res.fibers).all()


def test_cone_fibers_are_nested_along_faces():
    fibers = random_cone_fibers(HEXAGON, 6, 0.3, 0)
    for edge in HEXAGON.cells_of(1):
        for v in edge:
            big, small = fibers.fiber(edge), fibers.fiber((v,))
            assert all(s in small for layer in big.cells for s in layer)
    assert isinstance(fibers.fiber((0,)), SimplicialComplex)
