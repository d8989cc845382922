import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invertiscope.bounds import hadamard_bound, nollet_xavier_bound, smallest_singular_value
from invertiscope.mapdsl import CORPUS_SOURCES, load_map

SQUARE = [(-2, 2), (-2, 2)]


def box_for(m, half=2.0):
    return [(-half, half)] * m.n


def unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def test_identity_and_scaling():
    assert hadamard_bound(load_map("identity"), SQUARE, 8).value == 1.0
    assert hadamard_bound(load_map("linear_2i"), [(-5, 1), (0, 3)], 8).value == 2.0
    assert nollet_xavier_bound(load_map("identity"), (0.6, 0.8), SQUARE, 8).value == pytest.approx(1.0, abs=1e-15)


def test_exp_polar_hadamard_is_exp_of_left_edge():
    est = hadamard_bound(load_map("exp_polar"), [(-3, 3), (-3, 3)], 64)
    assert est.value == pytest.approx(math.exp(-3), abs=1e-6)
    assert est.argmin_point[0] == -3


@pytest.mark.parametrize("angle", [0.0, 0.4, 1.9, 3.0])
def test_exp_polar_nollet_xavier_is_direction_free(angle):
    est = nollet_xavier_bound(load_map("exp_polar"), (math.cos(angle), math.sin(angle)), [(-3, 3)] * 2, 64)
    assert est.value == pytest.approx(math.exp(-3), abs=1e-6)


def test_shear_nollet_xavier():
    # Df^T v is the gradient of <f, v>: for v=(1,0) that is (1, 2), for v=(0,1) it is (0, 1)
    m = load_map("shear")
    assert nollet_xavier_bound(m, (1, 0), SQUARE, 8).value == pytest.approx(math.sqrt(5), abs=1e-12)
    assert nollet_xavier_bound(m, (0, 1), SQUARE, 8).value == pytest.approx(1.0, abs=1e-12)


def test_non_unit_direction_rejected():
    with pytest.raises(ValueError):
        nollet_xavier_bound(load_map("identity"), (1, 1), SQUARE, 8)


def test_coarse_grid_rejected():
    with pytest.raises(ValueError):
        hadamard_bound(load_map("identity"), SQUARE, 2)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_sigma_min_matches_svd(seed, n):
    rng = np.random.default_rng(seed)
    mats = rng.normal(size=(16, n, n)) * rng.uniform(0.01, 10)
    expected = np.linalg.svd(mats, compute_uv=False)[:, -1]
    got = smallest_singular_value(mats)
    assert np.allclose(got, expected, rtol=1e-7, atol=1e-9 * np.abs(mats).max())


def test_sigma_min_of_singular_matrix_is_zero():
    assert smallest_singular_value(np.array([[1.0, 2.0], [2.0, 4.0]])) == 0.0


@pytest.mark.parametrize("name", sorted(CORPUS_SOURCES))
def test_hadamard_dominated_by_every_direction(name):
    m = load_map(name)
    rng = np.random.default_rng(7)
    h = hadamard_bound(m, box_for(m), 12).value
    for _ in range(8):
        assert h <= nollet_xavier_bound(m, unit(rng, m.n), box_for(m), 12).value + 1e-12


@pytest.mark.parametrize("name", sorted(CORPUS_SOURCES))
def test_enlarging_the_box_never_raises_the_estimates(name):
    # the grids are aligned (spacing 0.25), so the big sample set contains the small one
    m = load_map(name)
    v = unit(np.random.default_rng(1), m.n)
    small, big = box_for(m, 1.0), box_for(m, 2.0)
    assert hadamard_bound(m, big, 16).value <= hadamard_bound(m, small, 8).value
    assert nollet_xavier_bound(m, v, big, 16).value <= nollet_xavier_bound(m, v, small, 8).value


@pytest.mark.parametrize("name", ["identity", "linear_2i", "rotation", "shear", "identity3"])
def test_constant_jacobian_is_box_and_resolution_free(name):
    m = load_map(name)
    ref = hadamard_bound(m, box_for(m), 4).value
    for half, res in [(0.5, 9), (7.0, 16)]:
        assert hadamard_bound(m, box_for(m, half), res).value == pytest.approx(ref, abs=1e-12)


def test_shear_hadamard_closed_form():
    # singular values of [[1, 2], [0, 1]] are sqrt(2) +- 1
    assert hadamard_bound(load_map("shear"), SQUARE, 4).value == pytest.approx(math.sqrt(2) - 1, abs=1e-12)


def test_to_dict_contains_direction():
    d = nollet_xavier_bound(load_map("identity"), (1, 0), SQUARE, 4).to_dict()
    assert d["direction"] == [1.0, 0.0] and d["samples"] == 25
