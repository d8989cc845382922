import io

import pytest

from invertiscope.complexes import SimplicialComplex, barycentric_subdivide, disk, sphere
from invertiscope.offfile import read_off, write_off
from invertiscope.z2chains import betti


@pytest.mark.parametrize("make", [lambda: sphere(2, 0), lambda: barycentric_subdivide(sphere(2, 0)),
                                  lambda: disk(1, 0), lambda: sphere(1, 0)])
def test_round_trip_keeps_homology(make, tmp_path):
    cx = make()
    path = tmp_path / "mesh.off"
    write_off(cx, path)
    back = read_off(path)
    assert tuple(back.n_cells(k) for k in range(back.dim + 1)) == tuple(cx.n_cells(k) for k in range(cx.dim + 1))
    assert betti(back).as_list() == betti(cx).as_list()


def test_header_and_counts():
    buf = io.StringIO()
    write_off(sphere(2, 0), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "OFF" and lines[1] == "6 8 12"


def test_reads_polygons_comments_and_inline_counts():
    text = "OFF 4 1 0\n# a unit square\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
    cx = read_off(text, ambient_dim=2)
    assert cx.n_cells(2) == 2 and betti(cx).as_list() == [1, 0, 0]
    assert cx.ambient_dim == 2


def test_rejects_bad_files():
    with pytest.raises(ValueError):
        read_off("PLY\n1 0 0\n0 0 0\n")
    with pytest.raises(ValueError):
        read_off("OFF\n3 1 0\n0 0 0\n")


def test_needs_coordinates():
    with pytest.raises(ValueError):
        write_off(SimplicialComplex.from_simplices([(0, 1)]), io.StringIO())
