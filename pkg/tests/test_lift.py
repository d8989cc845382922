import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invertiscope.lift import COMPLETED, LEFT_BOX, SINGULAR, STEP_COLLAPSE, lift_line
from invertiscope.mapdsl import evaluate, load_map, parse_map

BIG = [(-10, 10), (-10, 10)]


def assert_drift_bounded(m, res, x0, w, tol):
    p0 = evaluate(m, np.asarray(x0, dtype=float))
    for t, x in zip(res.ts, res.points):
        assert np.linalg.norm(evaluate(m, x) - (p0 + t * np.asarray(w))) <= 10 * tol


def test_identity_completes_on_the_line():
    res = lift_line(load_map("identity"), (0, 0), (1, 0), 5.0, BIG)
    assert res.status.kind == COMPLETED and res.status.t == 5.0
    for t, x in zip(res.ts, res.points):
        assert np.linalg.norm(x - (t, 0)) <= 1e-9


def test_exp_polar_leaves_box_at_closed_form_time():
    m = load_map("exp_polar")
    res = lift_line(m, (0, 0), (-1, 0), 1.0, BIG)
    assert res.status.kind == LEFT_BOX
    assert res.status.t == pytest.approx(1 - math.exp(-10), abs=1e-4)
    for t, x in zip(res.ts, res.points):
        # x = ln(1 - t) is ill-conditioned near the exit: an f-residual r moves x by r / (1 - t)
        assert x[0] == pytest.approx(math.log(1 - t), abs=1e-8 / (1 - t))
        assert abs(x[1]) < 1e-12
    assert_drift_bounded(m, res, (0, 0), (-1, 0), 1e-9)


def test_halving_initial_step_barely_moves_exit():
    m = load_map("exp_polar")
    a = lift_line(m, (0, 0), (-1, 0), 1.0, BIG)
    b = lift_line(m, (0, 0), (-1, 0), 1.0, BIG, h0=1 / 2048)
    assert abs(a.status.t - b.status.t) <= 1e-4


def test_linear_map_lift_is_halved():
    res = lift_line(load_map("linear_2i"), (0, 0), (0, 1), 4.0, BIG)
    assert res.status.kind == COMPLETED
    for t, x in zip(res.ts, res.points):
        assert np.linalg.norm(x - (0, t / 2)) <= 1e-9


def test_fold_stops_at_the_critical_line():
    # f = (x^2, y): the lift of t -> (1 - t, 0) from (1, 0) is x = sqrt(1 - t), critical at t = 1
    res = lift_line(parse_map("n=2; f1 = x1^2; f2 = x2"), (1, 0), (-1, 0), 2.0, BIG)
    assert res.status.kind in (SINGULAR, STEP_COLLAPSE)
    assert res.status.t == pytest.approx(1.0, abs=1e-3)


def test_singular_start_rejected():
    with pytest.raises(ValueError):
        lift_line(parse_map("n=2; f1 = x1^2; f2 = x2"), (0, 0), (1, 0), 1.0, BIG)


@pytest.mark.parametrize("kw", [dict(x0=(20, 0)), dict(w=(0, 0)), dict(t_max=0.0)])
def test_invalid_arguments(kw):
    args = dict(x0=(0, 0), w=(1, 0), t_max=1.0)
    args.update(kw)
    with pytest.raises(ValueError):
        lift_line(load_map("identity"), args["x0"], args["w"], args["t_max"], BIG)


def test_csv_dump():
    res = lift_line(load_map("identity"), (0, 0), (1, 0), 1.0, BIG)
    buf = io.StringIO()
    res.write_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "t,x1,x2"
    assert len(rows) == len(res.ts) + 1
    assert res.path.shape == (len(res.ts), 3)


@given(st.sampled_from(["identity", "linear_2i", "rotation", "shear", "exp_polar"]),
       st.floats(0, 2 * math.pi), st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
def test_drift_stays_within_tolerance(name, angle, x0):
    m = load_map(name)
    w = (math.cos(angle), math.sin(angle))
    res = lift_line(m, x0, w, 6.0, [(-3, 3), (-3, 3)])
    assert res.drift <= 10 * 1e-9
    assert_drift_bounded(m, res, x0, w, 1e-9)


@given(st.sampled_from(["identity", "linear_2i", "rotation", "shear"]), st.floats(0, 2 * math.pi))
def test_uniformly_invertible_maps_never_collapse(name, angle):
    w = (math.cos(angle), math.sin(angle))
    res = lift_line(load_map(name), (0.1, -0.2), w, 20.0, [(-2, 2), (-2, 2)])
    assert res.status.kind in (COMPLETED, LEFT_BOX)


def test_three_dimensional_lift():
    m = load_map("exp_cylinder")
    res = lift_line(m, (0, 0, 0), (0, 0, 1), 1.0, [(-3, 3)] * 3)
    assert res.status.kind == COMPLETED
    assert np.allclose(res.points[-1], (0, 0, 1), atol=1e-9)
