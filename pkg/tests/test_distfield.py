import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitgrad.distfield import (
    CSV_HEADER,
    AmbiguousProjectionError,
    DiscriminantNotPositive,
    GraphSpec,
    OnGraphError,
    SingularClass,
    classify_singularity,
    distance_values,
    emit_grid,
    evaluate_distance_field,
    parabola_cubic,
    parabola_discriminant,
    parabola_graph,
    parabola_projection,
    project_batch,
    project_to_graph,
)
from unitgrad.numcore import Box, Tolerances, fd_gradient_batch, sample_points

# Frozen from tests/oracles.py::parabola_projection_brute (grid search plus bisection
# on the stationarity derivative); (abscissa of global minimizer, distance).
BRUTE_PROJECTIONS = {
    (1.0, 0.0): (0.5897545123014585, 0.5378414486981995),
    (0.0, -1.0): (0.0, 1.0),
    (-1.5, 0.3): (-0.8353564234567865, 0.77460449137888),
    (2.0, 3.0): (1.7523321767940239, 0.25755256754442046),
    (0.3, 1.2): (0.9282235716521652, 0.7135685625621646),
}

PARABOLA = parabola_graph()


@pytest.mark.parametrize("u,expected", BRUTE_PROJECTIONS.items())
def test_projection_matches_brute_force(u, expected):
    x, value = expected
    res = project_to_graph(PARABOLA, u)
    assert res.minimizer[0] == pytest.approx(x, abs=1e-10)
    assert res.value == pytest.approx(value, abs=1e-12)
    assert res.stationarity_residual <= 1e-10
    assert not res.multiple


def test_projection_from_below_the_vertex():
    res = project_to_graph(PARABOLA, [0.0, -1.0])
    np.testing.assert_allclose(res.foot, [0.0, 0.0], atol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_symmetric_point_reports_two_minimizers():
    res = project_to_graph(PARABOLA, [0.0, 2.0])
    assert abs(res.minimizer[0]) == pytest.approx(1.224744871391589, abs=1e-10)
    assert res.value == pytest.approx(1.3228756555322954, abs=1e-12)
    assert res.multiple


def test_gradient_examples():
    s = evaluate_distance_field(PARABOLA, [0.0, -1.0])
    np.testing.assert_allclose(s.grad, [0.0, -1.0], atol=1e-12)
    s = evaluate_distance_field(PARABOLA, [1.0, 0.0])
    np.testing.assert_allclose(s.grad, [0.7627628712727638, -0.6466782833896072], atol=1e-9)


def test_singular_points_raise():
    with pytest.raises(AmbiguousProjectionError):
        evaluate_distance_field(PARABOLA, [0.0, 2.0])
    with pytest.raises(OnGraphError):
        evaluate_distance_field(PARABOLA, [1.0, 1.0])


def test_discriminant_values():
    assert parabola_discriminant([0.0, 0.0]) == pytest.approx(1 / 216, abs=1e-15)
    assert parabola_discriminant([0.0, 2.0]) == pytest.approx(-0.125, abs=1e-15)
    assert parabola_discriminant([0.0, 0.5]) == 0.0


def test_closed_form_values():
    assert parabola_projection([0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)
    assert parabola_projection([1.0, 0.0]) == pytest.approx(0.5897545123014585, abs=1e-14)
    with pytest.raises(DiscriminantNotPositive):
        parabola_projection([0.0, 2.0])


@pytest.mark.parametrize(
    "u,expected",
    [
        ([1.0, 1.0], SingularClass.ON_GRAPH),
        ([0.0, 2.0], SingularClass.MULTI_ROOT),
        ([1.0, 0.0], SingularClass.REGULAR),
        # D = 1/16 so 4 sqrt(D) = |u1|
        ([1.0, 0.5], SingularClass.CUSP_CONDITION),
    ],
)
def test_classify_examples(u, expected):
    assert classify_singularity(u) == expected


def test_grid_layout_and_csv():
    grid = emit_grid(PARABOLA, [-1.0, -1.0], [1.0, 1.0], 3, 3)
    assert grid.points.shape == (9, 2)
    # u1 fastest, rows by ascending u2
    np.testing.assert_array_equal(grid.points[:3, 1], [-1.0, -1.0, -1.0])
    np.testing.assert_array_equal(grid.points[:3, 0], [-1.0, 0.0, 1.0])
    assert grid.value[1] == pytest.approx(1.0, abs=1e-12)
    lines = grid.to_csv().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 10
    # (1, 1) and (-1, 1) lie on the graph
    assert lines[9].endswith(",nan,OnGraph")
    assert grid.classes[8] == SingularClass.ON_GRAPH


def test_grid_is_deterministic():
    a = emit_grid(PARABOLA, [-2.0, -2.0], [2.0, 2.0], 20, 17, seed=3).to_csv()
    b = emit_grid(PARABOLA, [-2.0, -2.0], [2.0, 2.0], 20, 17, seed=3).to_csv()
    assert a == b


def test_pgm_header_and_orientation():
    grid = emit_grid(PARABOLA, [-2.0, -2.0], [2.0, 2.0], 5, 4)
    data = grid.to_pgm()
    header = b"P5\n5 4\n255\n"
    assert data.startswith(header)
    img = np.frombuffer(data[len(header):], dtype=np.uint8).reshape(4, 5)
    # the bottom corners (+-2, -2) are the nodes farthest from the parabola
    assert img[-1, 0] == 255 and img[-1, -1] == 255
    # row 0 holds u2 = 2; (0, 2) is closer to the parabola than (0, -2)
    assert img[0, 2] < img[-1, 2]
    with pytest.raises(ValueError):
        grid.to_pgm("class")


def test_grid_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        emit_grid(PARABOLA, [0.0, 0.0], [1.0, 1.0], 1, 5)
    grid = emit_grid(PARABOLA, [0.0, 0.0], [1.0, 1.0], 2, 2)
    with pytest.raises(OSError, match="cannot write"):
        grid.write_csv(tmp_path / "missing" / "out.csv")


# --- invariants -------------------------------------------------------------

def _regular_points(n, seed):
    pts = sample_points(Box([-3.0, -3.0], [3.0, 3.0]), n, seed)
    proj = project_batch(PARABOLA, pts)
    classes = PARABOLA.classifier(pts, proj.value, 1e-3)
    keep = (classes == SingularClass.REGULAR) & (proj.value > 0.05)
    return pts[keep]


def test_unit_gradient_norm_on_regular_points():
    pts = _regular_points(2000, 21)
    proj = project_batch(PARABOLA, pts)
    grads = (pts - proj.foot) / proj.value[:, None]
    assert np.max(np.abs(np.linalg.norm(grads, axis=1) - 1.0)) <= 1e-6


def test_projection_gradient_matches_fd():
    pts = _regular_points(400, 22)
    proj = project_batch(PARABOLA, pts)
    grads = (pts - proj.foot) / proj.value[:, None]
    fd = fd_gradient_batch(lambda U: distance_values(PARABOLA, U), pts, 1e-5)
    assert np.max(np.linalg.norm(fd - grads, axis=1)) <= 1e-4


def test_stationarity_holds_at_every_projection():
    pts = sample_points(Box([-3.0, -3.0], [3.0, 3.0]), 2000, 23)
    proj = project_batch(PARABOLA, pts)
    x = proj.minimizer[:, 0]
    stat = (x * x - pts[:, 1]) * 2 * x + x - pts[:, 0]
    assert np.max(np.abs(stat)) <= 1e-10
    assert proj.converged.all()


def test_closed_form_agrees_with_numeric_projection():
    pts = sample_points(Box([-3.0, -3.0], [3.0, 3.0]), 500, 24)
    pts = pts[parabola_discriminant(pts) > 1e-6]
    proj = project_batch(PARABOLA, pts)
    for u, x in zip(pts, proj.minimizer[:, 0]):
        xc = parabola_projection(u, margin=1e-6)
        assert abs(xc - x) <= 1e-8
        assert abs(parabola_cubic(xc, u)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(u1=st.floats(-3, 3), u2=st.floats(-3, 3))
def test_mirror_symmetry(u1, u2):
    a = distance_values(PARABOLA, [[u1, u2]])[0]
    b = distance_values(PARABOLA, [[-u1, u2]])[0]
    assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(u1=st.floats(-3, 3), u2=st.floats(-3, 3))
def test_distance_is_bounded_by_vertical_gap(u1, u2):
    d = distance_values(PARABOLA, [[u1, u2]])[0]
    assert 0.0 <= d <= abs(u1 * u1 - u2) + 1e-12


def test_generic_paraboloid_with_fd_derivatives():
    """g(x, y) = x^2 + y^2 in R^3 without analytic derivatives."""
    bowl = GraphSpec(ambient_dim=3, g=lambda X: (X**2).sum(axis=-1), label="bowl")
    res = project_to_graph(bowl, [0.0, 0.0, -1.0], tol=Tolerances(tol_residual=1e-8))
    assert res.value == pytest.approx(1.0, abs=1e-8)
    # axial symmetry reduces this to the parabola at (|(x, y)|, z)
    u = np.array([0.6, 0.8, 0.0])
    res = project_to_graph(bowl, u, tol=Tolerances(tol_residual=1e-8))
    assert res.value == pytest.approx(BRUTE_PROJECTIONS[(1.0, 0.0)][1], abs=1e-8)
    s = evaluate_distance_field(bowl, u, tol=Tolerances(tol_residual=1e-8))
    assert np.linalg.norm(s.grad) == pytest.approx(1.0, abs=1e-6)


def test_multiroot_class_is_the_nonpositive_discriminant_set():
    grid = emit_grid(PARABOLA, [-2.0, -2.0], [2.0, 2.0], 41, 41)
    D = parabola_discriminant(grid.points)
    multi = grid.classes == SingularClass.MULTI_ROOT
    off_graph = grid.value > 1e-3
    np.testing.assert_array_equal(multi[off_graph], (D <= 1e-3)[off_graph])
    # on the axis D <= 1e-3 means (1/2 - u2)^3 <= 0.027, i.e. u2 >= 0.2
    assert np.all(grid.points[multi, 1] >= 0.2 - 1e-12)
    assert multi.any()
