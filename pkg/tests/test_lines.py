import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import line_gap_brute

from unitgrad.numcore import DimensionError, make_zoo_field, make_rng
from unitgrad.witness import Line, closest_points_between_lines, line_pair_witness


def test_skew_axes_in_three_dimensions():
    l1 = Line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    l2 = Line([0.0, 1.0, 0.0], [0.0, 0.0, 1.0])
    res = closest_points_between_lines(l1, l2)
    assert (res.s_star, res.t_star) == (0.0, 0.0)
    assert res.gap == pytest.approx(1.0)
    assert not res.parallel


def test_crossing_lines_in_the_plane():
    l1 = Line([0.0, 0.0], [1.0, 0.0])
    l2 = Line.through([0.0, 3.0], [0.6, 0.8])
    res = closest_points_between_lines(l1, l2)
    # the second line crosses the axis at s = -2.25 after t = -3.75
    assert res.s_star == pytest.approx(-2.25, abs=1e-12)
    assert res.t_star == pytest.approx(-3.75, abs=1e-12)
    assert res.gap <= 1e-12


def test_parallel_lines():
    l1 = Line([0.0, 0.0], [1.0, 0.0])
    l2 = Line([5.0, 2.0], [-1.0, 0.0])
    res = closest_points_between_lines(l1, l2)
    assert res.parallel
    assert res.s_star == 0.0
    assert res.gap == pytest.approx(2.0)


def test_line_validation():
    with pytest.raises(ValueError):
        Line([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Line.through([0.0, 0.0], [0.0, 0.0])
    with pytest.raises(DimensionError):
        closest_points_between_lines(Line([0.0, 0.0], [1.0, 0.0]), Line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]))


def _random_pair(rng, dim):
    b1, b2 = rng.uniform(-5, 5, dim), rng.uniform(-5, 5, dim)
    return Line.through(b1, rng.standard_normal(dim)), Line.through(b2, rng.standard_normal(dim))


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_matches_brute_force_grid(dim):
    rng = make_rng(100 + dim)
    for _ in range(4):
        l1, l2 = _random_pair(rng, dim)
        res = closest_points_between_lines(l1, l2)
        s, t, gap = line_gap_brute(l1.base, l1.dir, l2.base, l2.dir)
        assert res.gap == pytest.approx(gap, abs=1e-6)
        assert abs(res.s_star - s) <= 1e-5 and abs(res.t_star - t) <= 1e-5


@settings(max_examples=100, deadline=None)
@given(dim=st.integers(2, 6), seed=st.integers(0, 2**32))
def test_gap_vector_is_orthogonal_to_both_lines(dim, seed):
    l1, l2 = _random_pair(make_rng(seed), dim)
    res = closest_points_between_lines(l1, l2)
    if not res.parallel:
        assert max(res.orthogonality(l1, l2)) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(dim=st.integers(2, 4), seed=st.integers(0, 2**32), s=st.floats(-20, 20), t=st.floats(-20, 20))
def test_closest_pair_beats_any_other_pair(dim, seed, s, t):
    l1, l2 = _random_pair(make_rng(seed), dim)
    res = closest_points_between_lines(l1, l2)
    assert res.gap <= np.linalg.norm(l1.at(s) - l2.at(t)) + 1e-9


# --- gradient line pairs ------------------------------------------------------

def test_affine_pair_is_consistent():
    f = make_zoo_field("affine", c1=[0.6, 0.8], c0=1.0)
    w = line_pair_witness(f, [1.0, 2.0], [-3.0, 0.5])
    assert w.lines.parallel
    assert w.ok and w.hypotheses_met
    assert w.gradient_difference <= 1e-12


def test_scaled_affine_is_rescaled_to_unit_gradient():
    f = make_zoo_field("affine", c1=[3.0, 4.0])
    w = line_pair_witness(f, [1.0, 2.0], [0.0, 0.0])
    assert w.common_norm == pytest.approx(5.0)
    assert w.ray_deviation_u0 <= 1e-12


def test_norm_pair_breaks_down_at_the_closest_points():
    # gradient lines of |u| through (1, 0) and (0, 1) meet at the origin
    f = make_zoo_field("smoothed_norm", eps=1e-3)
    w = line_pair_witness(f, [1.0, 0.0], [0.0, 1.0], strict=False)
    np.testing.assert_allclose(w.u0, [0.0, 0.0], atol=1e-12)
    assert w.lines.gap <= 1e-12
    assert not w.ok


def test_strict_mode_rejects_unequal_norms():
    f = make_zoo_field("quadratic")
    with pytest.raises(ValueError):
        line_pair_witness(f, [1.0, 0.0], [0.0, 2.0])
    w = line_pair_witness(f, [1.0, 0.0], [0.0, 2.0], strict=False)
    assert not w.hypotheses_met


def test_vanishing_gradient_rejected():
    with pytest.raises(ValueError):
        line_pair_witness(make_zoo_field("quadratic"), [0.0, 0.0], [1.0, 0.0], strict=False)


def test_identical_lines():
    l1 = Line.through([1.0, 2.0, 3.0], [1.0, 1.0, 0.0])
    res = closest_points_between_lines(l1, l1)
    assert res.parallel
    assert res.gap <= 1e-15


def test_affine_pair_with_offset_bases():
    f = make_zoo_field("affine", c1=[1.0, 0.0], c0=2.0)
    w = line_pair_witness(f, [0.0, 0.0], [0.0, 1.0])
    assert w.lines.parallel
    np.testing.assert_allclose(w.lines.diff, [0.0, 1.0], atol=1e-15)
    assert f(w.u0) == f(w.v0) == 2.0
    w = line_pair_witness(make_zoo_field("affine", c1=[0.6, 0.8]), [0.0, 0.0], [5.0, -3.0])
    assert w.lines.parallel and w.gradient_difference == 0.0


def test_smoothed_norm_pair_reports_nonzero_residuals():
    f = make_zoo_field("smoothed_norm", eps=0.1)
    w = line_pair_witness(f, [1.0, 0.0], [0.0, 1.0], strict=False)
    assert w.hypotheses_met  # equal norms by symmetry, and the field is convex
    # both gradient lines pass through the origin, where the gradient vanishes
    np.testing.assert_allclose(w.u0, [0.0, 0.0], atol=1e-12)
    assert w.line_drift > 0.9
    assert w.ray_deviation_u0 == pytest.approx(10.0)
    assert not w.ok
