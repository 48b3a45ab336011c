import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drawseg.curvefit import (CubicBezier, arc_length, chord_parameters, curvature_at, evaluate,
                              fit_cubic_bezier, fit_distance, fit_residual, sample_equal_arclength)
from drawseg.trace import PixelKind, Trace

K = 0.5523  # quarter-circle handle length for a unit radius
QUARTER = CubicBezier([[1, 0], [1, K], [K, 1], [0, 1]])


def _casteljau(ctrl, t):
    """Independent evaluator; ``t`` may be a scalar or an array."""
    t = np.asarray(t, dtype=float)[..., None]
    pts = [np.asarray(p, dtype=float) for p in ctrl]
    while len(pts) > 1:
        pts = [(1 - t) * a + t * b for a, b in zip(pts, pts[1:])]
    return pts[0]


def _dense_length(ctrl, t0, t1, k=20000):
    p = _casteljau(ctrl, np.linspace(t0, t1, k + 1))
    return float(np.sum(np.linalg.norm(np.diff(p, axis=0), axis=1)))


def test_collinear_trace():
    pts = [(x, 0) for x in range(10)]
    c = fit_cubic_bezier(Trace(pts, PixelKind.END, PixelKind.END))
    assert np.allclose(c.control[:, 1], 0.0, atol=1e-12)
    assert fit_residual(c, pts) < 1e-9


TRUTH = [(0, 0), (2, 5), (8, 5), (10, 0)]


def _truth_samples():
    return np.array([_casteljau(TRUTH, t) for t in np.linspace(0, 1, 30)])


def test_recovers_known_curve_shape():
    pts = _truth_samples()
    c = fit_cubic_bezier(pts)
    assert fit_residual(c, pts) < 0.1
    dense_fit = evaluate(c.control, np.linspace(0, 1, 2001))
    dense_truth = np.array([_casteljau(TRUTH, t) for t in np.linspace(0, 1, 2001)])
    gap = np.min(np.linalg.norm(dense_fit[:, None] - dense_truth[None], axis=2), axis=1)
    assert gap.max() < 0.2


@pytest.mark.xfail(strict=True, reason="chord-length parameters differ from the generating ones, "
                                       "so the inner control points move by about 0.68")
def test_recovers_known_control_points():
    c = fit_cubic_bezier(_truth_samples())
    assert np.allclose(c.control[1:3], np.array(TRUTH[1:3], float), atol=0.2)


def test_four_pixels_interpolated():
    pts = np.array([(0, 0), (1, 2), (3, 3), (5, 1)], float)
    c = fit_cubic_bezier(pts)
    t = chord_parameters(pts)
    # independent check: solve the 4x4 system for the two inner points directly
    b = np.array([[3 * (1 - s) ** 2 * s, 3 * (1 - s) * s ** 2] for s in t[1:3]])
    rhs = pts[1:3] - np.outer((1 - t[1:3]) ** 3, pts[0]) - np.outer(t[1:3] ** 3, pts[3])
    inner = np.linalg.solve(b, rhs)
    assert np.allclose(c.control[1:3], inner, atol=1e-9)
    assert np.allclose(evaluate(c.control, t), pts, atol=1e-9)


def test_degenerate_falls_back_to_segment():
    c = fit_cubic_bezier(np.array([(0, 0), (0, 0)], float))
    assert np.allclose(c.control, 0)
    pts = np.array([(0, 0), (3, 0)], float)
    c = fit_cubic_bezier(pts)
    assert np.allclose(c.control, [[0, 0], [1, 0], [2, 0], [3, 0]])
    with pytest.raises(ValueError):
        fit_cubic_bezier(np.array([(1, 1)], float))


def test_straight_sampling():
    c = CubicBezier([[0, 0], [1, 0], [2, 0], [3, 0]])
    s = sample_equal_arclength(c, 4)
    assert np.allclose(s.points, [[0, 0], [1, 0], [2, 0], [3, 0]], atol=1e-9)
    assert s.params[0] == 0 and s.params[-1] == 1


def test_two_samples_are_endpoints():
    c = CubicBezier([[0, 0], [5, 9], [1, -4], [7, 2]])
    s = sample_equal_arclength(c, 2)
    assert np.array_equal(s.points, c.control[[0, 3]])
    with pytest.raises(ValueError):
        sample_equal_arclength(c, 1)


def test_quarter_circle_sampling_even():
    s = sample_equal_arclength(QUARTER, 5)
    pieces = [_dense_length(QUARTER.control, a, b) for a, b in zip(s.params, s.params[1:])]
    assert max(pieces) / min(pieces) - 1 < 0.005
    chords = np.linalg.norm(np.diff(s.points, axis=0), axis=1)
    assert max(chords) / min(chords) - 1 < 0.005


def test_arc_length_matches_dense_oracle():
    assert arc_length(QUARTER) == pytest.approx(_dense_length(QUARTER.control, 0, 1), rel=1e-4)


def test_curvature_examples():
    seg = CubicBezier([[0, 0], [1, 1], [2, 2], [3, 3]])
    assert np.allclose(curvature_at(seg, np.linspace(0, 1, 7)), 0.0)
    assert curvature_at(QUARTER, 0.5) == pytest.approx(1.0, rel=0.02)
    dot = CubicBezier(np.ones((4, 2)))
    assert curvature_at(dot, 0.3) == 0.0


def _random_trace(seed):
    rng = np.random.default_rng(seed)
    ctrl = rng.uniform(0, 40, (4, 2))
    t = np.linspace(0, 1, int(rng.integers(8, 40)))
    return np.round(evaluate(ctrl, t) + rng.normal(0, 0.3, (len(t), 2)))


@pytest.mark.parametrize("seed", range(20))
def test_fit_is_optimal(seed):
    pts = _random_trace(seed)
    c = fit_cubic_bezier(pts)
    t = chord_parameters(pts)

    def sse(ctrl):
        return float(np.sum((evaluate(ctrl, t) - pts) ** 2))

    base = sse(c.control)
    for i in (1, 2):
        for axis in (0, 1):
            for d in (-0.1, 0.1):
                q = c.control.copy()
                q[i, axis] += d
                assert sse(q) >= base - 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_endpoints_and_reverse_symmetry(seed):
    pts = _random_trace(seed)
    c = fit_cubic_bezier(pts)
    assert np.array_equal(c(0.0), pts[0]) or np.allclose(c(0.0), pts[0], atol=1e-12)
    assert np.allclose(c(1.0), pts[-1], atol=1e-12)
    fwd = sample_equal_arclength(c, 6).points
    back = sample_equal_arclength(c.reversed(), 6).points
    assert np.allclose(fwd, back[::-1], atol=1e-6)


def test_fit_distance_examples():
    seg = CubicBezier([[0, 0], [3, 0], [6, 0], [9, 0]])
    assert fit_distance(seg, [(x, 0) for x in range(10)]) < 1e-12
    # every point one unit off the segment, including past the ends only along the normal
    assert fit_distance(seg, [(x, 1) for x in range(10)]) == pytest.approx(1.0, abs=1e-9)
    # distance never exceeds the parametric residual
    rng = np.random.default_rng(3)
    for _ in range(10):
        pts = np.cumsum(rng.normal(size=(15, 2)), axis=0)
        c = fit_cubic_bezier(pts)
        assert fit_distance(c, pts) <= fit_residual(c, pts) + 1e-9


def test_fit_distance_matches_dense_oracle():
    c = CubicBezier([[0, 0], [2, 5], [8, 5], [10, 0]])
    pts = np.array([[1.0, 3.0], [5.0, 2.0], [9.5, 1.5], [12.0, -1.0]])
    dense = _casteljau(c.control, np.linspace(0, 1, 200001))
    want = np.sqrt(np.mean([np.min(np.sum((dense - p) ** 2, axis=1)) for p in pts]))
    assert fit_distance(c, pts) == pytest.approx(want, abs=1e-5)
