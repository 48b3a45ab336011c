"""Endpoint-constrained cubic Bezier fitting, arc-length sampling and curvature."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

ARC_SEGMENTS = 256
_SPEED_EPS = 1e-9


@dataclass
class CubicBezier:
    control: np.ndarray  # (4, 2)
    source_trace: int = -1
    vertex_ids: tuple[int, int] = (-1, -1)

    def __post_init__(self):
        self.control = np.asarray(self.control, dtype=np.float64).reshape(4, 2)

    def __call__(self, t) -> np.ndarray:
        return evaluate(self.control, t)

    def reversed(self) -> "CubicBezier":
        return CubicBezier(self.control[::-1].copy(), self.source_trace, self.vertex_ids[::-1])

    def transformed(self, scale: float, offset) -> "CubicBezier":
        return CubicBezier(self.control * scale + np.asarray(offset, dtype=np.float64),
                           self.source_trace, self.vertex_ids)


@dataclass
class SamplePoints:
    points: np.ndarray  # (n, 2)
    params: np.ndarray  # (n,)


def bernstein_matrix(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    return np.stack([comb(3, i) * t ** i * (1.0 - t) ** (3 - i) for i in range(4)], axis=1)


def evaluate(control, t) -> np.ndarray:
    """Point(s) on the curve; a scalar ``t`` gives shape (2,)."""
    scalar = np.ndim(t) == 0
    pts = bernstein_matrix(t) @ np.asarray(control, dtype=np.float64)
    return pts[0] if scalar else pts


def derivative(control, t) -> np.ndarray:
    c = np.asarray(control, dtype=np.float64)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
    d = 3.0 * np.diff(c, axis=0)
    return (1 - t) ** 2 * d[0] + 2 * (1 - t) * t * d[1] + t ** 2 * d[2]


def second_derivative(control, t) -> np.ndarray:
    c = np.asarray(control, dtype=np.float64)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
    dd = 6.0 * np.diff(c, n=2, axis=0)
    return (1 - t) * dd[0] + t * dd[1]


def chord_parameters(points) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] <= 0:
        return np.linspace(0.0, 1.0, len(p))
    return cum / cum[-1]


def fit_cubic_bezier(trace, source_trace: int = -1, vertex_ids=(-1, -1)) -> CubicBezier:
    """Least-squares cubic through the trace pixels with both terminals pinned.

    ``trace`` is a Trace or an (m, 2) point array. Pixels are parameterised by
    normalised cumulative chord length; the two inner control points solve the
    2x2 normal equations of the Bernstein system.
    """
    pts = np.asarray(getattr(trace, "pixels", trace), dtype=np.float64)
    if len(pts) < 2:
        raise ValueError("need at least two points to fit a curve")
    p0, p3 = pts[0], pts[-1]
    straight = np.array([p0, p0 + (p3 - p0) / 3.0, p0 + 2.0 * (p3 - p0) / 3.0, p3])
    t = chord_parameters(pts)
    b = bernstein_matrix(t)
    a = b[:, 1:3]
    rhs = pts - np.outer(b[:, 0], p0) - np.outer(b[:, 3], p3)
    normal = a.T @ a
    det = np.linalg.det(normal)
    scale = max(float(np.abs(normal).max()), 1e-300)
    if len(pts) < 3 or abs(det) <= 1e-12 * scale * scale:
        control = straight
    else:
        inner = np.linalg.solve(normal, a.T @ rhs)
        control = np.array([p0, inner[0], inner[1], p3])
    return CubicBezier(control, source_trace, tuple(vertex_ids))


def fit_residual(curve: CubicBezier, trace) -> float:
    """RMS distance between trace pixels and the curve at their chord parameters."""
    pts = np.asarray(getattr(trace, "pixels", trace), dtype=np.float64)
    t = chord_parameters(pts)
    diff = evaluate(curve.control, t) - pts
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))


def fit_distance(curve: CubicBezier, trace, segments: int = 512) -> float:
    """RMS distance from trace pixels to the nearest point on the curve.

    Unlike ``fit_residual`` this ignores slip along the curve, so it measures
    shape fidelity only. The curve is replaced by a dense polyline.
    """
    pts = np.asarray(getattr(trace, "pixels", trace), dtype=np.float64)
    poly = evaluate(curve.control, np.linspace(0.0, 1.0, segments + 1))
    a, ab = poly[:-1], np.diff(poly, axis=0)
    best = np.full(len(pts), np.inf)
    for s in range(0, len(pts), 256):
        q = pts[s:s + 256, None, :]
        t = np.clip(np.sum((q - a) * ab, axis=2) / np.maximum(np.sum(ab * ab, axis=1), 1e-12), 0.0, 1.0)
        d = np.sum((q - a - t[..., None] * ab) ** 2, axis=2)
        best[s:s + 256] = d.min(axis=1)
    return float(np.sqrt(np.mean(best)))


def arc_length_table(control, segments: int = ARC_SEGMENTS):
    t = np.linspace(0.0, 1.0, segments + 1)
    pts = evaluate(control, t)
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    return t, cum


def arc_length(curve: CubicBezier, segments: int = ARC_SEGMENTS) -> float:
    return float(arc_length_table(curve.control, segments)[1][-1])


def sample_equal_arclength(c: CubicBezier, n: int) -> SamplePoints:
    """``n`` points splitting the (polyline-approximated) arc length evenly."""
    if n < 2:
        raise ValueError("n must be at least 2")
    t_tab, cum = arc_length_table(c.control)
    total = cum[-1]
    if total <= 0:
        params = np.linspace(0.0, 1.0, n)
    else:
        targets = np.linspace(0.0, total, n)
        params = np.interp(targets, cum, t_tab)
    params[0], params[-1] = 0.0, 1.0
    points = evaluate(c.control, params)
    points[0], points[-1] = c.control[0], c.control[3]
    return SamplePoints(points, params)


def curvature_at(c: CubicBezier, t) -> np.ndarray | float:
    """Unsigned plane curvature; zero where the curve has (numerically) no speed."""
    scalar = np.ndim(t) == 0
    d1 = derivative(c.control, t)
    d2 = second_derivative(c.control, t)
    speed2 = np.sum(d1 * d1, axis=1)
    cross = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    speed = np.sqrt(speed2)
    kappa = np.where(speed < _SPEED_EPS, 0.0, cross / np.maximum(speed2 * speed, 1e-300))
    return float(kappa[0]) if scalar else kappa
