"""Polyline stroke font for dimension text.

Glyphs live in a unit cell: x in [0, 0.6], y in [0, 1] with y pointing down
(0 is the cap line, 1 the baseline). Each glyph is a list of polylines.
"""

from __future__ import annotations

import math

import numpy as np

ADVANCE = 0.8  # horizontal advance per character, in glyph heights
_DOT = "dot"


def _arc(cx, cy, rx, ry, a0, a1, steps=10):
    """Polyline along an ellipse arc; angles in degrees, counter-clockwise on screen."""
    out = []
    for k in range(steps + 1):
        a = math.radians(a0 + (a1 - a0) * k / steps)
        out.append((cx + rx * math.cos(a), cy - ry * math.sin(a)))
    return out


GLYPHS: dict[str, list] = {
    "0": [_arc(0.3, 0.5, 0.28, 0.5, 0, 360, 20)],
    "1": [[(0.12, 0.22), (0.34, 0.0), (0.34, 1.0)]],
    "2": [_arc(0.3, 0.27, 0.27, 0.27, 160, -30, 8) + [(0.02, 1.0), (0.58, 1.0)]],
    "3": [_arc(0.29, 0.26, 0.25, 0.24, 150, -90, 8) + _arc(0.29, 0.74, 0.29, 0.26, 90, -150, 9)[1:]],
    "4": [[(0.46, 1.0), (0.46, 0.0), (0.0, 0.68), (0.6, 0.68)]],
    "5": [[(0.55, 0.0), (0.1, 0.0), (0.06, 0.44)] + _arc(0.3, 0.68, 0.28, 0.3, 120, -150, 10)[1:]],
    "6": [_arc(0.32, 0.7, 0.27, 0.29, 180, 540, 14) + _arc(0.6, 0.7, 0.55, 0.68, 180, 100, 6)[1:]],
    "7": [[(0.0, 0.0), (0.6, 0.0), (0.2, 1.0)]],
    "8": [_arc(0.3, 0.25, 0.22, 0.24, -90, 270, 14), _arc(0.3, 0.74, 0.28, 0.26, 90, 450, 14)],
    "9": [_arc(0.28, 0.3, 0.27, 0.29, 0, 360, 14) + [(0.55, 0.3), (0.45, 0.75), (0.2, 1.0)]],
    ".": [_DOT],
    "R": [[(0.04, 1.0), (0.04, 0.0), (0.32, 0.0)] + _arc(0.32, 0.26, 0.24, 0.26, 90, -90, 8)[1:]
          + [(0.04, 0.52)], [(0.28, 0.52), (0.6, 1.0)]],
    "Ø": [_arc(0.32, 0.52, 0.28, 0.4, 0, 360, 18), [(0.0, 1.0), (0.64, 0.02)]],
    "±": [[(0.3, 0.12), (0.3, 0.72)], [(0.02, 0.42), (0.58, 0.42)], [(0.02, 0.98), (0.58, 0.98)]],
}


def text_width(text: str, height: float) -> float:
    return (len(text) - 1) * ADVANCE * height + 0.62 * height if text else 0.0


def layout(text: str, origin, height: float, angle_deg: float = 0.0):
    """Strokes for ``text`` with its cell's top-left at ``origin``.

    Returns (polylines, dots); polylines are float (k, 2) arrays in raster
    coordinates and dots are (x, y, radius) tuples. ``angle_deg`` rotates
    counter-clockwise on screen about ``origin``.
    """
    ox, oy = origin
    a = math.radians(angle_deg)
    rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    lines, dots = [], []
    for i, ch in enumerate(text):
        if ch == " ":
            continue
        try:
            strokes = GLYPHS[ch]
        except KeyError:
            raise ValueError(f"no glyph for {ch!r}") from None
        dx = i * ADVANCE * height
        for s in strokes:
            if s == _DOT:
                local = np.array([[dx + 0.1 * height, 0.92 * height]])
                p = local @ rot + (ox, oy)
                dots.append((float(p[0, 0]), float(p[0, 1]), 0.08 * height))
                continue
            local = np.asarray(s, dtype=np.float64) * height + (dx, 0.0)
            lines.append(local @ rot + (ox, oy))
    return lines, dots
