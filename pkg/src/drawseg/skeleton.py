"""Thinning of ink masks to one-pixel-wide skeletons, and spur removal.

The shipped thinning method is Zhang-Suen. Its textbook form deletes all
candidates of a subiteration in parallel, which erases isolated 2x2 squares
and can cut two-pixel-thick diagonal strokes. Here candidates that have no
other candidate in their 8-neighbourhood are deleted in bulk (the parallel
result is unchanged for them), while clustered candidates are re-tested one
at a time in raster order. After convergence a cleanup pass removes simple
staircase pixels so that the output has no 2x2 ink block and junctions are
single pixels. Once no staircase pixel is left it also removes bumps, pixels
whose only two neighbours touch each other. On digital arcs these bumps turn
three pixels into junctions and would cut the arc into slivers.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import ndimage

from ._grid import ink_neighbors, neighbor_count
from .raster import BinaryRaster

DEFAULT_METHOD = "zhang-suen"
DEFAULT_MAX_SPUR_LEN = 3

_MIN_B = 3
_EIGHT = np.ones((3, 3), dtype=bool)


def _ring(p: np.ndarray, y: int, x: int):
    """P2..P9 of Zhang-Suen (N, NE, E, SE, S, SW, W, NW) around padded (y, x)."""
    return (p[y - 1, x], p[y - 1, x + 1], p[y, x + 1], p[y + 1, x + 1],
            p[y + 1, x], p[y + 1, x - 1], p[y, x - 1], p[y - 1, x - 1])


def _zs_deletable(ring, first: bool) -> bool:
    p2, p3, p4, p5, p6, p7, p8, p9 = ring
    b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
    if b < _MIN_B or b > 6:
        return False
    seq = ring + (p2,)
    a = sum(1 for u, v in zip(seq, seq[1:]) if u == 0 and v == 1)
    if a != 1:
        return False
    if first:
        return p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0
    return p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0


def _zs_candidates(p: np.ndarray, first: bool) -> np.ndarray:
    """Vectorised Zhang-Suen candidate mask over the interior of padded ``p``."""
    c = p[1:-1, 1:-1]
    n = p[:-2, 1:-1]
    ne = p[:-2, 2:]
    e = p[1:-1, 2:]
    se = p[2:, 2:]
    s = p[2:, 1:-1]
    sw = p[2:, :-2]
    w = p[1:-1, :-2]
    nw = p[:-2, :-2]
    ring = (n, ne, e, se, s, sw, w, nw)
    b = n + ne + e + se + s + sw + w + nw
    a = np.zeros_like(c)
    for u, v in zip(ring, ring[1:] + ring[:1]):
        a += (u == 0) & (v == 1)
    if first:
        cond = ((n * e * s) == 0) & ((e * s * w) == 0)
    else:
        cond = ((n * e * w) == 0) & ((n * s * w) == 0)
    return (c == 1) & (b >= _MIN_B) & (b <= 6) & (a == 1) & cond


def _delete_candidates(p: np.ndarray, cand: np.ndarray, test) -> bool:
    """Delete candidates from padded ``p``; clustered ones are re-tested serially."""
    if not cand.any():
        return False
    cp = np.pad(cand.astype(np.uint8), 1)
    crowd = ndimage.convolve(cp, _EIGHT.astype(np.uint8), mode="constant")[1:-1, 1:-1] - 1
    lone = cand & (crowd == 0)
    changed = bool(lone.any())
    p[1:-1, 1:-1][lone] = 0
    ys, xs = np.nonzero(cand & (crowd > 0))
    for y, x in zip((ys + 1).tolist(), (xs + 1).tolist()):
        if p[y, x] and test(p, y, x):
            p[y, x] = 0
            changed = True
    return changed


def _yokoi8(p: np.ndarray, y: int, x: int) -> int:
    """Yokoi 8-connectivity number; 1 means the pixel is simple."""
    # E, NE, N, NW, W, SW, S, SE, with wrap-around
    v = [p[y, x + 1], p[y - 1, x + 1], p[y - 1, x], p[y - 1, x - 1],
         p[y, x - 1], p[y + 1, x - 1], p[y + 1, x], p[y + 1, x + 1]]
    nb = [1 - t for t in v]
    nb += nb[:2]
    return sum(nb[k] - nb[k] * nb[k + 1] * nb[k + 2] for k in (0, 2, 4, 6))


def _staircase_removable(p: np.ndarray, y: int, x: int) -> bool:
    n, e, s, w = p[y - 1, x], p[y, x + 1], p[y + 1, x], p[y, x - 1]
    if not (n and e or e and s or s and w or w and n):
        return False
    if int(p[y - 1:y + 2, x - 1:x + 2].sum()) - 1 < 2:
        return False
    return _yokoi8(p, y, x) == 1


def _is_bump(p: np.ndarray, y: int, x: int) -> bool:
    """Exactly two ink neighbours that touch each other: the pixel only adds a triangle."""
    ys, xs = np.nonzero(p[y - 1:y + 2, x - 1:x + 2])
    pts = [(a, b) for a, b in zip(ys.tolist(), xs.tolist()) if (a, b) != (1, 1)]
    if len(pts) != 2:
        return False
    (a0, b0), (a1, b1) = pts
    return max(abs(a0 - a1), abs(b0 - b1)) == 1


def _neighbor_count(p: np.ndarray) -> np.ndarray:
    return sum(np.roll(np.roll(p, dy, 0), dx, 1) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dy or dx)


def _cleanup(p: np.ndarray) -> bool:
    """Staircase corners first; bumps only once no staircase pixel is left."""
    c = p[1:-1, 1:-1].astype(bool)
    n = p[:-2, 1:-1].astype(bool)
    e = p[1:-1, 2:].astype(bool)
    s = p[2:, 1:-1].astype(bool)
    w = p[1:-1, :-2].astype(bool)
    cand = c & ((n & e) | (e & s) | (s & w) | (w & n))
    changed = False
    ys, xs = np.nonzero(cand)
    for y, x in zip((ys + 1).tolist(), (xs + 1).tolist()):
        if p[y, x] and _staircase_removable(p, y, x):
            p[y, x] = 0
            changed = True
    if changed:
        return True
    ys, xs = np.nonzero(p.astype(bool) & (_neighbor_count(p) == 2))
    for y, x in zip(ys.tolist(), xs.tolist()):
        if p[y, x] and _is_bump(p, y, x):
            p[y, x] = 0
            changed = True
    return changed


def zhang_suen(mask: np.ndarray) -> np.ndarray:
    p = np.pad(mask.astype(np.int32), 1)
    while True:
        while True:
            changed = False
            for first in (True, False):
                cand = _zs_candidates(p, first)
                changed |= _delete_candidates(
                    p, cand, lambda q, y, x, f=first: _zs_deletable(_ring(q, y, x), f))
            if not changed:
                break
        if not _cleanup(p):
            break
    return p[1:-1, 1:-1].astype(bool)


_METHODS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "zhang-suen": zhang_suen,
}


def register_method(name: str, fn: Callable[[np.ndarray], np.ndarray]) -> None:
    """Make an additional thinning routine available under ``name``."""
    _METHODS[name] = fn


def available_methods() -> list[str]:
    return sorted(_METHODS)


def skeletonize(mask: BinaryRaster, method: str = DEFAULT_METHOD) -> BinaryRaster:
    try:
        fn = _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown thinning method {method!r}; known: {available_methods()}") from None
    if not mask.mask.any():
        return BinaryRaster(mask.mask.copy())
    # work on the ink bounding box only
    ys, xs = np.nonzero(mask.mask)
    y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    out = np.zeros_like(mask.mask, dtype=bool)
    out[y0:y1, x0:x1] = fn(mask.mask[y0:y1, x0:x1])
    return BinaryRaster(out)


def _spur_path(mask: np.ndarray, end: tuple[int, int], limit: int):
    """Pixels of the branch hanging from ``end``, or None if it is not a spur.

    The walk stops at the first pixel with more than one unvisited neighbour.
    If those neighbours are mutually connected, that pixel only hangs on the
    branching structure and belongs to the spur; otherwise it is the junction
    and is kept.
    """
    path = [end]
    seen = {end}
    cur = end
    while True:
        nxt = [q for q in ink_neighbors(mask, *cur) if q not in seen]
        if not nxt:
            return None  # reached another end: a free-standing stroke
        if len(nxt) == 1:
            if len(path) > limit:
                return None
            cur = nxt[0]
            path.append(cur)
            seen.add(cur)
            continue
        if _mutually_connected(nxt):
            path_ok = len(path) <= limit
            return path if path_ok else None
        path.pop()
        return path if 0 < len(path) <= limit else None


def _mutually_connected(points) -> bool:
    pts = list(points)
    reached = {pts[0]}
    frontier = [pts[0]]
    rest = set(pts[1:])
    while frontier:
        x, y = frontier.pop()
        for q in list(rest):
            if abs(q[0] - x) <= 1 and abs(q[1] - y) <= 1:
                rest.discard(q)
                reached.add(q)
                frontier.append(q)
    return not rest


def remove_spurs(skel: BinaryRaster, max_spur_len: int = DEFAULT_MAX_SPUR_LEN) -> BinaryRaster:
    """Delete end-to-junction branches of at most ``max_spur_len`` pixels (one pass)."""
    if max_spur_len <= 0:
        return BinaryRaster(skel.mask.copy())
    mask = skel.mask
    counts = neighbor_count(mask)
    ys, xs = np.nonzero(mask & (counts == 1))
    doomed = []
    for x, y in zip(xs.tolist(), ys.tolist()):
        path = _spur_path(mask, (x, y), max_spur_len)
        if path:
            doomed.extend(path)
    out = mask.copy()
    for x, y in doomed:
        out[y, x] = False
    return BinaryRaster(out)
