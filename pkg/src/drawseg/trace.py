"""Skeleton pixel classification, trace extraction, corner splitting, pruning.

A trace is an ordered chain of 8-adjacent skeleton pixels running between two
termination points (end or junction pixels). Junction pixels may terminate
several traces; every other skeleton pixel belongs to exactly one trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._grid import ink_neighbors, neighbor_count
from .raster import BinaryRaster

DEFAULT_SPIKE_THRESHOLD = 0.3
DEFAULT_MERGE_RADIUS = 2.0
MIN_TRACE_PIXELS = 4
CYCLE_PIECES = 4


class PixelKind(str, Enum):
    END = "End"
    PASSING = "Passing"
    JUNCTION = "Junction"
    ISOLATED = "Isolated"

    @classmethod
    def from_count(cls, n: int) -> "PixelKind":
        if n == 0:
            return cls.ISOLATED
        if n == 1:
            return cls.END
        if n == 2:
            return cls.PASSING
        return cls.JUNCTION


@dataclass
class Trace:
    pixels: list[tuple[int, int]]
    start_kind: PixelKind
    end_kind: PixelKind
    cyclic: bool = False

    def __len__(self) -> int:
        return len(self.pixels)

    @property
    def start(self) -> tuple[int, int]:
        return self.pixels[0]

    @property
    def end(self) -> tuple[int, int]:
        return self.pixels[-1]

    def to_dict(self) -> dict:
        return {
            "pixels": [list(p) for p in self.pixels],
            "start_kind": self.start_kind.value,
            "end_kind": self.end_kind.value,
            "cyclic": self.cyclic,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trace":
        return cls([tuple(p) for p in d["pixels"]], PixelKind(d["start_kind"]),
                   PixelKind(d["end_kind"]), bool(d["cyclic"]))


@dataclass
class Vertex:
    position: tuple[float, float]
    traces: set[int] = field(default_factory=set)
    ends: int = 0  # incident trace ends; a loop-back trace counts twice


@dataclass
class VertexSet:
    vertices: list[Vertex]
    # per surviving trace: (start vertex id, end vertex id)
    trace_vertices: list[tuple[int, int]]


def classify_pixels(skel: BinaryRaster) -> dict[tuple[int, int], PixelKind]:
    counts = neighbor_count(skel.mask)
    ys, xs = np.nonzero(skel.mask)
    return {(x, y): PixelKind.from_count(int(counts[y, x]))
            for x, y in zip(xs.tolist(), ys.tolist())}


def _walk(mask, kinds, visited, start, first):
    """Follow the chain from ``start`` through ``first`` until a termination point.

    Returns (pixels after start, closed_cycle).
    """
    path = [first]
    prev, cur = start, first
    while True:
        kind = kinds[cur]
        if kind == PixelKind.END:
            visited.add(cur)
            return path, False
        if kind == PixelKind.JUNCTION:
            return path, False
        visited.add(cur)
        nxt = None
        for q in ink_neighbors(mask, *cur):
            if q == prev:
                continue
            if kinds[q] == PixelKind.JUNCTION or q not in visited:
                nxt = q
                break
        if nxt is None:
            # chain closes on itself: back at the seed means a pure cycle
            if start in ink_neighbors(mask, *cur) and len(path) >= 2 and kinds[start] == PixelKind.PASSING:
                return path, True
            return path, False
        prev, cur = cur, nxt
        path.append(cur)


def extract_traces(skel: BinaryRaster) -> list[Trace]:
    """Cover every non-junction skeleton pixel with ordered traces.

    Seeds are taken in raster order, which also fixes the start pixel of pure
    cycles.
    """
    mask = skel.mask
    kinds = classify_pixels(skel)
    visited: set[tuple[int, int]] = set()
    traces: list[Trace] = []
    ys, xs = np.nonzero(mask)
    for x, y in zip(xs.tolist(), ys.tolist()):
        seed = (x, y)
        kind = kinds[seed]
        if seed in visited or kind == PixelKind.JUNCTION:
            continue
        visited.add(seed)
        if kind == PixelKind.ISOLATED:
            traces.append(Trace([seed], kind, kind))
            continue
        nbrs = ink_neighbors(mask, x, y)
        if kind == PixelKind.END:
            fwd, _ = _walk(mask, kinds, visited, seed, nbrs[0])
            pixels = [seed] + fwd
            traces.append(Trace(pixels, kind, kinds[pixels[-1]]))
            continue
        # passing seed: walk both ways
        fwd, closed = _walk(mask, kinds, visited, seed, nbrs[0])
        if closed:
            traces.append(Trace([seed] + fwd, kind, kinds[fwd[-1]], cyclic=True))
            continue
        other = [q for q in nbrs[1:] if q not in visited or kinds[q] == PixelKind.JUNCTION]
        back = []
        if other and other[0] not in fwd:
            back, _ = _walk(mask, kinds, visited, seed, other[0])
        pixels = back[::-1] + [seed] + fwd
        traces.append(Trace(pixels, kinds[pixels[0]], kinds[pixels[-1]]))
    return traces


def corner_angles(pixels) -> np.ndarray:
    """Angle at each interior pixel between the vectors to the two terminal pixels."""
    p = np.asarray(pixels, dtype=np.float64)
    ps, pe = p[0], p[-1]
    inner = p[1:-1]
    a = ps - inner
    b = pe - inner
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    cos = np.einsum("ij,ij->i", a, b) / (na * nb)
    return np.arccos(np.clip(cos, -1.0, 1.0))


def corner_indices(pixels, spike_threshold: float = DEFAULT_SPIKE_THRESHOLD) -> list[int]:
    """Indices (into ``pixels``) of strict local maxima of the angle's second difference."""
    if len(pixels) < 5:
        return []
    theta = corner_angles(pixels)  # theta[k] belongs to pixel k + 1
    d2 = theta[2:] - 2.0 * theta[1:-1] + theta[:-2]  # d2[k] belongs to pixel k + 2
    out = []
    for k in range(1, len(d2) - 1):
        if d2[k] > spike_threshold and d2[k] > d2[k - 1] and d2[k] > d2[k + 1]:
            out.append(k + 2)
    return out


def split_at_corners(t: Trace, spike_threshold: float = DEFAULT_SPIKE_THRESHOLD) -> list[Trace]:
    if t.cyclic or len(t) < 5:
        return [t]
    cuts = corner_indices(t.pixels, spike_threshold)
    if not cuts:
        return [t]
    pieces = []
    bounds = [0] + cuts + [len(t) - 1]
    for i, (a, b) in enumerate(zip(bounds, bounds[1:])):
        start_kind = t.start_kind if i == 0 else PixelKind.PASSING
        end_kind = t.end_kind if b == len(t) - 1 else PixelKind.PASSING
        pieces.append(Trace(t.pixels[a:b + 1], start_kind, end_kind))
    return pieces


def open_cycle(t: Trace, pieces: int = CYCLE_PIECES) -> list[Trace]:
    """Cut a closed trace into ``pieces`` open traces sharing their cut pixels.

    A single cubic cannot follow a full loop, so loops are opened before fitting.
    """
    if not t.cyclic:
        return [t]
    ring = list(t.pixels) + [t.pixels[0]]
    m = len(t.pixels)
    pieces = max(1, min(pieces, m // 3))
    cuts = [round(i * m / pieces) for i in range(pieces)] + [m]
    return [Trace(ring[a:b + 1], PixelKind.PASSING, PixelKind.PASSING)
            for a, b in zip(cuts, cuts[1:])]


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def prune_and_merge(traces, merge_radius: float = DEFAULT_MERGE_RADIUS):
    """Drop traces shorter than four pixels and merge nearby terminal points.

    The two terminals of a dropped trace (two pixels or more) are merged with
    each other so the traces it linked stay connected. Terminal pixels within
    ``merge_radius`` of each other are merged transitively. Returns the
    surviving traces and the vertex set they refer to.
    """
    kept = [t for t in traces if len(t) >= MIN_TRACE_PIXELS]
    uf = _UnionFind()
    terminals = set()
    for t in kept:
        terminals.add(t.start)
        terminals.add(t.end)
        uf.find(t.start)
        uf.find(t.end)
    for t in traces:
        if 2 <= len(t) < MIN_TRACE_PIXELS:
            uf.union(t.start, t.end)
    # links through dropped traces only matter if they reach a kept terminal
    if merge_radius > 0 and terminals:
        pts = sorted(terminals)
        arr = np.asarray(pts, dtype=np.float64)
        order = np.argsort(arr[:, 0], kind="stable")
        r2 = merge_radius * merge_radius
        for ii, i in enumerate(order):
            for j in order[ii + 1:]:
                if arr[j, 0] - arr[i, 0] > merge_radius:
                    break
                d = arr[j] - arr[i]
                if d[0] * d[0] + d[1] * d[1] <= r2:
                    uf.union(pts[i], pts[j])
    groups: dict = {}
    for p in sorted(terminals):
        groups.setdefault(uf.find(p), []).append(p)
    vid = {}
    vertices = []
    for root in sorted(groups):
        members = groups[root]
        pos = tuple(float(v) for v in np.mean(np.asarray(members, dtype=np.float64), axis=0))
        for p in members:
            vid[p] = len(vertices)
        vertices.append(Vertex(pos))
    trace_vertices = []
    for i, t in enumerate(kept):
        a, b = vid[t.start], vid[t.end]
        for v in (a, b):
            vertices[v].traces.add(i)
            vertices[v].ends += 1
        trace_vertices.append((a, b))
    return kept, VertexSet(vertices, trace_vertices)


def dump_traces(traces, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([t.to_dict() for t in traces], fh)


def load_traces(path) -> list[Trace]:
    with open(path, encoding="utf-8") as fh:
        return [Trace.from_dict(d) for d in json.load(fh)]


def trace_length(t: Trace) -> float:
    p = np.asarray(t.pixels, dtype=np.float64)
    return float(np.sum(np.linalg.norm(np.diff(p, axis=0), axis=1))) if len(p) > 1 else 0.0


def is_chain(t: Trace) -> bool:
    return all(max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
               for a, b in zip(t.pixels, t.pixels[1:]))

