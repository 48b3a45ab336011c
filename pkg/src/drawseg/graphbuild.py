"""Component graph assembly: normalisation, nodal features, edges, labels, I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .curvefit import CubicBezier, arc_length, curvature_at, sample_equal_arclength
from .raster import ColorRaster

GRAPH_FORMAT_VERSION = 1
DEFAULT_N = 4

_BACKGROUND_MIN = 200  # all channels at least this bright => paper, not ink
_SEARCH_RADIUS = 3
_SNAP_TOLERANCE = 3 * 64 ** 2  # squared RGB distance accepted as a palette hit


class GraphFormatError(ValueError):
    """Raised for malformed or inconsistent graph files."""


class LabelingError(ValueError):
    """Raised when ground truth cannot label a node (usually misaligned rasters)."""


@dataclass(frozen=True)
class LabelScheme:
    name: str
    classes: tuple[str, ...]
    # (rgb, class index); several colours may share a class
    palette: tuple[tuple[tuple[int, int, int], int], ...]
    # class for chromatic colours that match no palette entry
    other_class: int

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def index(self, name: str) -> int:
        return self.classes.index(name)

    def display_color(self, k: int) -> tuple[int, int, int]:
        for rgb, cls in self.palette:
            if cls == k:
                return rgb
        raise KeyError(k)


BLACK = (0, 0, 0)
GREEN = (0, 255, 0)
RED = (255, 0, 0)

THREE_CLASS = LabelScheme(
    "text-contour-dimension", ("Contour", "Text", "Dimension"),
    ((BLACK, 0), (GREEN, 1), (RED, 2)), other_class=2)
TWO_CLASS = LabelScheme(
    "text-nontext", ("Text", "NonText"),
    ((GREEN, 0), (BLACK, 1), (RED, 1)), other_class=1)
CONTOUR_TASK = LabelScheme(
    "contour-noncontour", ("Contour", "NonContour"),
    ((BLACK, 0), (GREEN, 1), (RED, 1)), other_class=1)

SCHEMES = {s.name: s for s in (THREE_CLASS, TWO_CLASS, CONTOUR_TASK)}


def get_scheme(name: str) -> LabelScheme:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown label scheme {name!r}; known: {sorted(SCHEMES)}") from None


def remap_labels(labels, source: LabelScheme, target: LabelScheme) -> np.ndarray:
    """Map 3-class labels onto a binary task (or identity for equal schemes)."""
    labels = np.asarray(labels, dtype=np.int64)
    if source == target:
        return labels.copy()
    if source != THREE_CLASS:
        raise ValueError(f"cannot remap from {source.name} to {target.name}")
    keep = target.classes[0]  # the positive class of a binary task
    lut = np.array([0 if c == keep else 1 for c in source.classes], dtype=np.int64)
    return lut[labels]


# ---------------------------------------------------------------- normalisation

@dataclass(frozen=True)
class UnitSquareTransform:
    """Maps raw drawing coordinates into the unit square: ``(p - origin) * scale``."""

    scale: float
    origin: tuple[float, float]

    def forward(self, pts) -> np.ndarray:
        return (np.asarray(pts, dtype=np.float64) - np.asarray(self.origin)) * self.scale

    def inverse(self, pts) -> np.ndarray:
        return np.asarray(pts, dtype=np.float64) / self.scale + np.asarray(self.origin)


def unit_square_transform(curves) -> UnitSquareTransform:
    if not curves:
        raise ValueError("degenerate drawing: no components")
    ctrl = np.concatenate([c.control for c in curves])
    lo = ctrl.min(axis=0)
    extent = float((ctrl.max(axis=0) - lo).max())
    if not extent > 0:
        raise ValueError("degenerate drawing: zero-extent bounding box")
    return UnitSquareTransform(1.0 / extent, (float(lo[0]), float(lo[1])))


def normalize_components(curves, transform: UnitSquareTransform | None = None):
    """Scale all curves uniformly so the drawing fits the unit square."""
    tf = transform or unit_square_transform(curves)
    return [CubicBezier(tf.forward(c.control), c.source_trace, c.vertex_ids) for c in curves]


# ---------------------------------------------------------------- features

def feature_dim(n: int) -> int:
    return 5 * n - 1


def featurize(c: CubicBezier, n: int = DEFAULT_N) -> np.ndarray:
    """Nodal features of one component, in this order:

    2n sample coordinates (x0, y0, x1, y1, ...), n-1 consecutive sample
    distances, total arc length, first-to-last distance over total length,
    n-2 cosines between consecutive sample segments, n curvatures.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    s = sample_equal_arclength(c, n)
    pts = s.points
    seg = np.diff(pts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    total = arc_length(c)
    if total < 1e-12:
        ratio = 1.0
        cosines = np.ones(n - 2)
    else:
        ratio = min(float(np.linalg.norm(pts[-1] - pts[0])) / total, 1.0)
        dots = np.einsum("ij,ij->i", seg[:-1], seg[1:])
        norms = seg_len[:-1] * seg_len[1:]
        with np.errstate(invalid="ignore", divide="ignore"):
            cosines = np.where(norms > 0, dots / np.where(norms > 0, norms, 1.0), 1.0)
        cosines = np.clip(cosines, -1.0, 1.0)
    kappa = curvature_at(c, s.params)
    return np.concatenate([pts.reshape(-1), seg_len, [total, ratio], cosines, kappa])


# ---------------------------------------------------------------- graph

@dataclass
class ComponentGraph:
    controls: np.ndarray  # (N, 4, 2) normalised control points
    features: np.ndarray  # (N, 5n-1)
    edges: np.ndarray  # (E, 2) int, i < j, sorted, unique
    n: int
    scheme: str = THREE_CLASS.name
    labels: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return len(self.features)

    @property
    def label_scheme(self) -> LabelScheme:
        return get_scheme(self.scheme)

    def curves(self) -> list[CubicBezier]:
        return [CubicBezier(c) for c in self.controls]

    def with_scheme(self, scheme: LabelScheme) -> "ComponentGraph":
        """Copy relabelled onto another (binary) task."""
        labels = None
        if self.labels is not None:
            labels = remap_labels(self.labels, self.label_scheme, scheme)
        return ComponentGraph(self.controls, self.features, self.edges, self.n,
                              scheme.name, labels, dict(self.provenance))

    def validate(self) -> None:
        if self.num_nodes == 0:
            raise GraphFormatError("empty graph")
        if self.features.shape != (self.num_nodes, feature_dim(self.n)):
            raise GraphFormatError(
                f"features have shape {self.features.shape}, expected ({self.num_nodes}, {feature_dim(self.n)})")
        if self.controls.shape != (self.num_nodes, 4, 2):
            raise GraphFormatError("control point array does not match node count")
        e = self.edges
        if e.size:
            if e.ndim != 2 or e.shape[1] != 2:
                raise GraphFormatError("edges must be index pairs")
            if e.min() < 0 or e.max() >= self.num_nodes:
                raise GraphFormatError("edge index out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphFormatError("self-edge")
            canon = {tuple(sorted(p)) for p in e.tolist()}
            if len(canon) != len(e):
                raise GraphFormatError("duplicate edge")
        if self.labels is not None:
            k = get_scheme(self.scheme).num_classes
            if len(self.labels) != self.num_nodes:
                raise GraphFormatError("label count does not match node count")
            if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= k):
                raise GraphFormatError("label out of range for scheme")


def clique_edges(vertex_incidence) -> np.ndarray:
    """Undirected edges joining every pair of components sharing a vertex."""
    pairs = set()
    for members in vertex_incidence:
        for a, b in combinations(sorted(set(members)), 2):
            pairs.add((a, b))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.array(sorted(pairs), dtype=np.int64)


def build_graph(curves, vertices, n: int = DEFAULT_N, scheme: str = THREE_CLASS.name,
                provenance: dict | None = None) -> ComponentGraph:
    """One node per (normalised) curve; a clique of edges at every shared vertex.

    ``vertices`` is a VertexSet or any sequence of objects with a ``traces``
    attribute; incidence is read from each curve's ``vertex_ids``.
    """
    verts = getattr(vertices, "vertices", vertices)
    incidence: list[list[int]] = [[] for _ in verts]
    for i, c in enumerate(curves):
        for v in set(c.vertex_ids):
            if v < 0 or v >= len(verts):
                raise ValueError(f"curve {i} refers to unknown vertex {v}")
            incidence[v].append(i)
    feats = np.array([featurize(c, n) for c in curves], dtype=np.float64).reshape(len(curves), feature_dim(n))
    controls = np.array([c.control for c in curves], dtype=np.float64).reshape(len(curves), 4, 2)
    return ComponentGraph(controls, feats, clique_edges(incidence), n, scheme,
                          provenance=dict(provenance or {}))


# ---------------------------------------------------------------- ground truth

def classify_color(rgb, scheme: LabelScheme) -> int | None:
    """Class index of one GT pixel, or None for background."""
    rgb = np.asarray(rgb, dtype=np.int64)
    if rgb.min() >= _BACKGROUND_MIN:
        return None
    best, best_d = None, None
    for color, cls in scheme.palette:
        d = int(np.sum((rgb - np.asarray(color)) ** 2))
        if best_d is None or d < best_d:
            best, best_d = cls, d
    chromatic = int(rgb.max() - rgb.min()) > 48
    if best_d > _SNAP_TOLERANCE and chromatic:
        return scheme.other_class
    return best


def _vote_at(gt: np.ndarray, x: float, y: float, scheme: LabelScheme) -> int | None:
    h, w = gt.shape[:2]
    xi = int(np.clip(np.floor(x + 0.5), 0, w - 1))
    yi = int(np.clip(np.floor(y + 0.5), 0, h - 1))
    cls = classify_color(gt[yi, xi], scheme)
    if cls is not None:
        return cls
    best = None
    for dy in range(-_SEARCH_RADIUS, _SEARCH_RADIUS + 1):
        for dx in range(-_SEARCH_RADIUS, _SEARCH_RADIUS + 1):
            d2 = dx * dx + dy * dy
            if d2 > _SEARCH_RADIUS ** 2:
                continue
            qx, qy = xi + dx, yi + dy
            if not (0 <= qx < w and 0 <= qy < h):
                continue
            c = classify_color(gt[qy, qx], scheme)
            if c is not None and (best is None or d2 < best[0]):
                best = (d2, c)
    return None if best is None else best[1]


def majority(votes, num_classes: int) -> int:
    """Most frequent class; ties go to the lowest class index."""
    counts = np.bincount(np.asarray(votes, dtype=np.int64), minlength=num_classes)
    return int(np.argmax(counts))


def label_from_ground_truth(g: ComponentGraph, gt: ColorRaster, scheme: LabelScheme,
                            pixel_transform=None) -> ComponentGraph:
    """Label every node by majority vote of GT colours under its sample points.

    ``pixel_transform`` maps normalised coordinates to raster pixels; by default
    it is the inverse of the normalisation recorded in the graph provenance.
    """
    if pixel_transform is None:
        pixel_transform = graph_pixel_transform(g)
    src = g.provenance.get("image_size")
    if src is not None and tuple(src) != (gt.width, gt.height):
        raise LabelingError(f"ground truth is {gt.width}x{gt.height}, drawing was {src[0]}x{src[1]}")
    labels = np.zeros(g.num_nodes, dtype=np.int64)
    bad = []
    for i, c in enumerate(g.curves()):
        pts = pixel_transform(sample_equal_arclength(c, g.n).points)
        votes = [v for v in (_vote_at(gt.pixels, x, y, scheme) for x, y in pts) if v is not None]
        if not votes:
            bad.append(i)
            continue
        labels[i] = majority(votes, scheme.num_classes)
    if bad:
        raise LabelingError(f"no ground-truth votes for nodes {bad}")
    return ComponentGraph(g.controls, g.features, g.edges, g.n, scheme.name, labels,
                          dict(g.provenance))


def graph_pixel_transform(g: ComponentGraph):
    norm = g.provenance.get("normalization")
    if norm is None:
        raise LabelingError("graph carries no normalisation record; pass pixel_transform")
    return UnitSquareTransform(norm["scale"], tuple(norm["origin"])).inverse


# ---------------------------------------------------------------- I/O

def graph_to_dict(g: ComponentGraph) -> dict:
    d = {
        "version": GRAPH_FORMAT_VERSION,
        "n": g.n,
        "scheme": g.scheme,
        "nodes": [{"control": c.tolist(), "features": f.tolist()}
                  for c, f in zip(g.controls, g.features)],
        "edges": g.edges.tolist(),
    }
    if g.labels is not None:
        d["labels"] = [int(v) for v in g.labels]
    d["provenance"] = g.provenance
    return d


def graph_from_dict(d: dict) -> ComponentGraph:
    if not isinstance(d, dict):
        raise GraphFormatError("graph file must hold a JSON object")
    if d.get("version") != GRAPH_FORMAT_VERSION:
        raise GraphFormatError(f"unsupported graph version {d.get('version')!r}")
    try:
        n = int(d["n"])
        nodes = d["nodes"]
        if not nodes:
            raise GraphFormatError("empty graph")
        controls = np.array([nd["control"] for nd in nodes], dtype=np.float64)
        features = np.array([nd["features"] for nd in nodes], dtype=np.float64)
        edges = np.array(d.get("edges", []), dtype=np.int64).reshape(-1, 2)
        labels = d.get("labels")
        labels = None if labels is None else np.array(labels, dtype=np.int64)
        get_scheme(d["scheme"])
    except GraphFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph file: {exc}") from exc
    g = ComponentGraph(controls, features, edges, n, d["scheme"], labels, d.get("provenance", {}))
    g.validate()
    return g


def save_graph(g: ComponentGraph, path) -> None:
    g.validate()
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(graph_to_dict(g)), encoding="utf-8")
    tmp.replace(path)


def load_graph(path) -> ComponentGraph:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"malformed graph file {path}: {exc}") from exc
    return graph_from_dict(d)
