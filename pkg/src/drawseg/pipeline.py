"""Drawing -> component graph: the full vectorization chain."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import skeleton as sk
from .config import PipelineConfig
from .curvefit import CubicBezier, fit_cubic_bezier
from .graphbuild import (ComponentGraph, build_graph, get_scheme, label_from_ground_truth,
                         normalize_components, unit_square_transform)
from .raster import BinaryRaster, ColorRaster, GrayRaster, binarize
from .trace import Trace, VertexSet, extract_traces, open_cycle, prune_and_merge, split_at_corners


@dataclass
class Vectorized:
    ink: BinaryRaster
    thinned: BinaryRaster  # before spur removal
    skeleton: BinaryRaster
    traces: list[Trace]  # surviving traces, index = source_trace of the curves
    vertices: VertexSet
    curves: list[CubicBezier]  # raster coordinates
    graph: ComponentGraph | None
    seconds: dict = field(default_factory=dict)  # wall time per stage


def trace_skeleton(skel: BinaryRaster, cfg: PipelineConfig):
    traces = []
    for t in extract_traces(skel):
        for piece in open_cycle(t):
            traces.extend(split_at_corners(piece, cfg.spike_threshold))
    return prune_and_merge(traces, cfg.merge_radius)


def fit_traces(traces, vertices: VertexSet) -> list[CubicBezier]:
    return [fit_cubic_bezier(t, i, vertices.trace_vertices[i]) for i, t in enumerate(traces)]


def vectorize(img: GrayRaster, cfg: PipelineConfig | None = None, gt: ColorRaster | None = None,
              provenance: dict | None = None) -> Vectorized:
    """Run every stage on one drawing; labels are attached when ``gt`` is given.

    ``graph`` is None when the drawing yields no components.
    """
    cfg = cfg or PipelineConfig()
    clock = time.perf_counter
    secs = {}
    t = clock()
    ink = binarize(img, cfg.threshold)
    thin = sk.skeletonize(ink, cfg.thinning)
    skel = sk.remove_spurs(thin, cfg.max_spur_len)
    secs["skeleton"] = clock() - t
    t = clock()
    traces, vertices = trace_skeleton(skel, cfg)
    curves = fit_traces(traces, vertices)
    secs["trace_fit"] = clock() - t
    if not curves:
        return Vectorized(ink, thin, skel, traces, vertices, curves, None, secs)
    t = clock()
    tf = unit_square_transform(curves)
    prov = {
        "image_size": [img.width, img.height],
        "normalization": {"scale": tf.scale, "origin": list(tf.origin)},
        "pipeline": {k: v for k, v in cfg.to_dict().items()
                     if k in ("threshold", "thinning", "max_spur_len", "spike_threshold", "merge_radius", "n")},
    }
    prov.update(provenance or {})
    g = build_graph(normalize_components(curves, tf), vertices, cfg.n, cfg.scheme, prov)
    if gt is not None:
        g = label_from_ground_truth(g, gt, get_scheme(cfg.scheme))
    secs["graph"] = clock() - t
    return Vectorized(ink, thin, skel, traces, vertices, curves, g, secs)
