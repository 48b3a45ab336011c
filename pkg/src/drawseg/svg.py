"""SVG export: one cubic path per component, stroked in the scheme palette."""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from .graphbuild import ComponentGraph, LabelingError, graph_pixel_transform

_UNLABELED = (0, 0, 255)


def _hex(rgb) -> str:
    return "#%02x%02x%02x" % tuple(int(v) for v in rgb)


def graph_to_svg(g: ComponentGraph, labels=None, stroke_width: float = 2.0) -> str:
    """Render ``g`` in raster coordinates when it records its normalisation.

    ``labels`` defaults to the graph's own labels; unlabeled nodes are blue.
    """
    labels = g.labels if labels is None else np.asarray(labels)
    if labels is not None and len(labels) != g.num_nodes:
        raise ValueError("label count does not match node count")
    try:
        to_px = graph_pixel_transform(g)
        w, h = g.provenance.get("image_size") or (1000, 1000)
    except LabelingError:
        to_px = lambda p: np.asarray(p) * 1000.0  # noqa: E731
        w = h = 1000
    scheme = g.label_scheme
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
           f'<rect width="{w}" height="{h}" fill="white"/>']
    for i, ctrl in enumerate(g.controls):
        p = to_px(ctrl)
        color = _UNLABELED if labels is None else scheme.display_color(int(labels[i]))
        d = "M {:.3f} {:.3f} C {:.3f} {:.3f} {:.3f} {:.3f} {:.3f} {:.3f}".format(*p.reshape(-1))
        cls = "unlabeled" if labels is None else scheme.classes[int(labels[i])]
        out.append(f'<path d="{d}" fill="none" stroke="{_hex(color)}" stroke-width="{stroke_width}" '
                   f'class={quoteattr(cls)}/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
