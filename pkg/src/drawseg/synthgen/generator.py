"""Seeded synthetic part drawings with per-primitive ground truth.

Every drawing is a list of primitives (the manifest), each tagged Contour,
Text or Dimension. The same primitives are rasterised twice, once in black
for the drawing and once in the three-class palette for the ground truth,
with aliasing off so both images share exactly the same ink pixels.
Paint order is Contour, Text, Dimension. A component ending on a crossing
then reads the other class at its end samples, and a two-two vote is a tie
that resolves to the lower class index, which is the right answer in both
directions.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from ..graphbuild import THREE_CLASS
from ..raster import ColorRaster, GrayRaster
from . import font

TEMPLATES = ("RectPlate", "FlangedDisc", "LBracket")

CONTOUR, TEXT, DIMENSION = THREE_CLASS.classes
_PAINT_ORDER = (CONTOUR, TEXT, DIMENSION)
_COLORS = {name: THREE_CLASS.display_color(k) for k, name in enumerate(THREE_CLASS.classes)}
_CLEARANCE = 7  # px kept free around free-standing text
_LABEL_CLEARANCE = 3  # dimension values sit closer to their own lines


class GeometryOverflow(ValueError):
    """The requested features do not fit on the canvas."""


@dataclass(frozen=True)
class DrawingSpec:
    seed: int
    canvas: int = 1024
    template: str = "RectPlate"
    hole_count: int = 2
    dim_count: int = 4
    text_tokens: int = 4
    stroke_width: float = 3.0

    def validate(self) -> None:
        if self.canvas < 256:
            raise ValueError("canvas must be at least 256 px")
        if min(self.hole_count, self.dim_count, self.text_tokens) < 0:
            raise ValueError("counts must be non-negative")
        if self.template not in TEMPLATES:
            raise ValueError(f"unknown template {self.template!r}")
        if self.stroke_width <= 0:
            raise ValueError("stroke width must be positive")

    @property
    def size(self) -> tuple[int, int]:
        return self.canvas, int(round(self.canvas * 0.75))


@dataclass
class Primitive:
    cls: str
    role: str
    kind: str  # line | polyline | circle | arc | triangle | dot
    points: list  # line/polyline/triangle vertices; circle/arc/dot: [[cx, cy]]
    radius: float = 0.0
    angles: tuple[float, float] = (0.0, 360.0)  # arc start/end, degrees clockwise on screen

    def to_dict(self) -> dict:
        d = asdict(self)
        d["angles"] = list(self.angles)
        return d

    def polyline(self, step: float = 1.0) -> np.ndarray:
        """Dense point samples of the primitive's centre line (for geometric checks)."""
        if self.kind in ("line", "polyline", "triangle"):
            pts = np.asarray(self.points, dtype=np.float64)
            if self.kind == "triangle":
                pts = np.vstack([pts, pts[:1]])
            out = [pts[:1]]
            for a, b in zip(pts, pts[1:]):
                k = max(2, int(np.linalg.norm(b - a) / step) + 1)
                out.append(a + (b - a) * np.linspace(0, 1, k)[1:, None])
            return np.vstack(out)
        cx, cy = self.points[0]
        if self.kind == "dot":
            return np.array([[cx, cy]], dtype=np.float64)
        a0, a1 = self.angles
        k = max(8, int(abs(a1 - a0) / 360 * 2 * math.pi * self.radius / step))
        ang = np.radians(np.linspace(a0, a1, k))
        return np.stack([cx + self.radius * np.cos(ang), cy + self.radius * np.sin(ang)], axis=1)


@dataclass
class Drawing:
    spec: DrawingSpec
    gray: GrayRaster
    gt: ColorRaster
    manifest: list[Primitive] = field(default_factory=list)

    def class_counts(self) -> dict[str, int]:
        out = {c: 0 for c in THREE_CLASS.classes}
        for p in self.manifest:
            out[p.cls] += 1
        return out


def _fmt(v: float) -> str:
    v = round(v * 2) / 2
    return str(int(v)) if v == int(v) else f"{v:.1f}"


class _Builder:
    def __init__(self, spec: DrawingSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.w, self.h = spec.size
        self.u = spec.canvas / 1024.0
        self.sw = max(1, int(round(spec.stroke_width)))
        self.prims: list[Primitive] = []
        self.occ = Image.new("1", (self.w, self.h), 0)
        self._occ_draw = ImageDraw.Draw(self.occ)
        self.text_h = 22 * self.u
        self.px_per_mm = float(self.rng.uniform(2.0, 4.5))
        self.ext_gap = float(self.rng.choice([0.0, 4.0])) * self.u
        self.tokens = spec.text_tokens

    # ---- primitives
    def add(self, prim: Primitive) -> Primitive:
        self.prims.append(prim)
        _render(self._occ_draw, prim, 1, self.sw + 2)
        return prim

    def line(self, cls, role, a, b):
        return self.add(Primitive(cls, role, "line", [list(map(float, a)), list(map(float, b))]))

    def circle(self, cls, role, c, r):
        return self.add(Primitive(cls, role, "circle", [list(map(float, c))], float(r)))

    def arc(self, cls, role, c, r, a0, a1):
        return self.add(Primitive(cls, role, "arc", [list(map(float, c))], float(r), (float(a0), float(a1))))

    def arrow(self, tip, direction):
        """Filled arrowhead with its tip at ``tip`` pointing along ``direction``."""
        d = np.asarray(direction, dtype=np.float64)
        d /= np.linalg.norm(d)
        n = np.array([-d[1], d[0]])
        length = float(self.rng.uniform(8, 10)) * self.u
        half = float(self.rng.uniform(2.5, 3.5)) * self.u
        tip = np.asarray(tip, dtype=np.float64)
        base = tip - d * length
        pts = [tip, base + n * half, base - n * half]
        return self.add(Primitive(DIMENSION, "arrow", "triangle", [p.tolist() for p in pts]))

    # ---- text
    def _free(self, box, clearance: float = _CLEARANCE) -> bool:
        x0, y0, x1, y1 = box
        c = clearance * self.u
        x0, y0, x1, y1 = int(x0 - c), int(y0 - c), int(math.ceil(x1 + c)), int(math.ceil(y1 + c))
        if x0 < 2 or y0 < 2 or x1 > self.w - 3 or y1 > self.h - 3:
            return False
        region = np.asarray(self.occ.crop((x0, y0, x1, y1)))
        return not region.any()

    def text(self, s: str, origin, angle: float = 0.0, clearance: float = _CLEARANCE) -> bool:
        th = self.text_h
        tw = font.text_width(s, th)
        ox, oy = origin
        box = (ox, oy, ox + tw, oy + th) if angle == 0 else (ox, oy - tw, ox + th, oy)
        if not self._free(box, clearance):
            return False
        lines, dots = font.layout(s, origin, th, angle)
        for pl in lines:
            self.add(Primitive(TEXT, "text", "polyline", pl.tolist()))
        for x, y, r in dots:
            self.add(Primitive(TEXT, "text", "dot", [[x, y]], max(r, self.sw * 0.8)))
        return True

    def take_token(self) -> bool:
        if self.tokens > 0:
            self.tokens -= 1
            return True
        return False

    def place_label(self, s, candidates, angle=0.0) -> bool:
        if self.tokens <= 0:
            return False
        for origin in candidates:
            if self.text(s, origin, angle, clearance=_LABEL_CLEARANCE):
                self.tokens -= 1
                return True
        return False

    def value(self, px: float) -> str:
        return _fmt(px / self.px_per_mm)

    # ---- dimension sets
    def hdim(self, xa, ya, xb, yb, dim_y):
        """Horizontal linear dimension measured between x=xa and x=xb."""
        xa, xb = min(xa, xb), max(xa, xb)
        over = 8 * self.u
        for x, y in ((xa, ya), (xb, yb)):
            sgn = 1 if dim_y > y else -1
            self.line(DIMENSION, "extension", (x, y + sgn * self.ext_gap), (x, dim_y + sgn * over))
        self.line(DIMENSION, "dimline", (xa, dim_y), (xb, dim_y))
        self.arrow((xa, dim_y), (-1, 0))
        self.arrow((xb, dim_y), (1, 0))
        s = self.value(xb - xa)
        tw = font.text_width(s, self.text_h)
        mid = 0.5 * (xa + xb)
        gap = 8 * self.u
        self.place_label(s, [(mid - tw / 2, dim_y - gap - self.text_h),
                             (mid - tw / 2, dim_y + gap),
                             (xb + 3 * gap, dim_y - self.text_h / 2)])

    def vdim(self, xa, ya, xb, yb, dim_x):
        """Vertical linear dimension measured between y=ya and y=yb."""
        if ya > yb:
            xa, ya, xb, yb = xb, yb, xa, ya
        over = 8 * self.u
        for x, y in ((xa, ya), (xb, yb)):
            sgn = 1 if dim_x > x else -1
            self.line(DIMENSION, "extension", (x + sgn * self.ext_gap, y), (dim_x + sgn * over, y))
        self.line(DIMENSION, "dimline", (dim_x, ya), (dim_x, yb))
        self.arrow((dim_x, ya), (0, -1))
        self.arrow((dim_x, yb), (0, 1))
        s = self.value(yb - ya)
        tw = font.text_width(s, self.text_h)
        mid = 0.5 * (ya + yb)
        gap = 8 * self.u
        self.place_label(s, [(dim_x - gap - self.text_h, mid + tw / 2),
                             (dim_x + gap, mid + tw / 2)], angle=90.0)

    def callout(self, center, r, prefix: str, value_px: float, angles=(45, 135, -45, -135)):
        """Leader with an arrow touching a circle or arc, plus a text shoulder."""
        cx, cy = center
        s = prefix + self.value(value_px)
        tw = font.text_width(s, self.text_h)
        order = list(angles)
        self.rng.shuffle(order)
        for phi in order:
            d = np.array([math.cos(math.radians(phi)), -math.sin(math.radians(phi))])
            tip = np.array([cx, cy]) + d * r
            knee = tip + d * float(self.rng.uniform(45, 75)) * self.u
            side = 1.0 if d[0] >= 0 else -1.0
            end = knee + np.array([side * (tw + 8 * self.u), 0.0])
            lo = np.minimum(knee, end)
            label = (lo[0] + 4 * self.u, knee[1] - 8 * self.u - self.text_h)
            if not self._inside([tip, knee, end]):
                continue
            box = (label[0], label[1], label[0] + tw, label[1] + self.text_h)
            if self.tokens > 0 and not self._free(box, _LABEL_CLEARANCE):
                continue
            self.line(DIMENSION, "leader", tip, knee)
            self.line(DIMENSION, "leader", knee, end)
            self.arrow(tip, -d)
            if self.tokens > 0 and self.text(s, label, clearance=_LABEL_CLEARANCE):
                self.tokens -= 1
            return True
        return False

    def centerlines(self, center, r):
        cx, cy = center
        e = r + 10 * self.u
        self.line(DIMENSION, "centerline", (cx - e, cy), (cx + e, cy))
        self.line(DIMENSION, "centerline", (cx, cy - e), (cx, cy + e))

    def _inside(self, pts) -> bool:
        m = 4
        return all(m <= p[0] <= self.w - 1 - m and m <= p[1] <= self.h - 1 - m for p in pts)

    def notes(self):
        """Spend remaining text tokens on free-standing notes."""
        pool = ["±0.1", "±0.05", "R2", "0.5", "Ø6", "1.6", "3.2", "12.5"]
        xs = np.linspace(0.04 * self.w, 0.8 * self.w, 9)
        ys = np.linspace(0.04 * self.h, 0.92 * self.h, 9)
        spots = [(float(x), float(y)) for y in ys for x in xs]
        order = self.rng.permutation(len(spots))
        k = 0
        for i in order:
            if self.tokens <= 0:
                break
            s = pool[int(self.rng.integers(len(pool)))]
            if self.text(s, spots[i]):
                self.tokens -= 1
                k += 1
        return k


def _render(draw: ImageDraw.ImageDraw, p: Primitive, fill, width: int) -> None:
    if p.kind in ("line", "polyline"):
        pts = [tuple(q) for q in p.points]
        draw.line(pts, fill=fill, width=width, joint="curve" if len(pts) > 2 else None)
    elif p.kind == "triangle":
        draw.polygon([tuple(q) for q in p.points], fill=fill)
    elif p.kind in ("circle", "arc", "dot"):
        (cx, cy), r = p.points[0], p.radius
        if p.kind == "dot":
            draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=fill)
            return
        # PIL strokes inward from the bounding box: widen it to centre the stroke on r
        rr = r + width / 2.0
        box = [cx - rr, cy - rr, cx + rr, cy + rr]
        if p.kind == "circle":
            draw.ellipse(box, outline=fill, width=width)
        else:
            draw.arc(box, p.angles[0], p.angles[1], fill=fill, width=width)
    else:
        raise ValueError(f"unknown primitive kind {p.kind!r}")


# ---------------------------------------------------------------- templates

def _part_box(b: _Builder, wr=(0.36, 0.5), hr=(0.34, 0.5)):
    w, h = b.w, b.h
    pw = float(b.rng.uniform(*wr)) * w
    ph = float(b.rng.uniform(*hr)) * h
    left, top = 0.13 * w, 0.2 * h
    slack_x = 0.72 * w - pw - left
    slack_y = 0.7 * h - ph - top
    x0 = left + float(b.rng.uniform(0, max(slack_x, 1)))
    y0 = top + float(b.rng.uniform(0, max(slack_y, 1)))
    return x0, y0, x0 + pw, y0 + ph


def _place_holes(b: _Builder, regions, count, rmin=10, rmax=32):
    """Rejection-sample non-overlapping holes inside axis-aligned ``regions``."""
    holes = []
    attempts = 0
    clear = 18 * b.u
    while len(holes) < count:
        attempts += 1
        if attempts > 500:
            raise GeometryOverflow(f"cannot fit {count} holes in the part")
        x0, y0, x1, y1 = regions[int(b.rng.integers(len(regions)))]
        r = float(b.rng.uniform(rmin, rmax)) * b.u
        if x1 - x0 < 2 * (r + clear) or y1 - y0 < 2 * (r + clear):
            continue
        cx = float(b.rng.uniform(x0 + r + clear, x1 - r - clear))
        cy = float(b.rng.uniform(y0 + r + clear, y1 - r - clear))
        if all(math.hypot(cx - hx, cy - hy) > r + hr + 2 * clear for hx, hy, hr in holes):
            holes.append((cx, cy, r))
    return holes


def _rect_outline(b: _Builder, x0, y0, x1, y1):
    """Rectangle with optional chamfered or filleted corners; returns fillets."""
    style = b.rng.choice(["sharp", "chamfer", "fillet"])
    k = float(b.rng.uniform(14, 28)) * b.u
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    cut = [style != "sharp" and bool(b.rng.random() < 0.6) for _ in corners]
    # each corner contributes (point entering, point leaving)
    pts = []
    fillets = []
    for i, (cx, cy) in enumerate(corners):
        if not cut[i]:
            pts.append(((cx, cy), (cx, cy)))
            continue
        sx = 1 if cx == x0 else -1
        sy = 1 if cy == y0 else -1
        prev_pt = corners[i - 1]
        # entering along the edge from the previous corner
        if prev_pt[0] == cx:
            enter, leave = (cx, cy + sy * k), (cx + sx * k, cy)
        else:
            enter, leave = (cx + sx * k, cy), (cx, cy + sy * k)
        pts.append((enter, leave))
        if style == "chamfer":
            b.line(CONTOUR, "outline", enter, leave)
        else:
            center = (cx + sx * k, cy + sy * k)
            start = {(1, 1): 180, (-1, 1): 270, (-1, -1): 0, (1, -1): 90}[(sx, sy)]
            b.arc(CONTOUR, "outline", center, k, start, start + 90)
            fillets.append((center, k))
    for i in range(4):
        a = pts[i][1]
        c = pts[(i + 1) % 4][0]
        b.line(CONTOUR, "outline", a, c)
    return fillets


def _rect_plate(b: _Builder):
    x0, y0, x1, y1 = _part_box(b)
    holes = _place_holes(b, [(x0, y0, x1, y1)], b.spec.hole_count)
    dims = b.spec.dim_count
    tier = 40 * b.u
    plan = ["width", "height"] + [("dia", i) for i in range(len(holes))]
    for i in range(min(len(holes), 2)):
        plan += [("hx", i), ("hy", i)]
    if dims > len(plan):
        raise GeometryOverflow(f"{b.spec.template} with {len(holes)} holes supports at most {len(plan)} dimensions")
    fillets = _rect_outline(b, x0, y0, x1, y1)
    for cx, cy, r in holes:
        b.circle(CONTOUR, "hole", (cx, cy), r)
    if dims:
        for cx, cy, r in holes:
            b.centerlines((cx, cy), r)
    hx_tier = hy_tier = 2
    for item in plan[:dims]:
        if item == "width":
            b.hdim(x0, y1, x1, y1, y1 + tier)
        elif item == "height":
            b.vdim(x1, y0, x1, y1, x1 + tier)
        elif item[0] == "dia":
            cx, cy, r = holes[item[1]]
            b.callout((cx, cy), r, "Ø", 2 * r)
        elif item[0] == "hx":
            cx, cy, r = holes[item[1]]
            b.hdim(x0, y1, cx, cy + r + 10 * b.u, y1 + hx_tier * tier)
            hx_tier += 1
        elif item[0] == "hy":
            cx, cy, r = holes[item[1]]
            b.vdim(x1, y0, cx + r + 10 * b.u, cy, x1 + hy_tier * tier)
            hy_tier += 1
    return fillets


def _l_bracket(b: _Builder):
    x0, y0, x1, y1 = _part_box(b)
    tx = float(b.rng.uniform(0.25, 0.45)) * (x1 - x0)
    ty = float(b.rng.uniform(0.3, 0.5)) * (y1 - y0)
    xi, yi = x0 + tx, y1 - ty
    regions = [(x0, y0, xi, y1), (xi, yi, x1, y1)]
    holes = _place_holes(b, regions, b.spec.hole_count, rmin=8, rmax=22)
    plan = ["width", "height", "legx", "legy"] + [("dia", i) for i in range(len(holes))]
    dims = b.spec.dim_count
    if dims > len(plan):
        raise GeometryOverflow(f"LBracket with {len(holes)} holes supports at most {len(plan)} dimensions")
    fillet = bool(b.rng.random() < 0.5)
    k = float(b.rng.uniform(12, 22)) * b.u
    b.line(CONTOUR, "outline", (x0, y0), (xi, y0))
    b.line(CONTOUR, "outline", (xi, y0), (xi, yi - (k if fillet else 0)))
    if fillet:
        b.arc(CONTOUR, "outline", (xi + k, yi - k), k, 90, 180)
    b.line(CONTOUR, "outline", (xi + (k if fillet else 0), yi), (x1, yi))
    b.line(CONTOUR, "outline", (x1, yi), (x1, y1))
    b.line(CONTOUR, "outline", (x1, y1), (x0, y1))
    b.line(CONTOUR, "outline", (x0, y1), (x0, y0))
    for cx, cy, r in holes:
        b.circle(CONTOUR, "hole", (cx, cy), r)
    if dims:
        for cx, cy, r in holes:
            b.centerlines((cx, cy), r)
    tier = 40 * b.u
    for item in plan[:dims]:
        if item == "width":
            b.hdim(x0, y1, x1, y1, y1 + tier)
        elif item == "height":
            b.vdim(x0, y0, x0, y1, x0 - tier)
        elif item == "legx":
            b.hdim(x0, y0, xi, y0, y0 - tier)
        elif item == "legy":
            b.vdim(x1, yi, x1, y1, x1 + tier)
        else:
            cx, cy, r = holes[item[1]]
            b.callout((cx, cy), r, "Ø", 2 * r)
    return [((xi + k, yi - k), k)] if fillet else []


def _flanged_disc(b: _Builder):
    w, h = b.w, b.h
    big = float(b.rng.uniform(0.2, 0.27)) * h * 1.0
    cx = float(b.rng.uniform(0.35, 0.5)) * w
    cy = float(b.rng.uniform(0.45, 0.52)) * h
    bore = float(b.rng.uniform(0.3, 0.45)) * big
    pcd = 0.5 * (big + bore)
    nh = b.spec.hole_count
    hole_r = min(0.22 * (big - bore), (math.pi * pcd / max(nh, 1)) * 0.3) if nh else 0.0
    if nh and hole_r < 4 * b.u:
        raise GeometryOverflow(f"{nh} bolt holes do not fit on the flange")
    plan = ["outer", "bore", "borev"] + (["bolt"] if nh else [])
    dims = b.spec.dim_count
    if dims > len(plan):
        raise GeometryOverflow(f"FlangedDisc supports at most {len(plan)} dimensions")
    b.circle(CONTOUR, "outline", (cx, cy), big)
    b.circle(CONTOUR, "hole", (cx, cy), bore)
    phase = float(b.rng.uniform(0, 360.0 / max(nh, 1)))
    holes = []
    for i in range(nh):
        a = math.radians(phase + 360.0 * i / nh)
        holes.append((cx + pcd * math.cos(a), cy - pcd * math.sin(a), hole_r))
        b.circle(CONTOUR, "hole", holes[-1][:2], hole_r)
    if dims:
        b.centerlines((cx, cy), big)
        if nh:
            b.circle(DIMENSION, "centerline", (cx, cy), pcd)
    tier = 40 * b.u
    for item in plan[:dims]:
        # extension lines start off the tangent points so they do not fuse with the circle
        if item == "outer":
            b.hdim(cx - big, cy + 0.4 * big, cx + big, cy + 0.4 * big, cy + big + tier)
        elif item == "bore":
            b.callout((cx, cy), bore, "Ø", 2 * bore, angles=(60, 120, -60, -120))
        elif item == "borev":
            b.vdim(cx + 0.5 * bore, cy - bore, cx + 0.5 * bore, cy + bore, cx + big + tier)
        else:
            hx, hy, hr = max(holes, key=lambda t: (t[0], -t[1]))
            b.callout((hx, hy), hr, "Ø", 2 * hr)
    return []


_TEMPLATE_FN = {"RectPlate": _rect_plate, "LBracket": _l_bracket, "FlangedDisc": _flanged_disc}


def generate(spec: DrawingSpec) -> Drawing:
    spec.validate()
    b = _Builder(spec)
    _TEMPLATE_FN[spec.template](b)
    b.notes()
    for p in b.prims:
        pts = p.polyline()
        r = p.radius if p.kind == "dot" else 0.0
        if (pts.min() - r < 1 or pts[:, 0].max() + r > b.w - 2 or pts[:, 1].max() + r > b.h - 2):
            raise GeometryOverflow("drawing extends beyond the canvas")
    gray = Image.new("L", (b.w, b.h), 255)
    color = Image.new("RGB", (b.w, b.h), (255, 255, 255))
    gd, cd = ImageDraw.Draw(gray), ImageDraw.Draw(color)
    for cls in _PAINT_ORDER:
        for p in b.prims:
            if p.cls == cls:
                _render(gd, p, 0, b.sw)
                _render(cd, p, _COLORS[cls], b.sw)
    return Drawing(spec, GrayRaster(np.asarray(gray, dtype=np.uint8).copy()),
                   ColorRaster(np.asarray(color, dtype=np.uint8).copy()), b.prims)


def spec_from_seed(seed: int, canvas: int = 1024) -> DrawingSpec:
    """A random but valid drawing specification for corpus generation."""
    rng = np.random.default_rng([seed, 7919])
    template = TEMPLATES[int(rng.integers(len(TEMPLATES)))]
    if template == "RectPlate":
        holes = int(rng.integers(0, 5))
        max_dims = 2 + holes + 2 * min(holes, 2)
    elif template == "LBracket":
        holes = int(rng.integers(0, 4))
        max_dims = 4 + holes
    else:
        holes = int(rng.integers(3, 7))
        max_dims = 4
    dims = int(rng.integers(2, min(max_dims, 7) + 1))
    tokens = dims + int(rng.integers(0, 4))
    stroke = float(rng.choice([2.0, 3.0]))
    return DrawingSpec(seed, canvas, template, holes, dims, tokens, stroke)


def drawing_names(index: int) -> tuple[str, str]:
    return f"{index:04d}_draw.png", f"{index:04d}_gt.png"


def generate_corpus(count: int, base_seed: int, out_dir, canvas: int = 1024) -> dict:
    """Write ``count`` drawing/ground-truth PNG pairs and an ``index.json``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create corpus directory {out}: {exc}") from exc
    rows = []
    for i in range(count):
        seed = base_seed + i
        spec = spec_from_seed(seed, canvas)
        d = generate(spec)
        draw_name, gt_name = drawing_names(i)
        Image.fromarray(d.gray.pixels).save(out / draw_name)
        Image.fromarray(d.gt.pixels).save(out / gt_name)
        (out / f"{i:04d}_manifest.json").write_text(
            json.dumps([p.to_dict() for p in d.manifest]), encoding="utf-8")
        rows.append({"seed": seed, "spec": asdict(spec), "drawing": draw_name, "ground_truth": gt_name,
                     "manifest": f"{i:04d}_manifest.json"})
    index = {"count": count, "base_seed": base_seed, "rows": rows}
    tmp = out / "index.json.tmp"
    tmp.write_text(json.dumps(index, indent=1), encoding="utf-8")
    tmp.replace(out / "index.json")
    return index


def load_manifest(path) -> list[Primitive]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [Primitive(d["cls"], d["role"], d["kind"], d["points"], d["radius"], tuple(d["angles"]))
            for d in raw]
