import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from conftest import components8, count_2x2
from drawseg.raster import BinaryRaster
from drawseg.skeleton import available_methods, register_method, remove_spurs, skeletonize


def _published_zhang_suen(mask):
    """Textbook two-subiteration Zhang-Suen with parallel deletion (test oracle)."""
    img = np.pad(mask.astype(int), 1)
    changed = True
    while changed:
        changed = False
        for step in (0, 1):
            doomed = []
            for y in range(1, img.shape[0] - 1):
                for x in range(1, img.shape[1] - 1):
                    if not img[y, x]:
                        continue
                    p2, p3, p4, p5 = img[y - 1, x], img[y - 1, x + 1], img[y, x + 1], img[y + 1, x + 1]
                    p6, p7, p8, p9 = img[y + 1, x], img[y + 1, x - 1], img[y, x - 1], img[y - 1, x - 1]
                    ring = [p2, p3, p4, p5, p6, p7, p8, p9, p2]
                    b = sum(ring[:8])
                    a = sum(1 for i in range(8) if ring[i] == 0 and ring[i + 1] == 1)
                    if step == 0:
                        c1, c2 = p2 * p4 * p6, p4 * p6 * p8
                    else:
                        c1, c2 = p2 * p4 * p8, p2 * p6 * p8
                    if 2 <= b <= 6 and a == 1 and c1 == 0 and c2 == 0:
                        doomed.append((y, x))
            for y, x in doomed:
                img[y, x] = 0
            changed |= bool(doomed)
    return img[1:-1, 1:-1].astype(bool)


def _mask(w, h, ink):
    return BinaryRaster.from_ink(w, h, ink)


def test_single_pixel_and_empty():
    one = _mask(5, 5, [(2, 2)])
    assert skeletonize(one) == one
    empty = BinaryRaster(np.zeros((4, 6), bool))
    assert skeletonize(empty) == empty


def test_bar_matches_published_oracle():
    m = np.zeros((7, 24), bool)
    m[2:5, 2:22] = True
    oracle = _published_zhang_suen(m)
    ys, xs = np.nonzero(oracle)
    assert set(ys.tolist()) == {3}  # the textbook result is a single row
    out = remove_spurs(skeletonize(BinaryRaster(m))).mask
    oy, ox = np.nonzero(out)
    assert set(oy.tolist()) == {3}
    assert set(xs.tolist()) <= set(ox.tolist())
    # contiguous, at most one pixel longer than the oracle at each end
    assert ox.max() - ox.min() + 1 == len(ox)
    assert xs.min() - ox.min() <= 1 and ox.max() - xs.max() <= 1
    assert len(ox) >= 17


def test_diagonal_and_square_survive():
    # the textbook rule would erase a 2x2 square entirely
    sq = np.zeros((6, 6), bool)
    sq[2:4, 2:4] = True
    assert not _published_zhang_suen(sq).any()
    out = skeletonize(BinaryRaster(sq)).mask
    assert out.sum() >= 1 and count_2x2(out) == 0
    diag = np.zeros((20, 20), bool)
    for i in range(2, 17):
        diag[i, i] = diag[i, i + 1] = True
    out = skeletonize(BinaryRaster(diag)).mask
    assert components8(out) == 1
    assert out.sum() >= 14


def test_unknown_method():
    with pytest.raises(ValueError, match="unknown thinning method"):
        skeletonize(_mask(3, 3, [(1, 1)]), "medial-axis")


def test_register_method():
    register_method("identity-for-test", lambda m: m.copy())
    assert "identity-for-test" in available_methods()
    m = _mask(4, 4, [(1, 1), (2, 2)])
    assert skeletonize(m, "identity-for-test") == m


def test_stub_removed():
    line = [(x, 5) for x in range(2, 18)]
    stub = [(10, 4), (10, 3)]
    out = remove_spurs(_mask(20, 10, line + stub), 3)
    assert out.ink == set(line)


def test_spur_len_zero_is_identity():
    ink = [(x, 5) for x in range(2, 18)] + [(10, 4), (10, 3)]
    m = _mask(20, 10, ink)
    assert remove_spurs(m, 0) == m


def test_plus_with_long_arms_unchanged():
    c = 12
    ink = {(c, c)}
    for k in range(1, 11):
        ink |= {(c + k, c), (c - k, c), (c, c + k), (c, c - k)}
    m = _mask(25, 25, ink)
    assert skeletonize(m) == m
    assert remove_spurs(m, 3) == m


def _blob_masks():
    return st.integers(0, 10_000).map(_random_strokes)


def _random_strokes(seed):
    from PIL import Image, ImageDraw
    rng = np.random.default_rng(seed)
    img = Image.new("1", (80, 60), 0)
    d = ImageDraw.Draw(img)
    for _ in range(int(rng.integers(1, 5))):
        pts = [tuple(rng.integers(2, 58, 2).tolist()) for _ in range(int(rng.integers(2, 4)))]
        d.line(pts, fill=1, width=int(rng.integers(1, 6)))
    if rng.random() < 0.5:
        cx, cy, r = int(rng.integers(15, 65)), int(rng.integers(15, 45)), int(rng.integers(4, 12))
        d.ellipse([cx - r, cy - r, cx + r, cy + r], outline=1, width=int(rng.integers(1, 4)))
    return np.asarray(img, dtype=bool)


@settings(max_examples=40, deadline=None)
@given(_blob_masks())
def test_thinness_topology_idempotence(mask):
    out = skeletonize(BinaryRaster(mask)).mask
    assert count_2x2(out) == 0
    assert components8(out) == components8(mask)
    # each output component lies in exactly one input component
    lab, _ = ndimage.label(mask, structure=np.ones((3, 3)))
    olab, k = ndimage.label(out, structure=np.ones((3, 3)))
    for i in range(1, k + 1):
        assert len(set(lab[olab == i].tolist()) - {0}) == 1
    assert np.all(mask[out])
    assert np.array_equal(skeletonize(BinaryRaster(out)).mask, out)


@settings(max_examples=25, deadline=None)
@given(_blob_masks())
def test_spur_removal_keeps_connectivity(mask):
    thin = skeletonize(BinaryRaster(mask))
    out = remove_spurs(thin, 3).mask
    assert components8(out) == components8(thin.mask)
    assert np.all(thin.mask[out])


def test_seeded_drawings_preserve_components():
    from drawseg.raster import binarize
    from drawseg.synthgen import DrawingSpec, generate
    for seed in range(50):
        spec = DrawingSpec(seed, canvas=384, template=("RectPlate", "LBracket", "FlangedDisc")[seed % 3],
                           hole_count=2 if seed % 3 != 2 else 4, dim_count=2, text_tokens=2, stroke_width=2.0)
        ink = binarize(generate(spec).gray).mask
        out = skeletonize(BinaryRaster(ink)).mask
        assert count_2x2(out) == 0
        assert components8(out) == components8(ink)
