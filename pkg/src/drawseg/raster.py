"""Page image loading and binarization.

Coordinates follow image convention: origin at the top-left, x to the right,
y downward. Arrays are indexed ``[y, x]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

DEFAULT_THRESHOLD = 128

_SUPPORTED_FORMATS = {"PNG", "PPM"}  # PIL reports both P5 and P6 as PPM


class RasterError(ValueError):
    """Raised when an image file cannot be turned into a raster."""


@dataclass(frozen=True)
class GrayRaster:
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise RasterError("zero-dimension image")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ColorRaster:
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3 or self.pixels.size == 0:
            raise RasterError("zero-dimension image")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryRaster:
    """Ink mask; ``mask[y, x]`` is True for ink."""

    mask: np.ndarray  # (height, width) bool

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def ink(self) -> set[tuple[int, int]]:
        ys, xs = np.nonzero(self.mask)
        return set(zip(xs.tolist(), ys.tolist()))

    @classmethod
    def from_ink(cls, width: int, height: int, ink) -> "BinaryRaster":
        mask = np.zeros((height, width), dtype=bool)
        for x, y in ink:
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(f"ink pixel {(x, y)} outside {width}x{height} raster")
            mask[y, x] = True
        return cls(mask)

    def __eq__(self, other):
        if not isinstance(other, BinaryRaster):
            return NotImplemented
        return self.mask.shape == other.mask.shape and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None


def _open(path) -> Image.Image:
    path = Path(path)
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise RasterError(f"unsupported format: {path}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise RasterError(f"unreadable file: {path}") from exc
    if img.format not in _SUPPORTED_FORMATS:
        raise RasterError(f"unsupported format: {img.format} ({path})")
    if img.width == 0 or img.height == 0:
        raise RasterError("zero-dimension image")
    return img


def _to_rgb_array(img: Image.Image) -> np.ndarray:
    if img.mode in ("L", "1", "I", "I;16", "P", "LA"):
        if img.mode == "P":
            img = img.convert("RGB")
            return np.asarray(img, dtype=np.uint8).copy()
        gray = np.asarray(img.convert("L"), dtype=np.uint8)
        return np.repeat(gray[:, :, None], 3, axis=2)
    return np.asarray(img.convert("RGB"), dtype=np.uint8).copy()


def luma(rgb: np.ndarray) -> np.ndarray:
    """ITU-R 601 luma, rounded to the nearest integer."""
    rgb = rgb.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def load_gray(path) -> GrayRaster:
    img = _open(path)
    if img.mode == "L":
        return GrayRaster(np.asarray(img, dtype=np.uint8).copy())
    return GrayRaster(luma(_to_rgb_array(img)))


def load_color(path) -> ColorRaster:
    return ColorRaster(_to_rgb_array(_open(path)))


def binarize(img: GrayRaster, threshold: int = DEFAULT_THRESHOLD) -> BinaryRaster:
    """Dark pixels (strictly below ``threshold``) become ink."""
    if not 0 <= threshold <= 256:
        raise ValueError("threshold must lie in [0, 256]")
    return BinaryRaster(img.pixels.astype(np.int32) < threshold)


def save_gray(img: GrayRaster, path) -> None:
    Image.fromarray(np.ascontiguousarray(img.pixels, dtype=np.uint8)).save(path)


def save_color(img: ColorRaster, path) -> None:
    Image.fromarray(np.ascontiguousarray(img.pixels, dtype=np.uint8)).save(path)
