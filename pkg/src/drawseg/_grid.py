"""8-neighbourhood helpers shared by the skeleton and trace stages."""

import numpy as np

# Clockwise on screen (y grows downward), starting east.
NEIGHBOR_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def neighbor_count(mask: np.ndarray) -> np.ndarray:
    """Number of ink 8-neighbours of every pixel (zero padding at the border)."""
    m = np.pad(mask.astype(np.uint8), 1)
    h, w = mask.shape
    total = np.zeros((h, w), dtype=np.uint8)
    for dx, dy in NEIGHBOR_OFFSETS:
        total += m[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return total


def ink_neighbors(mask: np.ndarray, x: int, y: int):
    """Ink neighbours of ``(x, y)`` in clockwise-from-east order."""
    h, w = mask.shape
    out = []
    for dx, dy in NEIGHBOR_OFFSETS:
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and mask[ny, nx]:
            out.append((nx, ny))
    return out
