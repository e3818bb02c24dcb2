"""PGM / PPM rendering of fields, masks and planner results."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import OccupancyGrid, to_pgm_bytes
from .oracle import BinaryMask
from .visibility import VisibilityField

RED = (255, 0, 0)
YELLOW = (255, 255, 0)
GREEN = (0, 200, 0)
BLUE = (0, 0, 255)
CYAN = (0, 255, 255)
MAGENTA = (255, 0, 255)

GRAYSCALE = "grayscale"
OVERLAY = "thresholded-overlay"


def _values(item) -> np.ndarray:
    if isinstance(item, BinaryMask):
        return item.values.astype(np.float64)
    if isinstance(item, VisibilityField):
        return item.values
    return np.asarray(item, dtype=np.float64)


def ppm_bytes(rgb: np.ndarray) -> bytes:
    height, width, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (width, height) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Decode the P6 files written here (no comments in the header)."""
    head = data.split(maxsplit=4)
    if head[0] != b"P6":
        raise ValueError("not a binary PPM")
    width, height = int(head[1]), int(head[2])
    pixels = np.frombuffer(head[4][: width * height * 3], dtype=np.uint8)
    return pixels.reshape(height, width, 3)


def _disk(rgb, point, color, radius):
    x, y = point
    h, w, _ = rgb.shape
    rgb[max(0, y - radius):min(h, y + radius + 1), max(0, x - radius):min(w, x + radius + 1)] = color


def _segment(rgb, a, b, color):
    n = max(abs(b[0] - a[0]), abs(b[1] - a[1]), 1)
    t = np.linspace(0.0, 1.0, 2 * n + 1)
    xs = np.rint(a[0] + t * (b[0] - a[0])).astype(int)
    ys = np.rint(a[1] + t * (b[1] - a[1])).astype(int)
    rgb[ys, xs] = color


def overlay_image(item, grid: OccupancyGrid | None = None, threshold: float = 0.5, *,
                  source=None, start=None, target=None, waypoints=(), path=()) -> np.ndarray:
    """RGB array: visible white, hidden black, obstacles red, markers on top."""
    values = _values(item)
    visible = values >= threshold
    rgb = np.zeros(values.shape + (3,), dtype=np.uint8)
    rgb[visible] = 255
    if grid is not None:
        rgb[grid.cells >= 0.5] = RED
    radius = max(1, max(values.shape) // 200)
    for a, b in zip(path, list(path)[1:]):
        _segment(rgb, a, b, MAGENTA)
    for w in waypoints:
        _disk(rgb, w, CYAN, radius)
    for p in path:
        _disk(rgb, p, MAGENTA, radius)
    if source is not None:
        _disk(rgb, source, YELLOW, radius + 1)
    if start is not None:
        _disk(rgb, start, GREEN, radius + 1)
    if target is not None:
        _disk(rgb, target, BLUE, radius + 1)
    return rgb


def render_field(item, path, style: str = GRAYSCALE, /, **overlay) -> Path:
    """Write ``item`` (field, mask or array) as a grayscale PGM or an overlay PPM."""
    path = Path(path)
    if style == GRAYSCALE:
        data = to_pgm_bytes(np.rint(np.clip(_values(item), 0.0, 1.0) * 255.0))
    elif style == OVERLAY:
        data = ppm_bytes(overlay_image(item, **overlay))
    else:
        raise ValueError(f"unknown style {style!r}")
    path.write_bytes(data)
    return path
