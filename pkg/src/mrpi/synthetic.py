"""Synthetic test images with analytically known boundaries."""
from __future__ import annotations

import numpy as np


def _centre(size: int) -> float:
    return (size - 1) / 2.0


def disk_image(size: int = 128, radius: float = 40.0, inside: float = 50.0,
               outside: float = 200.0, center=None) -> np.ndarray:
    """Dark disk on a light background; a pixel is inside if its centre is."""
    cy, cx = center if center is not None else (_centre(size), _centre(size))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    d = np.hypot(yy - cy, xx - cx)
    return np.where(d <= radius, inside, outside).astype(np.float64)


def circle_truth(size: int = 128, radius: float = 40.0, center=None) -> np.ndarray:
    """Pixels whose unit square is crossed by the circle of ``radius``."""
    cy, cx = center if center is not None else (_centre(size), _centre(size))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dy, dx = np.abs(yy - cy), np.abs(xx - cx)
    near = np.hypot(np.maximum(dy - 0.5, 0.0), np.maximum(dx - 0.5, 0.0))
    far = np.hypot(dy + 0.5, dx + 0.5)
    return ((near <= radius) & (far >= radius)).astype(np.uint8)


def ring_field(size: int = 64, radius: float = 20.0, center=None) -> np.ndarray:
    """Signed distance to a circle: negative inside, positive outside."""
    cy, cx = center if center is not None else (_centre(size), _centre(size))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    return np.hypot(yy - cy, xx - cx) - radius
