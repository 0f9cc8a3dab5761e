"""Canny edge detector used as the comparison baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .imaging import as_gray, gaussian_smooth


@dataclass(frozen=True)
class CannyParams:
    """Hysteresis thresholds as fractions of the peak gradient magnitude."""

    t_low: float = 0.1
    t_high: float = 0.2
    sigma_c: float = math.sqrt(2.0)

    def __post_init__(self):
        if not 0 < self.t_low < self.t_high < 1:
            raise ParameterError(
                f"need 0 < t_low < t_high < 1, got t_low={self.t_low}, t_high={self.t_high}"
            )
        if not self.sigma_c > 0:
            raise ParameterError(f"sigma_c must be > 0, got {self.sigma_c}")


def sobel_gradients(img) -> tuple[np.ndarray, np.ndarray]:
    gx = ndimage.sobel(img, axis=1, mode="nearest")
    gy = ndimage.sobel(img, axis=0, mode="nearest")
    return gx, gy


def quantize_direction(gx, gy) -> np.ndarray:
    """Gradient direction binned to 0 (horizontal), 1 (45 deg), 2 (vertical), 3 (135 deg).

    Angles are measured with rows growing downwards, so bin 1 points from
    the top-left towards the bottom-right neighbour.
    """
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    bins = np.zeros(angle.shape, dtype=np.int8)
    bins[(angle >= 22.5) & (angle < 67.5)] = 1
    bins[(angle >= 67.5) & (angle < 112.5)] = 2
    bins[(angle >= 112.5) & (angle < 157.5)] = 3
    return bins


# (row, col) step towards the "after" neighbour for each direction bin
_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1))


def non_max_suppression(mag, bins) -> np.ndarray:
    """Keep magnitudes that peak across the edge.

    A pixel survives if it is >= its neighbour on one side and strictly > the
    other.  The asymmetric tie-break keeps exactly one of two equal peaks, so
    an ideal step edge yields a one-pixel-wide response.
    """
    h, w = mag.shape
    padded = np.pad(mag, 1)
    out = np.zeros_like(mag)
    for b, (dr, dc) in enumerate(_STEPS):
        sel = bins == b
        after = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        before = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        keep = sel & (mag > before) & (mag >= after)
        out[keep] = mag[keep]
    return out


def hysteresis(nms, low: float, high: float) -> np.ndarray:
    """Weak responses survive when 8-connected to a strong one."""
    weak = nms >= low
    strong = nms >= high
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return np.zeros(nms.shape, dtype=np.uint8)
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels].astype(np.uint8)


def canny_edges(img, p: CannyParams | None = None) -> np.ndarray:
    p = p or CannyParams()
    smoothed = gaussian_smooth(as_gray(img), p.sigma_c)
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)
    peak = float(mag.max())
    if peak == 0.0:
        return np.zeros(mag.shape, dtype=np.uint8)
    nms = non_max_suppression(mag, quantize_direction(gx, gy))
    # thresholds strictly positive, so zero-magnitude pixels never count as weak
    return hysteresis(nms, p.t_low * peak, p.t_high * peak)
