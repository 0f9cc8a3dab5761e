"""Image I/O and the low-level grid primitives shared by every stage.

Images are plain 2-D ``float64`` arrays indexed ``[row, col]`` with values in
``[0, 255]``.  ``dx`` always means the derivative along columns (x) and ``dy``
along rows (y).  Every filter here uses replicate ("nearest") borders.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image
from scipy.ndimage import convolve1d

from .errors import ImageFormatError, ParameterError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_PGM_MAGIC = b"P5"


class VectorField(NamedTuple):
    dx: np.ndarray
    dy: np.ndarray


def as_gray(img) -> np.ndarray:
    """Validate ``img`` as a finite 2-D grid and return it as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("image contains non-finite values")
    return arr


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG (gray or colour) or a binary PGM (P5).

    Colour inputs are reduced to luminance with the BT.601 weights
    0.299/0.587/0.114 in floating point, so a pure red pixel maps to 76.245
    rather than a rounded integer.

    Raises
    ------
    OSError
        If the file cannot be opened.
    ImageFormatError
        If the file is not PNG/P5 or uses more than 8 bits per sample.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if not (head.startswith(_PNG_MAGIC) or head.startswith(_PGM_MAGIC)):
        raise ImageFormatError(f"{path}: only PNG and binary PGM (P5) are supported")

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ImageFormatError(f"{path}: 16-bit / float images are not supported")
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            if mode == "1":
                im = im.convert("L")
                mode = "L"
            data = np.asarray(im)
    except ImageFormatError:
        raise
    except OSError as exc:
        raise ImageFormatError(f"{path}: cannot decode image ({exc})") from exc

    if mode in ("L", "LA"):
        gray = data[..., 0] if data.ndim == 3 else data
        return gray.astype(np.float64)
    if mode in ("RGB", "RGBA"):
        rgb = data[..., :3].astype(np.float64)
        r, g, b = LUMA_WEIGHTS
        return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]
    raise ImageFormatError(f"{path}: unsupported image mode {mode!r}")


def to_uint8(img) -> np.ndarray:
    """Clip to [0, 255] and round to bytes for display or PNG output."""
    return np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)


def save_png(path, img) -> None:
    Image.fromarray(to_uint8(img), mode="L").save(path, format="PNG")


def save_edge_png(path, bits) -> None:
    """Write a binary edge map so that edges render black on white."""
    bits = np.asarray(bits)
    Image.fromarray(np.where(bits != 0, 0, 255).astype(np.uint8), mode="L").save(
        path, format="PNG"
    )


def load_edge_png(path) -> np.ndarray:
    """Inverse of :func:`save_edge_png`: dark pixels (< 128) become 1."""
    return (load_image(path) < 128).astype(np.uint8)


def field_to_gray(field) -> np.ndarray:
    """Linearly map a real field onto [0, 255] for visual inspection."""
    field = np.asarray(field, dtype=np.float64)
    lo, hi = float(field.min()), float(field.max())
    if hi == lo:
        return np.full(field.shape, 127.0)
    return (field - lo) * (255.0 / (hi - lo))


def gaussian_kernel(sigma_g: float) -> np.ndarray:
    """Sampled Gaussian truncated at ``ceil(3 * sigma_g)`` and normalised to sum 1."""
    if not sigma_g > 0:
        raise ParameterError(f"sigma_g must be > 0, got {sigma_g}")
    radius = int(math.ceil(3.0 * sigma_g))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma_g * sigma_g))
    return k / k.sum()


def gaussian_smooth(img, sigma_g: float) -> np.ndarray:
    """Separable Gaussian blur with replicate padding."""
    kernel = gaussian_kernel(sigma_g)
    arr = as_gray(img)
    out = convolve1d(arr, kernel, axis=0, mode="nearest")
    return convolve1d(out, kernel, axis=1, mode="nearest")


def gradient(img) -> VectorField:
    """Central differences on a replicate-padded grid.

    At the borders this reduces to half the one-sided difference, so a
    constant image has zero gradient everywhere, including the frame.
    """
    arr = as_gray(img)
    if min(arr.shape) < 2:
        raise ParameterError(f"gradient needs at least 2x2 pixels, got {arr.shape}")
    p = np.pad(arr, 1, mode="edge")
    dx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    dy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return VectorField(dx, dy)


def _cubic_weights(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    """Keys cubic weights for taps at offsets -1, 0, 1, 2 from floor(x)."""
    d = np.stack([1.0 + t, t, 1.0 - t, 2.0 - t], axis=-1)
    near = ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0
    far = ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a
    return np.where(d <= 1.0, near, far)


def _resample_matrix(n_in: int, n_out: int) -> np.ndarray:
    # pixel-centre alignment: output centres map back onto input centres
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    base = np.floor(src)
    w = _cubic_weights(src - base)
    mat = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    for tap in range(4):
        idx = np.clip(base.astype(np.int64) - 1 + tap, 0, n_in - 1)
        np.add.at(mat, (rows, idx), w[:, tap])
    return mat


def bicubic_resize(img, scale: float) -> np.ndarray:
    """Catmull-Rom (a = -0.5) resampling to ``round(scale * shape)``.

    Reproduces constants everywhere and affine ramps wherever the 4x4
    stencil stays inside the image; near the frame the replicated border
    samples bend a ramp slightly, as with any clamped-edge resampler.
    """
    arr = as_gray(img)
    if not scale > 0:
        raise ParameterError(f"scale must be > 0, got {scale}")
    h_out = int(math.floor(scale * arr.shape[0] + 0.5))
    w_out = int(math.floor(scale * arr.shape[1] + 0.5))
    if h_out < 2 or w_out < 2:
        raise ParameterError(f"scale {scale} gives a {h_out}x{w_out} image; need >= 2x2")
    wy = _resample_matrix(arr.shape[0], h_out)
    wx = _resample_matrix(arr.shape[1], w_out)
    return wy @ arr @ wx.T
