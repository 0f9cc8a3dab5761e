import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from mrpi.canny import (CannyParams, canny_edges, hysteresis, non_max_suppression,
                        quantize_direction, sobel_gradients)
from mrpi.errors import ParameterError
from mrpi.imaging import gaussian_smooth


@pytest.mark.parametrize("kw", [
    {"t_low": 0.0}, {"t_low": 0.3, "t_high": 0.2}, {"t_high": 1.0}, {"sigma_c": 0.0},
    {"t_low": 0.2, "t_high": 0.2},
])
def test_invalid_params(kw):
    with pytest.raises(ParameterError):
        CannyParams(**kw)


def test_defaults():
    p = CannyParams()
    assert (p.t_low, p.t_high) == (0.1, 0.2)
    assert p.sigma_c == pytest.approx(math.sqrt(2))


def test_constant_image_has_no_edges():
    assert not canny_edges(np.full((20, 20), 99.0)).any()


def test_vertical_step_single_line():
    img = np.zeros((16, 20))
    img[:, 10:] = 200.0
    edges = canny_edges(img)
    assert np.all(edges.sum(axis=1) == 1)
    cols = np.nonzero(edges)[1]
    assert np.all(cols == cols[0]) and cols[0] in (9, 10)


def test_horizontal_step_single_line():
    img = np.zeros((20, 16))
    img[8:, :] = 200.0
    edges = canny_edges(img)
    assert np.all(edges.sum(axis=0) == 1)


def test_disk_closed_curve(disk):
    edges = canny_edges(disk)
    assert ndimage.label(edges, np.ones((3, 3)))[1] == 1
    assert ndimage.label(1 - edges)[1] == 2


def test_direction_bins():
    gx = np.array([1.0, 1.0, 0.0, -1.0, -1.0])
    gy = np.array([0.0, 1.0, 1.0, 1.0, 0.0])
    assert quantize_direction(gx, gy).tolist() == [0, 1, 2, 3, 0]


def test_nms_ramp_peak():
    # magnitude profile across a vertical edge peaks at one column
    mag = np.tile(np.array([0.0, 1.0, 3.0, 5.0, 3.0, 1.0, 0.0]), (5, 1))
    bins = np.zeros_like(mag, dtype=np.int8)
    out = non_max_suppression(mag, bins)
    assert np.array_equal(np.nonzero(out.any(axis=0))[0], [3])


def test_nms_equal_plateau_keeps_one():
    mag = np.tile(np.array([0.0, 2.0, 4.0, 4.0, 2.0, 0.0]), (3, 1))
    out = non_max_suppression(mag, np.zeros_like(mag, dtype=np.int8))
    assert np.array_equal(np.nonzero(out.any(axis=0))[0], [2])


def _noisy(seed, n=48):
    rng = np.random.default_rng(seed)
    img = np.zeros((n, n))
    img[n // 3:, :] += 100
    img[:, n // 2:] += 60
    return img + rng.normal(0, 25, img.shape)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.4), st.floats(0.01, 0.5))
def test_hysteresis_between_strong_and_weak(seed, t_low, gap):
    t_high = min(t_low + gap, 0.95)
    img = gaussian_smooth(_noisy(seed), math.sqrt(2))
    gx, gy = sobel_gradients(img)
    mag = np.hypot(gx, gy)
    nms = non_max_suppression(mag, quantize_direction(gx, gy))
    low, high = t_low * mag.max(), t_high * mag.max()
    out = hysteresis(nms, low, high).astype(bool)
    assert np.all(out[nms >= high])
    assert not np.any(out & (nms < low))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.3), st.floats(0.01, 0.3), st.floats(0.0, 0.3))
def test_raising_t_high_never_adds(seed, t_low, gap, extra):
    img = _noisy(seed)
    lo = canny_edges(img, CannyParams(t_low, t_low + gap))
    hi = canny_edges(img, CannyParams(t_low, min(t_low + gap + extra, 0.99)))
    assert not np.any(hi & ~lo)


def test_hysteresis_connectivity():
    nms = np.zeros((5, 7))
    nms[2, 1] = 1.0    # strong
    nms[3, 2] = 0.5    # weak, diagonal neighbour of strong
    nms[2, 5] = 0.5    # weak, isolated
    out = hysteresis(nms, 0.4, 0.9)
    assert out[2, 1] == 1 and out[3, 2] == 1 and out[2, 5] == 0
