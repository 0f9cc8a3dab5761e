"""From the averaged field to a one-pixel-wide binary edge map.

Edge maps are ``uint8`` arrays holding 0 (background, rendered white) and
1 (edge, rendered black).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from .errors import DegenerateInputError, ParameterError

log = logging.getLogger(__name__)

_RING = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.int32)
_WINDOW = np.ones((3, 3), dtype=np.int32)
MAJORITY_RULES = ("neighbors", "window")


@dataclass(frozen=True)
class ThresholdBand:
    p_low: float = -0.175
    p_up: float = 0.075

    def __post_init__(self):
        if not (self.p_low <= 0 <= self.p_up and self.p_low < self.p_up):
            raise ParameterError(
                f"band [{self.p_low}, {self.p_up}] must satisfy p_low <= 0 <= p_up, p_low < p_up"
            )


def as_bits(edges) -> np.ndarray:
    arr = np.asarray(edges)
    if arr.ndim != 2:
        raise ParameterError(f"edge map must be 2-D, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ParameterError("edge map values must be 0 or 1")
    return arr.astype(np.uint8)


def normalize_field(phi_bar) -> np.ndarray:
    """Divide by ``max|phi_bar| + min|phi_bar|``."""
    phi_bar = np.asarray(phi_bar, dtype=np.float64)
    mag = np.abs(phi_bar)
    denom = mag.max() + mag.min()
    if denom == 0:
        raise DegenerateInputError("averaged field is identically zero")
    return phi_bar / denom


def threshold_band(norm, band: ThresholdBand) -> np.ndarray:
    """1 where ``p_low <= value <= p_up`` (both ends inclusive), else 0."""
    norm = np.asarray(norm, dtype=np.float64)
    return ((norm >= band.p_low) & (norm <= band.p_up)).astype(np.uint8)


def neighbor_count(bits) -> np.ndarray:
    """Number of set 8-neighbours; pixels outside the image count as 0."""
    return correlate(np.asarray(bits, dtype=np.int32), _RING, mode="constant", cval=0)


def majority_pass(bits, rule: str = "neighbors") -> np.ndarray:
    """One synchronous majority vote.

    ``"neighbors"``: the eight neighbours vote, >= 5 gives 1, <= 3 gives 0
    and a 4-4 tie gives 0.  ``"window"``: the whole 3x3 window including the
    pixel itself votes, >= 5 of 9 gives 1 (the convention of MATLAB's
    ``bwmorph(..., 'majority')``), so a set pixel survives a 4-4 tie.
    """
    if rule == "neighbors":
        return (neighbor_count(bits) >= 5).astype(np.uint8)
    if rule == "window":
        counts = correlate(np.asarray(bits, dtype=np.int32), _WINDOW, mode="constant", cval=0)
        return (counts >= 5).astype(np.uint8)
    raise ParameterError(f"unknown majority rule {rule!r}; expected one of {MAJORITY_RULES}")


def majority_smooth(edges, repeat_until_stable: bool = True, rule: str = "neighbors",
                    max_passes: int = 10_000) -> np.ndarray:
    """Majority vote smoothing, all pixels updated from the previous map.

    With ``repeat_until_stable`` the vote is repeated until a pass changes
    nothing.  Synchronous voting can fall into a two-state cycle (alternating
    one-pixel stripes do this); when a state repeats, the states of the cycle
    are intersected and voting resumes from there, so the result is always a
    fixed point of a single pass.

    Under the ``"neighbors"`` rule every convex stair step of a digital curve
    sees a 4-4 tie and is removed, so repeating to stability shrinks closed
    contours until they vanish; :func:`postprocess_pipeline` therefore votes
    with ``"window"``.
    """
    bits = as_bits(edges)
    if min(bits.shape) < 3:
        raise ParameterError(f"majority_smooth needs at least 3x3 pixels, got {bits.shape}")
    if rule not in MAJORITY_RULES:
        raise ParameterError(f"unknown majority rule {rule!r}; expected one of {MAJORITY_RULES}")
    if not repeat_until_stable:
        return majority_pass(bits, rule)

    history = {bits.tobytes(): 0}
    states = [bits]
    for _ in range(max_passes):
        nxt = majority_pass(states[-1], rule)
        if np.array_equal(nxt, states[-1]):
            return nxt
        key = nxt.tobytes()
        if key in history:
            cycle = states[history[key]:]
            nxt = np.bitwise_and.reduce(np.stack(cycle), axis=0)
            history = {}
            states = []
        history[nxt.tobytes()] = len(states)
        states.append(nxt)
    log.warning("majority_smooth did not settle after %d passes", max_passes)
    return states[-1]


# -- thinning -----------------------------------------------------------------

# neighbour order P2..P9: N, NE, E, SE, S, SW, W, NW (clockwise from north)
_OFFSETS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _build_luts():
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    for code in range(256):
        p = [(code >> i) & 1 for i in range(8)]
        b = sum(p)
        a = sum(p[i] == 0 and p[(i + 1) % 8] == 1 for i in range(8))
        p2, p3, p4, p5, p6, p7, p8, p9 = p
        # B >= 3 instead of Zhang-Suen's B >= 2 keeps staircase (4-connected
        # diagonal) lines intact
        base = 3 <= b <= 6 and a == 1
        first[code] = base and p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0
        second[code] = base and p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0
    return first, second


_DELETE_FIRST, _DELETE_SECOND = _build_luts()


def neighbor_code(bits) -> np.ndarray:
    """8-bit code of each pixel's neighbourhood; bit i is neighbour P(i+2)."""
    padded = np.pad(np.asarray(bits, dtype=np.uint8), 1)
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    code = np.zeros((h, w), dtype=np.int32)
    for i, (dr, dc) in enumerate(_OFFSETS):
        code |= padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w].astype(np.int32) << i
    return code


def isolated_squares(bits) -> np.ndarray:
    """Mask of pixels belonging to a 2x2 block of ones with an empty ring."""
    bits = np.asarray(bits, dtype=np.uint8)
    padded = np.pad(bits, 2).astype(np.int32)
    h, w = bits.shape
    out = np.zeros_like(bits, dtype=bool)
    # top-left corner (r, c) of each candidate block, in padded coordinates
    block = padded[2:h + 1, 2:w + 1] & padded[2:h + 1, 3:w + 2] \
        & padded[3:h + 2, 2:w + 1] & padded[3:h + 2, 3:w + 2]
    ring = np.zeros_like(block)
    for dr in range(-1, 3):
        for dc in range(-1, 3):
            if 0 <= dr <= 1 and 0 <= dc <= 1:
                continue
            ring += padded[2 + dr:h + 1 + dr, 2 + dc:w + 1 + dc]
    corners = np.argwhere((block == 1) & (ring == 0))
    for r, c in corners:
        out[r:r + 2, c:c + 2] = True
    return out


def thin_subpass(bits, first: bool) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    lut = _DELETE_FIRST if first else _DELETE_SECOND
    delete = (bits == 1) & lut[neighbor_code(bits)] & ~isolated_squares(bits)
    out = bits.copy()
    out[delete] = 0
    return out


def thin(edges, max_iters: int = 3) -> np.ndarray:
    """Two-subpass parallel thinning (Zhang-Suen with staircase protection).

    A pixel is removed only if it has between 3 and 6 set neighbours and its
    neighbours form a single connected run around it, so removal cannot
    split the local 8-neighbourhood.  Single-pixel diagonal lines and isolated
    2x2 squares survive.  Stops after ``max_iters`` passes or earlier when a
    pass deletes nothing.
    """
    bits = as_bits(edges)
    if min(bits.shape) < 3:
        raise ParameterError(f"thin needs at least 3x3 pixels, got {bits.shape}")
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")
    for _ in range(max_iters):
        nxt = thin_subpass(thin_subpass(bits, True), False)
        if np.array_equal(nxt, bits):
            break
        bits = nxt
    return bits


@dataclass
class PipelineResult:
    edges: np.ndarray
    normalized: np.ndarray
    thresholded: np.ndarray
    smoothed: np.ndarray


def postprocess_pipeline(phi_bar, band: ThresholdBand | None = None, thin_iters: int = 3,
                         return_stages: bool = False, majority_rule: str = "window"):
    """normalize -> band threshold -> majority (until stable) -> thin.

    Returns the final edge map, or a :class:`PipelineResult` with every
    intermediate stage when ``return_stages`` is set.
    """
    band = band or ThresholdBand()
    norm = normalize_field(phi_bar)
    th = threshold_band(norm, band)
    smooth = majority_smooth(th, repeat_until_stable=True, rule=majority_rule)
    edges = thin(smooth, thin_iters)
    if return_stages:
        return PipelineResult(edges=edges, normalized=norm, thresholded=th, smoothed=smooth)
    return edges
