"""Boundary metrics, method comparison and timing reports."""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

from .errors import ParameterError
from .postproc import as_bits

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BoundaryMetrics:
    precision: float
    recall: float
    f1: float
    tolerance_px: int
    pred_count: int
    truth_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _within(bits: np.ndarray, tolerance_px: int) -> np.ndarray:
    """Pixels within Chebyshev distance ``tolerance_px`` of a set pixel."""
    if tolerance_px == 0:
        return bits.astype(bool)
    return maximum_filter(bits, size=2 * tolerance_px + 1, mode="constant", cval=0).astype(bool)


def boundary_f1(pred, truth, tolerance_px: int = 2) -> BoundaryMetrics:
    """Tolerance-matched precision / recall / F1 of two edge maps.

    A predicted pixel counts as correct if some truth pixel lies within
    ``tolerance_px`` in Chebyshev distance; a truth pixel counts as recalled
    if some predicted pixel does.  An empty prediction scores precision 0
    (both maps empty scores 1 across the board).
    """
    pred = as_bits(pred)
    truth = as_bits(truth)
    if pred.shape != truth.shape:
        raise ParameterError(f"shape mismatch: pred {pred.shape} vs truth {truth.shape}")
    if tolerance_px < 0:
        raise ParameterError(f"tolerance_px must be >= 0, got {tolerance_px}")
    n_pred, n_truth = int(pred.sum()), int(truth.sum())
    if n_pred == 0 and n_truth == 0:
        return BoundaryMetrics(1.0, 1.0, 1.0, tolerance_px, 0, 0)

    precision = float((pred.astype(bool) & _within(truth, tolerance_px)).sum() / n_pred) if n_pred else 0.0
    recall = float((truth.astype(bool) & _within(pred, tolerance_px)).sum() / n_truth) if n_truth else 0.0
    return BoundaryMetrics(precision, recall, f1_score(precision, recall), tolerance_px, n_pred, n_truth)


def agreement(a, b) -> float:
    """Fraction of pixels on which two edge maps agree."""
    a, b = as_bits(a), as_bits(b)
    if a.shape != b.shape:
        raise ParameterError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(a == b))


@dataclass
class TimingReport:
    """Wall-clock seconds per named stage."""

    stages: dict = field(default_factory=dict)
    threads: int = 1
    total: float | None = None

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0

    def finish(self, total: float | None = None) -> "TimingReport":
        summed = sum(self.stages.values())
        self.total = max(summed, total if total is not None else 0.0)
        return self

    def to_dict(self) -> dict:
        total = self.total if self.total is not None else sum(self.stages.values())
        return {"stages": dict(self.stages), "total": total, "threads": self.threads}


def compare_report(rpi, canny, truth=None, timings: TimingReport | None = None,
                   tolerance_px: int = 2) -> dict:
    """Machine-readable comparison of the RPI and Canny edge maps."""
    rpi, canny = as_bits(rpi), as_bits(canny)
    if rpi.shape != canny.shape:
        raise ParameterError(f"shape mismatch: rpi {rpi.shape} vs canny {canny.shape}")
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "shape": list(rpi.shape),
        "agreement": agreement(rpi, canny),
    }
    if truth is not None:
        truth = as_bits(truth)
        if truth.shape != rpi.shape:
            raise ParameterError(f"shape mismatch: truth {truth.shape} vs maps {rpi.shape}")
        report["tolerance_px"] = tolerance_px
        report["metrics"] = {
            "rpi": boundary_f1(rpi, truth, tolerance_px).to_dict(),
            "canny": boundary_f1(canny, truth, tolerance_px).to_dict(),
        }
    if timings is not None:
        report["timings"] = timings.to_dict()
    return report
