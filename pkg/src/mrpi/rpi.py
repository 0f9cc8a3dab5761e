"""Random point initialization (RPI) runs and their ensemble average.

A run scatters N(0, sigma^2) values over the grid (densely, or on a
row/column-permuted sparse block), applies ``k`` DRLSE steps, and keeps the
resulting field.  ``m`` runs are flattened into the rows of a
:class:`RunStack` and averaged column by column into ``phi_bar``.

Random numbers come from NumPy's Philox-4x64 counter-based generator keyed
directly by a 64-bit seed.  Run ``r`` uses the key ``seed XOR splitmix64(r)``,
so each run's field depends only on ``(seed, r)`` and never on which worker
ran it or in which order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .drlse import DrlseParams, edge_indicator, evolve_step
from .errors import NumericalDivergenceError, ParameterError
from .imaging import as_gray

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 output for state ``x`` (Steele, Lea & Flood)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def run_seed(seed: int, run_index: int) -> int:
    return (int(seed) & MASK64) ^ splitmix64(int(run_index))


def make_rng(rng_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(rng_seed) & MASK64))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class RpiConfig:
    sigma: float = 0.01
    k: int = 8
    m: int = 15
    alpha: float = 0.25
    first_run_dense: bool = True
    seed: int = 0
    drlse: DrlseParams = field(default_factory=DrlseParams)
    sigma_g: float = 1.5

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ParameterError(f"m must be a positive integer, got {self.m}")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must be in (0, 1], got {self.alpha}")
        if not self.sigma_g > 0:
            raise ParameterError(f"sigma_g must be > 0, got {self.sigma_g}")

    def with_(self, **changes) -> "RpiConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class RunStack:
    """``m`` flattened run results, one row per run (row-major flattening)."""

    rows: np.ndarray
    shape: tuple[int, int]

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def row_len(self) -> int:
        return self.rows.shape[1]

    def average(self) -> np.ndarray:
        return average_runs(self.rows).reshape(self.shape)


def init_dense_random(width: int, height: int, sigma: float, rng_seed: int) -> np.ndarray:
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    return make_rng(rng_seed).normal(0.0, sigma, size=(height, width))


def init_sparse_random(width: int, height: int, sigma: float, alpha: float,
                       rng_seed: int) -> np.ndarray:
    """Sparse random field: a dense ``round(alpha*H) x round(alpha*W)`` block
    in the top-left corner, then independent random row and column
    permutations spread it over the grid.

    The support therefore holds ``alpha^2 * H * W`` points, not ``alpha * H * W``.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    rng = make_rng(rng_seed)
    bh, bw = _round_half_up(alpha * height), _round_half_up(alpha * width)
    phi = np.zeros((height, width))
    phi[:bh, :bw] = rng.normal(0.0, sigma, size=(bh, bw))
    rows = rng.permutation(height)
    cols = rng.permutation(width)
    return phi[rows][:, cols]


def initial_field(shape, cfg: RpiConfig, run_index: int) -> np.ndarray:
    height, width = shape
    seed = run_seed(cfg.seed, run_index)
    if cfg.alpha == 1 or (run_index == 0 and cfg.first_run_dense):
        return init_dense_random(width, height, cfg.sigma, seed)
    return init_sparse_random(width, height, cfg.sigma, cfg.alpha, seed)


def run_single_rpi(img, cfg: RpiConfig, run_index: int, g=None) -> np.ndarray:
    """One RPI run: random field followed by exactly ``cfg.k`` evolve steps.

    ``g`` may be passed to reuse a precomputed edge indicator.
    """
    if not 0 <= run_index < cfg.m:
        raise ParameterError(f"run_index {run_index} outside [0, {cfg.m})")
    if g is None:
        g = edge_indicator(as_gray(img), cfg.sigma_g)
    phi = initial_field(g.shape, cfg, run_index)
    try:
        for step in range(cfg.k):
            phi = evolve_step(phi, g, cfg.drlse, step=step)
    except NumericalDivergenceError as exc:
        raise NumericalDivergenceError(
            f"RPI run {run_index}: {exc}", step=exc.step, run_index=run_index
        ) from exc
    return phi


def _run_task(args):
    g, cfg, run_index = args
    return run_single_rpi(None, cfg, run_index, g=g)


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def run_stack(img, cfg: RpiConfig, workers: int = 1, backend: str = "process",
              run_indices=None) -> RunStack:
    """Execute the runs and stack their flattened results.

    ``workers`` is the run-level parallelism.  ``backend`` selects
    ``"process"`` (true parallelism) or ``"thread"`` pools; results are
    identical for any worker count, backend or completion order because each
    row depends only on its run index.  ``run_indices`` overrides which run
    index fills each row (defaults to ``0 .. m-1``).
    """
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    if backend not in ("process", "thread"):
        raise ParameterError(f"unknown backend {backend!r}")
    g = edge_indicator(as_gray(img), cfg.sigma_g)
    indices = list(range(cfg.m)) if run_indices is None else [int(r) for r in run_indices]
    tasks = [(g, cfg, r) for r in indices]

    if workers == 1 or len(tasks) == 1:
        results = [_run_task(t) for t in tasks]
    else:
        pool_cls = ProcessPoolExecutor if backend == "process" else ThreadPoolExecutor
        with pool_cls(max_workers=min(workers, len(tasks))) as pool:
            # map preserves submission order, so row r always holds run r
            results = list(pool.map(_run_task, tasks))

    rows = np.stack([r.ravel() for r in results])
    return RunStack(rows=rows, shape=g.shape)


def average_runs(rows) -> np.ndarray:
    """Column means of a run matrix, invariant to row order.

    Each column is sorted, shifted by its minimum and summed, so the result
    does not depend on run order, equals the row itself for a single run,
    and equals the common value exactly when all rows agree.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ParameterError(f"expected an (m, n) run matrix, got shape {rows.shape}")
    ordered = np.sort(rows, axis=0)
    lo = ordered[0]
    return lo + np.sum(ordered - lo, axis=0) / rows.shape[0]


def run_multi_rpi(img, cfg: RpiConfig, workers: int = 1, backend: str = "process") -> np.ndarray:
    """Averaged field ``phi_bar`` of ``cfg.m`` independent RPI runs."""
    return run_stack(img, cfg, workers=workers, backend=backend).average()
