"""m-run random point initialization (m-RPI) for level-set edge detection.

The pipeline: scatter random values over the image grid, evolve them with a
few steps of distance-regularized level-set descent, repeat ``m`` times,
average, and turn the near-zero band of the average into a thin binary edge
map.  A Canny detector and boundary metrics are included for comparison.
"""

__version__ = "0.1.0"

from .canny import CannyParams, canny_edges
from .drlse import (DrlseParams, distance_reg_energy, edge_indicator, energy_gradient, evolve,
                    evolve_step, init_step_function, total_energy)
from .errors import (DegenerateInputError, ImageFormatError, MrpiError, NumericalDivergenceError,
                     ParameterError)
from .evaluation import BoundaryMetrics, TimingReport, boundary_f1, compare_report
from .imaging import bicubic_resize, gaussian_smooth, gradient, load_image
from .postproc import (ThresholdBand, majority_smooth, normalize_field, postprocess_pipeline,
                       thin, threshold_band)
from .rpi import (RpiConfig, RunStack, init_dense_random, init_sparse_random, run_multi_rpi,
                  run_single_rpi, run_stack)

__all__ = [
    "BoundaryMetrics", "CannyParams", "DegenerateInputError", "DrlseParams", "ImageFormatError",
    "MrpiError", "NumericalDivergenceError", "ParameterError", "RpiConfig", "RunStack",
    "ThresholdBand", "TimingReport", "bicubic_resize", "boundary_f1", "canny_edges",
    "compare_report", "distance_reg_energy", "edge_indicator", "energy_gradient", "evolve",
    "evolve_step", "gaussian_smooth", "gradient", "init_dense_random", "init_sparse_random",
    "init_step_function", "load_image", "majority_smooth", "normalize_field",
    "postprocess_pipeline", "run_multi_rpi", "run_single_rpi", "run_stack", "thin",
    "threshold_band", "total_energy",
]
