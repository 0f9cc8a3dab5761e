"""
Resizing and sparse initialization
==================================

Two ways to cut the cost of a run: shrink the image with bicubic
resampling, or seed only a fraction of the grid.
"""
import numpy as np

from mrpi import RpiConfig, bicubic_resize, boundary_f1, postprocess_pipeline, run_multi_rpi
from mrpi.rpi import init_sparse_random
from mrpi.synthetic import circle_truth, disk_image

# a sparse seed: a dense block of round(alpha*H) x round(alpha*W) values,
# spread out by shuffling rows and columns, so alpha^2 of the grid is set
phi0 = init_sparse_random(16, 12, sigma=1.0, alpha=0.25, rng_seed=3)
print("nonzero seeds:", np.count_nonzero(phi0), "of", phi0.size)
print((phi0 != 0).astype(int))

# resampling reproduces constants and leaves the grid alone at scale 1
img = disk_image(256, 80.0)
print("scale 1 max change:", np.abs(bicubic_resize(img, 1.0) - img).max())
small = bicubic_resize(img, 0.5)
print("resized to", small.shape)

# segment the half-size image and score it against the half-size circle
edges = postprocess_pipeline(run_multi_rpi(small, RpiConfig(seed=2)))
m = boundary_f1(edges, circle_truth(128, 40.0), tolerance_px=2)
print(f"half-size segmentation F1 {m.f1:.3f}")

# denser seeding for every run
dense = postprocess_pipeline(run_multi_rpi(small, RpiConfig(alpha=1.0, seed=2)))
print(f"all-dense runs F1 {boundary_f1(dense, circle_truth(128, 40.0)).f1:.3f}")
