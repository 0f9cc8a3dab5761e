"""
Canny as a baseline
===================

The same disk, once clean and once with additive noise, segmented by m-RPI and
by the Canny detector with thresholds 0.1 / 0.2 of the peak gradient.
"""
from pathlib import Path

import numpy as np

from mrpi import (CannyParams, RpiConfig, TimingReport, canny_edges, compare_report,
                  postprocess_pipeline, run_multi_rpi)
from mrpi.imaging import save_edge_png
from mrpi.synthetic import circle_truth, disk_image

out = Path("demo_out")
out.mkdir(exist_ok=True)
truth = circle_truth(128, 40.0)
rng = np.random.default_rng(0)

for label, img in [("clean", disk_image(128, 40.0)),
                   ("noisy", disk_image(128, 40.0) + rng.normal(0, 15, (128, 128)))]:
    timings = TimingReport()
    with timings.stage("rpi"):
        rpi = postprocess_pipeline(run_multi_rpi(img, RpiConfig()))
    with timings.stage("canny"):
        canny = canny_edges(img, CannyParams(0.1, 0.2))
    report = compare_report(rpi, canny, truth, timings.finish())
    save_edge_png(out / f"{label}_rpi.png", rpi)
    save_edge_png(out / f"{label}_canny.png", canny)
    f1 = {k: round(v["f1"], 3) for k, v in report["metrics"].items()}
    print(label, "F1:", f1, "agreement:", round(report["agreement"], 4),
          "seconds:", {k: round(v, 3) for k, v in report["timings"]["stages"].items()})

# raising the upper threshold can only remove Canny edges
img = disk_image(128, 40.0) + rng.normal(0, 15, (128, 128))
counts = [int(canny_edges(img, CannyParams(0.1, t)).sum()) for t in (0.2, 0.3, 0.4, 0.5, 0.6)]
print("edge pixels as t_high rises:", counts)
