"""Command-line front end: ``mrpi segment | canny | compare``.

Every flag can also come from ``--config FILE``, either a ``key=value`` text
file whose keys are flag names (``runs=15``, ``p-low=-0.175``) or a
``manifest.json`` written by an earlier run.  Explicit flags win over the
config file, which wins over the built-in defaults.

Exit status: 0 on success, 1 on I/O or parameter errors, 2 when the level
set diverges.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .canny import CannyParams, canny_edges
from .drlse import DrlseParams
from .errors import MrpiError, NumericalDivergenceError
from .evaluation import TimingReport, boundary_f1, compare_report
from .imaging import (bicubic_resize, field_to_gray, load_edge_png, load_image, save_edge_png,
                      save_png)
from .postproc import MAJORITY_RULES, ThresholdBand, postprocess_pipeline
from .rpi import RpiConfig, default_workers, run_multi_rpi

log = logging.getLogger("mrpi")

MANIFEST_SCHEMA_VERSION = 1
METRICS_SCHEMA_VERSION = 1

# flags that describe the computation; these make up the manifest "config"
CONFIG_KEYS = (
    "runs", "iters", "sigma", "alpha", "dense_only", "first_dense", "p_low", "p_high",
    "mu", "lambda_", "alpha_area", "dt", "epsilon", "sigma_g", "thin_iters", "seed",
    "majority_rule", "scale", "t_low", "t_high", "sigma_c", "tolerance",
)


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise CliError(f"not a boolean: {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="input image (PNG or binary PGM)")
    p.add_argument("-o", "--out-dir", default="out", help="output directory (default: out)")
    p.add_argument("--config", help="key=value config file or a previous manifest.json")
    p.add_argument("--truth", help="ground-truth edge map (dark pixels = edge)")
    p.add_argument("--tolerance", type=int, default=2, help="match tolerance in px (default: 2)")
    p.add_argument("--scale", type=float, default=1.0,
                   help="bicubic resize factor applied before processing (default: 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_rpi(p: argparse.ArgumentParser) -> None:
    d, r, b = DrlseParams(), RpiConfig(), ThresholdBand()
    g = p.add_argument_group("m-RPI")
    g.add_argument("--runs", type=int, default=r.m, help=f"number of RPI runs m (default: {r.m})")
    g.add_argument("--iters", type=int, default=r.k, help=f"evolve steps per run k (default: {r.k})")
    g.add_argument("--sigma", type=float, default=r.sigma,
                   help=f"std of the random initial values (default: {r.sigma})")
    g.add_argument("--alpha", type=float, default=r.alpha,
                   help=f"sparse block fraction per axis (default: {r.alpha})")
    g.add_argument("--dense-only", action="store_true", default=False,
                   help="initialise every run densely")
    g.add_argument("--first-dense", action=argparse.BooleanOptionalAction, default=True,
                   help="dense first run, sparse afterwards (default: on)")
    g.add_argument("--p-low", type=float, default=b.p_low, help=f"band lower bound (default: {b.p_low})")
    g.add_argument("--p-high", type=float, default=b.p_up, help=f"band upper bound (default: {b.p_up})")
    g.add_argument("--mu", type=float, default=d.mu, help=f"distance regularization weight (default: {d.mu})")
    g.add_argument("--lambda", dest="lambda_", type=float, default=d.lam,
                   help=f"edge length weight (default: {d.lam})")
    g.add_argument("--alpha-area", type=float, default=d.alpha_area,
                   help=f"area (balloon) weight (default: {d.alpha_area})")
    g.add_argument("--dt", type=float, default=d.dt, help=f"time step (default: {d.dt})")
    g.add_argument("--epsilon", type=float, default=d.epsilon,
                   help=f"Dirac width in px (default: {d.epsilon})")
    g.add_argument("--sigma-g", type=float, default=r.sigma_g,
                   help=f"edge-indicator smoothing (default: {r.sigma_g})")
    g.add_argument("--thin-iters", type=int, default=3, help="thinning passes (default: 3)")
    g.add_argument("--majority-rule", choices=MAJORITY_RULES, default="window",
                   help="majority vote rule (default: window)")
    g.add_argument("--seed", type=int, default=r.seed, help=f"random seed (default: {r.seed})")
    g.add_argument("--threads", type=int, default=None,
                   help="run-level parallelism (default: available CPUs)")
    g.add_argument("--backend", choices=("process", "thread"), default="process",
                   help="worker pool type (default: process)")
    g.add_argument("--debug-stages", action="store_true", help="write every intermediate stage")


def _add_canny(p: argparse.ArgumentParser) -> None:
    c = CannyParams()
    g = p.add_argument_group("Canny")
    g.add_argument("--t-low", type=float, default=c.t_low, help=f"low threshold (default: {c.t_low})")
    g.add_argument("--t-high", type=float, default=c.t_high, help=f"high threshold (default: {c.t_high})")
    g.add_argument("--sigma-c", type=float, default=c.sigma_c,
                   help="pre-smoothing width (default: sqrt(2))")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mrpi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mrpi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seg = sub.add_parser("segment", help="m-RPI level-set edge detection")
    _add_common(seg)
    _add_rpi(seg)

    can = sub.add_parser("canny", help="Canny baseline")
    _add_common(can)
    _add_canny(can)

    cmp_ = sub.add_parser("compare", help="run both methods and report metrics")
    _add_common(cmp_)
    _add_rpi(cmp_)
    _add_canny(cmp_)
    return parser


# -- configuration ------------------------------------------------------------

def read_config(path) -> dict:
    """Parse a key=value file or a manifest into ``{dest_name: raw_value}``."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        data = json.loads(text)
        values = dict(data.get("config", {}))
        if "input" in data:
            values.setdefault("input", data["input"])
        return values
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        values["lambda_" if key == "lambda" else key] = value
    return values


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = known.get(key)
        if action is None:
            if key in CONFIG_KEYS:
                continue  # belongs to another subcommand (e.g. canny keys in a segment manifest)
            raise CliError(f"unknown config key {key!r}")
        if isinstance(raw, str) and action.type is None and isinstance(action.default, bool):
            defaults[key] = _bool(raw)
        elif isinstance(raw, str) and action.type is not None:
            defaults[key] = action.type(raw)
        else:
            defaults[key] = raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def rpi_config(args) -> RpiConfig:
    drlse = DrlseParams(mu=args.mu, lam=args.lambda_, alpha_area=args.alpha_area,
                        epsilon=args.epsilon, dt=args.dt)
    return RpiConfig(sigma=args.sigma, k=args.iters, m=args.runs,
                     alpha=1.0 if args.dense_only else args.alpha,
                     first_run_dense=args.first_dense, seed=args.seed, drlse=drlse,
                     sigma_g=args.sigma_g)


def resolved_config(args) -> dict:
    return {k: getattr(args, k) for k in CONFIG_KEYS if hasattr(args, k)}


# -- commands -------------------------------------------------------------------

def _prepare(args):
    if not args.input:
        raise CliError("no input image given")
    img = load_image(args.input)
    if args.scale != 1.0:
        img = bicubic_resize(img, args.scale)
    truth = None
    if args.truth:
        if not Path(args.truth).is_file():
            raise CliError(f"truth file not found: {args.truth}")
        truth = load_edge_png(args.truth)
        if truth.shape != img.shape:
            raise CliError(f"truth shape {truth.shape} does not match image shape {img.shape}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return img, truth, out


def _segment(img, args, out: Path, timings: TimingReport, artifacts: dict) -> np.ndarray:
    cfg = rpi_config(args)
    band = ThresholdBand(args.p_low, args.p_high)
    workers = args.threads if args.threads is not None else default_workers()
    timings.threads = workers
    with timings.stage("rpi"):
        phi_bar = run_multi_rpi(img, cfg, workers=workers, backend=args.backend)
    with timings.stage("postprocess"):
        stages = postprocess_pipeline(phi_bar, band, args.thin_iters, return_stages=True,
                                      majority_rule=args.majority_rule)
    save_edge_png(out / "edges.png", stages.edges)
    artifacts["edges"] = "edges.png"
    if args.debug_stages:
        save_png(out / "phi_bar.png", field_to_gray(phi_bar))
        save_png(out / "normalized.png", field_to_gray(stages.normalized))
        save_edge_png(out / "thresholded.png", stages.thresholded)
        save_edge_png(out / "smoothed.png", stages.smoothed)
        save_edge_png(out / "thinned.png", stages.edges)
        np.save(out / "phi_bar.npy", phi_bar)
        for name in ("phi_bar", "normalized", "thresholded", "smoothed", "thinned"):
            artifacts[name] = f"{name}.png"
        artifacts["phi_bar_array"] = "phi_bar.npy"
    return stages.edges


def _canny(img, args, out: Path, timings: TimingReport, artifacts: dict) -> np.ndarray:
    params = CannyParams(t_low=args.t_low, t_high=args.t_high, sigma_c=args.sigma_c)
    with timings.stage("canny"):
        edges = canny_edges(img, params)
    save_edge_png(out / "canny.png", edges)
    artifacts["canny"] = "canny.png"
    return edges


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_manifest(args, out: Path, artifacts: dict) -> None:
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "version": __version__,
        "command": args.command,
        "input": str(Path(args.input).resolve()),
        "out_dir": str(out.resolve()),
        "seed": getattr(args, "seed", None),
        "config": resolved_config(args),
        "artifacts": artifacts,
    }
    if args.truth:
        manifest["config"]["truth"] = str(Path(args.truth).resolve())
    _write_json(out / "manifest.json", manifest)


def montage(panels) -> np.ndarray:
    """Place grayscale panels side by side with a 4 px mid-gray gutter."""
    h = max(p.shape[0] for p in panels)
    gutter = np.full((h, 4), 128.0)
    parts = []
    for i, p in enumerate(panels):
        padded = np.full((h, p.shape[1]), 255.0)
        padded[:p.shape[0]] = p
        if i:
            parts.append(gutter)
        parts.append(padded)
    return np.hstack(parts)


def cmd_segment(args) -> int:
    img, truth, out = _prepare(args)
    timings, artifacts = TimingReport(), {}
    t0 = time.perf_counter()
    edges = _segment(img, args, out, timings, artifacts)
    timings.finish(time.perf_counter() - t0)
    if truth is not None:
        metrics = {
            "schema_version": METRICS_SCHEMA_VERSION,
            "metrics": {"rpi": boundary_f1(edges, truth, args.tolerance).to_dict()},
            "timings": timings.to_dict(),
        }
        _write_json(out / "metrics.json", metrics)
        artifacts["metrics"] = "metrics.json"
    _write_manifest(args, out, artifacts)
    log.info("segment: %d edge pixels -> %s", int(edges.sum()), out / "edges.png")
    return 0


def cmd_canny(args) -> int:
    img, truth, out = _prepare(args)
    timings, artifacts = TimingReport(), {}
    edges = _canny(img, args, out, timings, artifacts)
    timings.finish()
    if truth is not None:
        metrics = {
            "schema_version": METRICS_SCHEMA_VERSION,
            "metrics": {"canny": boundary_f1(edges, truth, args.tolerance).to_dict()},
            "timings": timings.to_dict(),
        }
        _write_json(out / "metrics.json", metrics)
        artifacts["metrics"] = "metrics.json"
    _write_manifest(args, out, artifacts)
    return 0


def cmd_compare(args) -> int:
    img, truth, out = _prepare(args)
    timings, artifacts = TimingReport(), {}
    t0 = time.perf_counter()
    rpi_edges = _segment(img, args, out, timings, artifacts)
    canny = _canny(img, args, out, timings, artifacts)
    timings.finish(time.perf_counter() - t0)

    report = compare_report(rpi_edges, canny, truth, timings, args.tolerance)
    _write_json(out / "metrics.json", report)
    artifacts["metrics"] = "metrics.json"

    panels = [img, np.where(rpi_edges == 1, 0.0, 255.0), np.where(canny == 1, 0.0, 255.0)]
    if truth is not None:
        panels.append(np.where(truth == 1, 0.0, 255.0))
    save_png(out / "montage.png", montage(panels))
    artifacts["montage"] = "montage.png"
    _write_manifest(args, out, artifacts)
    return 0


COMMANDS = {"segment": cmd_segment, "canny": cmd_canny, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except NumericalDivergenceError as exc:
        print(f"mrpi: numerical divergence: {exc}", file=sys.stderr)
        return 2
    except (MrpiError, CliError, OSError, ValueError) as exc:
        print(f"mrpi: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
