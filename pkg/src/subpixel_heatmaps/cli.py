"""Command line entry point.

Subcommands::

    gen        write a synthetic manifest (JSON)
    roundtrip  encode/decode ground truth and report errors per encoder x decoder
    sweep      roundtrip over window sizes, temperatures or sigmas
    siamese    two-branch transform consistency with an oracle predictor
    gradcheck  analytic vs finite-difference soft-argmax Jacobian
    metrics    score a prediction CSV against a manifest

Exit status: 0 success, 1 invalid input or arguments, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bench import BenchConfig, gen_synthetic, make_rng, roundtrip_bench, sweep
from .consistency import NoisyOracle, OracleEncoder, consistency_report
from .decoder import STRATEGIES, DecoderConfig
from .encoder import QUANTIZE_MODES, EncoderConfig, GridSpec
from .gradcheck import gradcheck
from .geometry import DEFAULT_IC_INDICES, compose, identity, make_flip, make_rotation, make_scale, normalization_distance
from .io import (
    REPORT_HEADER,
    SAMPLE_HEADER,
    format_csv,
    load_manifest,
    manifest_from_pts_dir,
    read_predictions,
    save_manifest,
)
from .metrics import evaluate, nme

log = logging.getLogger("subpixel_heatmaps")

SIAMESE_HEADER = (
    "sample_id",
    "rot0",
    "scale0",
    "flip0",
    "rot1",
    "scale1",
    "flip1",
    "discrepancy_01",
    "merged_vs_gt",
    "branch0_vs_gt",
    "branch1_vs_gt",
)
GRADCHECK_HEADER = ("tau", "window", "n_windows", "step", "max_rel_err", "max_abs_err")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; 2 is reserved for I/O
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _grid_arg(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def _list_arg(choices=None, cast=str):
    def parse(text: str):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        if choices is not None:
            bad = [t for t in items if t not in choices]
            if bad:
                raise argparse.ArgumentTypeError(f"invalid choice(s) {bad}; choose from {sorted(choices)}")
        try:
            return [cast(t) for t in items]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return parse


def _norm_arg(text: str) -> str:
    text = text.replace("-", "_")
    if text not in ("pdf", "amplitude_one"):
        raise argparse.ArgumentTypeError("choose from pdf, amplitude-one")
    return text


def _add_common(p: argparse.ArgumentParser, *, data: bool = True) -> None:
    p.add_argument("--grid", type=_grid_arg, default=(64, 64), metavar="WxH", help="heatmap size (default 64x64)")
    p.add_argument("--scale", type=float, default=4.0, help="input pixels per heatmap pixel (default 4)")
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian std in heatmap pixels (default 1)")
    p.add_argument("--window", type=int, default=5, help="local soft-argmax window (default 5)")
    p.add_argument("--tau", type=float, default=10.0, help="soft-argmax temperature (default 10)")
    p.add_argument("--norm", type=_norm_arg, default="amplitude_one", help="pdf or amplitude-one (default)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="output path (stdout when omitted)")
    if data:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--manifest", type=Path, help="JSON manifest")
        src.add_argument("--pts-dir", type=Path, help="directory of .pts files")
        p.add_argument("--n", type=int, default=1000, help="synthetic records when no data is given")
        p.add_argument("--k", type=int, default=68, help="landmarks per synthetic record")
        p.add_argument("--workers", type=int, default=1)


def _add_eval(p: argparse.ArgumentParser) -> None:
    p.add_argument("--norm-kind", choices=("ic", "box", "diag"), default="box")
    p.add_argument("--auc-cutoff", type=float, default=7.0)
    p.add_argument("--fr-threshold", type=float, default=10.0)
    p.add_argument("--per-sample", type=Path, help="also write per-sample NMEs to this CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subpixel-heatmaps", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a synthetic manifest")
    _add_common(p, data=False)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--k", type=int, default=68)
    p.add_argument("--sigma-max", type=float, default=None, help="border margin is 3*sigma_max heatmap px")

    p = sub.add_parser("roundtrip", help="encode/decode roundtrip benchmark")
    _add_common(p)
    _add_eval(p)
    p.add_argument("--quantize", type=_list_arg(QUANTIZE_MODES), default=["round", "none"])
    p.add_argument("--strategy", type=_list_arg(STRATEGIES), default=list(STRATEGIES))

    p = sub.add_parser("sweep", help="roundtrip sweep over one parameter")
    _add_common(p)
    _add_eval(p)
    p.add_argument("--axis", choices=("window", "temperature", "sigma"), required=True)
    p.add_argument("--values", type=_list_arg(), required=True, help="comma separated; 'none' allowed for window")
    p.add_argument("--quantize", type=_list_arg(QUANTIZE_MODES), default=["none"])

    p = sub.add_parser("siamese", help="two-branch consistency with an oracle predictor")
    _add_common(p)
    p.add_argument("--quantize", choices=QUANTIZE_MODES, default="none")
    p.add_argument("--strategy", choices=tuple(STRATEGIES), default="local_softargmax")
    p.add_argument("--max-rotation", type=float, default=30.0, help="degrees")
    p.add_argument("--scale-jitter", type=float, default=0.15, help="scale drawn from 1 +/- this")
    p.add_argument("--flip-prob", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0, help="noisy oracle amplitude (peak relative)")

    p = sub.add_parser("gradcheck", help="check the soft-argmax Jacobian against finite differences")
    p.add_argument("--tau", type=_list_arg(cast=float), default=[1.0, 10.0, 50.0])
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--n-windows", type=int, default=1000)
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("metrics", help="score predictions against a manifest")
    p.add_argument("--pred", type=Path, required=True, help="CSV with columns id,point,x,y")
    p.add_argument("--gt", type=Path, required=True, help="JSON manifest")
    p.add_argument("--out", type=Path)
    _add_eval(p)
    return parser


# --------------------------------------------------------------------------


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", out)


def _grid(args) -> GridSpec:
    return GridSpec(args.grid[0], args.grid[1], args.scale)


def _load_data(args, sigma_max: float):
    if args.manifest is not None:
        return load_manifest(args.manifest)
    if args.pts_dir is not None:
        return manifest_from_pts_dir(args.pts_dir)
    return gen_synthetic(args.seed, args.n, args.k, _grid(args), sigma_max=sigma_max)


def _bench_config(args, modes, strategies) -> BenchConfig:
    return BenchConfig(
        grid=_grid(args),
        encoder_modes=tuple(modes),
        strategies=tuple(strategies),
        sigma=args.sigma,
        window=args.window,
        tau=args.tau,
        normalization=args.norm,
        norm_kind=args.norm_kind,
        auc_cutoff=args.auc_cutoff,
        fr_threshold=args.fr_threshold,
        seed=args.seed,
        workers=args.workers,
    )


def _write_results(results, args) -> None:
    _emit(format_csv([r.row() for r in results], REPORT_HEADER), args.out)
    if args.per_sample is not None:
        rows = [row for r in results for row in r.sample_rows()]
        _emit(format_csv(rows, SAMPLE_HEADER), args.per_sample)


def cmd_gen(args) -> None:
    sigma_max = args.sigma_max if args.sigma_max is not None else args.sigma
    manifest = gen_synthetic(args.seed, args.n, args.k, _grid(args), sigma_max=sigma_max)
    if args.out is None:
        sys.stdout.write(json.dumps(manifest.to_json(), indent=1) + "\n")
    else:
        save_manifest(manifest, args.out)


def cmd_roundtrip(args) -> None:
    cfg = _bench_config(args, args.quantize, args.strategy)
    manifest = _load_data(args, args.sigma)
    _write_results(roundtrip_bench(manifest, cfg), args)


def cmd_sweep(args) -> None:
    cfg = _bench_config(args, args.quantize, ("local_softargmax",))
    sigma_max = args.sigma
    if args.axis == "sigma":
        sigma_max = max(float(v) for v in args.values)
    manifest = _load_data(args, sigma_max)
    _write_results(sweep(args.axis, args.values, manifest, cfg), args)


def _augmentation(rng: np.random.Generator, center, width: float, args):
    rot = float(rng.uniform(-args.max_rotation, args.max_rotation))
    scl = float(rng.uniform(1.0 - args.scale_jitter, 1.0 + args.scale_jitter))
    flip = bool(rng.random() < args.flip_prob)
    t = compose(make_scale(scl, scl, center), make_rotation(rot, center))
    if flip:
        t = compose(make_flip(width), t)
    return t, rot, scl, flip


def cmd_siamese(args) -> None:
    grid = _grid(args)
    manifest = _load_data(args, args.sigma)
    enc = EncoderConfig(args.sigma, args.quantize, args.norm)
    dec = DecoderConfig(window=args.window, tau=args.tau, strategy=args.strategy)
    predictor = NoisyOracle(args.noise, args.seed) if args.noise > 0 else OracleEncoder()
    rng = make_rng(args.seed)
    width = grid.width * grid.scale
    center = ((width - 1) / 2.0, (grid.height * grid.scale - 1) / 2.0)
    rows = []
    for rec in manifest.records:
        if args.max_rotation == 0 and args.scale_jitter == 0 and args.flip_prob == 0:
            t0, t1 = identity(), identity()
            a0 = a1 = (0.0, 1.0, False)
        else:
            t0, *a0 = _augmentation(rng, center, width, args)
            t1, *a1 = _augmentation(rng, center, width, args)
        r = consistency_report(rec.landmarks, t0, t1, predictor, grid, enc, dec)
        rows.append(
            (
                rec.id,
                *a0,
                *a1,
                _nanmean(r.discrepancy_01),
                _nanmean(r.discrepancy_merged_vs_gt),
                _nanmean(r.branch0_vs_gt),
                _nanmean(r.branch1_vs_gt),
            )
        )
    _emit(format_csv(rows, SIAMESE_HEADER), args.out)


def _nanmean(a) -> float:
    a = np.asarray(a)
    a = a[~np.isnan(a)]
    return float(math.fsum(a) / a.size) if a.size else float("nan")


def cmd_gradcheck(args) -> None:
    if args.window < 1 or args.n_windows < 1 or not args.step > 0:
        raise ValueError("window, n-windows and step must be positive")
    _emit(format_csv(gradcheck(args.tau, args.window, args.n_windows, args.step, args.seed), GRADCHECK_HEADER), args.out)


def cmd_metrics(args) -> None:
    manifest = load_manifest(args.gt)
    preds = read_predictions(args.pred, manifest)
    samples = []
    for rec in manifest.records:
        norm = normalization_distance(args.norm_kind, rec.landmarks, rec.bbox, rec.ic_indices or DEFAULT_IC_INDICES)
        samples.append(nme(preds[rec.id], rec.landmarks, norm))
    report = evaluate(samples, args.auc_cutoff, args.fr_threshold)
    mean_px = report.mean_px_err
    row = ("metrics", "-", "-", None, None, None, len(samples), report.nme_mean, report.auc, report.fr, mean_px)
    _emit(format_csv([row], REPORT_HEADER), args.out)
    if args.per_sample is not None:
        rows = [("metrics", rec.id, s.nme, s.mean_px_err) for rec, s in zip(manifest.records, samples)]
        _emit(format_csv(rows, SAMPLE_HEADER), args.per_sample)


COMMANDS = {
    "gen": cmd_gen,
    "roundtrip": cmd_roundtrip,
    "sweep": cmd_sweep,
    "siamese": cmd_siamese,
    "gradcheck": cmd_gradcheck,
    "metrics": cmd_metrics,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
