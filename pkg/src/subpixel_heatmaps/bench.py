"""Synthetic ground truth and the encode/decode roundtrip benchmark.

The roundtrip takes ground-truth landmarks, encodes them as heatmaps, decodes
the heatmaps straight back and scores the result against the originals. No
network is involved: whatever error remains is produced by the
encoding/decoding pipeline itself.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np

from . import kernels
from .decoder import STRATEGIES
from .encoder import EncoderConfig, GridSpec, scale_coords
from .geometry import DEFAULT_IC_INDICES, LandmarkSet, normalization_distance
from .io import DatasetManifest, ManifestRecord
from .metrics import EvalReport, SampleError, evaluate, nme

CHUNK = 2048


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the stream depends only on the seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))


def gen_synthetic(seed: int, n: int, k: int, grid: GridSpec | None = None, sigma_max: float = 1.0) -> DatasetManifest:
    """``n`` records of ``k`` landmarks drawn uniformly in input-image coordinates.

    Points stay at least ``3 * sigma_max`` heatmap pixels away from the border
    pixel centers, so full Gaussians and decode windows fit on the grid.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    grid = grid or GridSpec()
    margin = 3.0 * sigma_max
    lo = np.array([margin, margin]) * grid.scale
    hi = np.array([grid.width - 1 - margin, grid.height - 1 - margin]) * grid.scale
    if np.any(hi <= lo):
        raise ValueError(f"grid {grid.width}x{grid.height} too small for sigma_max={sigma_max}")
    pts = make_rng(seed).uniform(lo, hi, size=(n, k, 2))
    width = len(str(n - 1))
    return DatasetManifest(
        [ManifestRecord(f"syn{i:0{width}d}", LandmarkSet(pts[i])) for i in range(n)]
    )


@dataclass(frozen=True)
class BenchConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    encoder_modes: tuple[str, ...] = ("round", "none")
    strategies: tuple[str, ...] = ("argmax", "heuristic", "local_softargmax", "global_softargmax")
    sigma: float = 1.0
    window: int = 5
    tau: float = 10.0
    normalization: str = "amplitude_one"
    truncation_radius: int | None = None
    norm_kind: Literal["ic", "box", "diag"] = "box"
    auc_cutoff: float = 7.0
    fr_threshold: float = 10.0
    seed: int = 0
    sample_count: int = 1000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be an odd integer >= 3, got {self.window}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        for m in self.encoder_modes:
            self.encoder_config(m)

    def encoder_config(self, mode: str) -> EncoderConfig:
        return EncoderConfig(self.sigma, mode, self.normalization, self.truncation_radius)  # type: ignore[arg-type]


@dataclass(eq=False)
class BenchResult:
    encoder: str
    decoder: str
    sigma: float
    window: int | None
    tau: float | None
    report: EvalReport
    mean_px_err: float  # heatmap pixels
    sample_ids: list[str]
    scale: float = 1.0  # input pixels per heatmap pixel

    @property
    def run_id(self) -> str:
        parts = [self.encoder, self.decoder, f"s{self.sigma:g}"]
        if self.window is not None:
            parts.append(f"w{self.window}")
        if self.tau is not None:
            parts.append(f"t{self.tau:g}")
        return "-".join(parts)

    def row(self) -> tuple:
        r = self.report
        return (
            self.run_id,
            self.encoder,
            self.decoder,
            self.sigma,
            self.window,
            self.tau,
            len(r.samples),
            r.nme_mean,
            r.auc,
            r.fr,
            self.mean_px_err,
        )

    def sample_rows(self) -> list[tuple]:
        return [
            (self.run_id, sid, s.nme, s.mean_px_err / self.scale)
            for sid, s in zip(self.sample_ids, self.report.samples)
        ]


def _chunk_decode(maps_args, strategies: Sequence[int], d: int, tau: float):
    centers, visible, height, width, sigma, amplitude, radius = maps_args
    maps = kernels.render_batch(centers, visible, height, width, sigma, amplitude, radius)
    return [kernels.decode_batch(maps, s, d, tau)[0] for s in strategies]


def _roundtrip_coords(hm_points, hm_visible, cfg: BenchConfig, enc: EncoderConfig, strategies: Sequence[str]):
    """Encode and decode every point; returns one ``(N, 2)`` array per strategy."""
    grid = cfg.grid
    radius = -1.0 if enc.truncation_radius is None else float(enc.truncation_radius)
    centers = np.where(hm_visible[:, None], hm_points, 0.0)
    codes = [STRATEGIES[s] for s in strategies]
    jobs = [
        (
            (centers[i : i + CHUNK], hm_visible[i : i + CHUNK], grid.height, grid.width, enc.sigma, enc.amplitude, radius),
            codes,
            cfg.window,
            cfg.tau,
        )
        for i in range(0, centers.shape[0], CHUNK)
    ]
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda job: _chunk_decode(*job), jobs))
    else:
        parts = [_chunk_decode(*job) for job in jobs]
    return [np.concatenate([p[j] for p in parts]) for j in range(len(codes))]


def roundtrip_bench(manifest: DatasetManifest, cfg: BenchConfig) -> list[BenchResult]:
    """Encode, decode and score every record for each encoder mode x decoder strategy.

    Landmarks that are invisible, or fall off the heatmap grid after scaling,
    are left out of the scores. Output is independent of ``cfg.workers``.
    """
    if len(manifest) == 0:
        raise ValueError("empty manifest")
    grid = cfg.grid
    k = manifest.num_landmarks
    records = manifest.records
    all_pts = np.concatenate([r.landmarks.points for r in records])
    all_vis = np.concatenate([r.landmarks.visibility for r in records])
    gts = [r.landmarks for r in records]
    norms = [
        normalization_distance(cfg.norm_kind, r.landmarks, r.bbox, r.ic_indices or DEFAULT_IC_INDICES)
        for r in records
    ]
    ids = [r.id for r in records]

    results = []
    for mode in cfg.encoder_modes:
        enc = cfg.encoder_config(mode)
        hm = scale_coords(LandmarkSet(all_pts, all_vis), grid, mode)  # type: ignore[arg-type]
        decoded = _roundtrip_coords(hm.points, hm.visibility, cfg, enc, cfg.strategies)
        scored = hm.visibility.reshape(len(records), k)
        for strategy, coords in zip(cfg.strategies, decoded):
            pred = coords.reshape(len(records), k, 2) * grid.scale
            samples: list[SampleError] = []
            for i, gt in enumerate(gts):
                gt_i = LandmarkSet(gt.points, scored[i])
                samples.append(nme(LandmarkSet(pred[i], scored[i]), gt_i, norms[i]))
            report = evaluate(samples, cfg.auc_cutoff, cfg.fr_threshold)
            res = BenchResult(
                encoder=mode,
                decoder=strategy,
                sigma=cfg.sigma,
                window=cfg.window if strategy == "local_softargmax" else None,
                tau=cfg.tau if strategy in ("local_softargmax", "global_softargmax") else None,
                report=report,
                mean_px_err=report.mean_px_err / grid.scale,
                sample_ids=ids,
                scale=grid.scale,
            )
            results.append(res)
    return results


SweepAxis = Literal["window", "temperature", "sigma"]


def sweep(axis: SweepAxis, values: Iterable, manifest: DatasetManifest, base: BenchConfig) -> list[BenchResult]:
    """Run one roundtrip per value of ``axis``, keeping everything else fixed.

    For the window axis the value ``"none"`` stands for decoding without a
    window; both readings of that (plain argmax and the 0.25 px heuristic)
    are reported.
    """
    values = list(values)
    if len(values) < 2:
        raise ValueError("a sweep needs at least two values")
    out: list[BenchResult] = []
    for v in values:
        if axis == "window":
            if v is None or (isinstance(v, str) and v.lower() == "none"):
                cfg = replace(base, strategies=("argmax", "heuristic"))
            else:
                cfg = replace(base, window=int(v), strategies=("local_softargmax",))
        elif axis == "temperature":
            cfg = replace(base, tau=float(v), strategies=("local_softargmax",))
        elif axis == "sigma":
            cfg = replace(base, sigma=float(v), strategies=("local_softargmax",))
        else:
            raise ValueError(f"unknown sweep axis {axis!r}")
        out.extend(roundtrip_bench(manifest, cfg))
    return out

