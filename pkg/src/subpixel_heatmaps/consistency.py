"""Two-branch transform consistency harness.

Each branch transforms the input landmarks, asks a predictor for heatmaps,
warps those heatmaps back into the reference frame and the two results are
summed. Without a trained network the predictor is an oracle that renders the
transformed ground truth, which makes the warp/merge/decode chain testable
in isolation.

Transforms are given in input-image pixels and conjugated into heatmap
pixels with the grid scale before warping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import NDArray

from . import kernels
from .decoder import DecoderConfig, decode_stack
from .encoder import EncoderConfig, GridSpec, encode_landmarks, scale_coords
from .geometry import AffineTransform, LandmarkSet, apply_landmarks, compose, invert, make_scale


@runtime_checkable
class Predictor(Protocol):
    """Anything that maps input-image landmarks to a ``(K, H, W)`` heatmap stack.

    A trained model adapter would render the transformed image and run the
    network here; the landmarks argument is then only used for its length.
    """

    def __call__(self, landmarks: LandmarkSet, grid: GridSpec, cfg: EncoderConfig) -> NDArray[np.float64]: ...


class OracleEncoder:
    """Exact predictor: encodes the (transformed) ground truth."""

    def __call__(self, landmarks: LandmarkSet, grid: GridSpec, cfg: EncoderConfig) -> NDArray[np.float64]:
        return encode_landmarks(landmarks, grid, cfg)


class NoisyOracle:
    """Oracle plus i.i.d. Gaussian pixel noise, clipped at zero.

    The noise standard deviation is ``amplitude`` times each map's peak. Noise
    comes from a Philox stream keyed on ``(seed, call index)``, so a fresh
    instance with the same seed reproduces the same sequence of outputs.
    """

    def __init__(self, amplitude: float = 0.05, seed: int = 0):
        if amplitude < 0:
            raise ValueError("noise amplitude must be non-negative")
        self.amplitude = float(amplitude)
        self.seed = int(seed)
        self._calls = 0

    def __call__(self, landmarks: LandmarkSet, grid: GridSpec, cfg: EncoderConfig) -> NDArray[np.float64]:
        clean = encode_landmarks(landmarks, grid, cfg)
        rng = np.random.Generator(np.random.Philox(key=self.seed, counter=self._calls))
        self._calls += 1
        peak = clean.max(axis=(1, 2), keepdims=True)
        noisy = clean + self.amplitude * peak * rng.standard_normal(clean.shape)
        return np.maximum(noisy, 0.0)


def warp_heatmap(hm, t: AffineTransform) -> NDArray[np.float64]:
    """Move heatmap content by ``t`` using inverse-mapped bilinear sampling.

    Output pixel ``p`` takes the value of ``hm`` at ``invert(t)(p)``; samples
    outside the source are zero. Accepts a single map or a ``(K, H, W)`` stack.
    """
    return kernels.warp_batch(hm, invert(t).matrix)


def to_heatmap_frame(t: AffineTransform, grid: GridSpec) -> AffineTransform:
    """Conjugate an input-image transform into heatmap coordinates: ``S t S^-1`` with ``S = 1/scale``."""
    s = make_scale(1.0 / grid.scale, 1.0 / grid.scale)
    return compose(s, compose(t, invert(s)))


def reversed_branch(
    gt: LandmarkSet,
    t: AffineTransform,
    predictor: Predictor,
    grid: GridSpec,
    enc_cfg: EncoderConfig,
) -> NDArray[np.float64]:
    """Predict on the ``t``-transformed landmarks and warp the result back."""
    stack = predictor(apply_landmarks(t, gt), grid, enc_cfg)
    return warp_heatmap(stack, invert(to_heatmap_frame(t, grid)))


def siamese_merge(
    gt: LandmarkSet,
    t0: AffineTransform,
    t1: AffineTransform,
    predictor: Predictor,
    grid: GridSpec,
    enc_cfg: EncoderConfig,
) -> NDArray[np.float64]:
    """Element-wise sum of the two reversed branch predictions (no averaging)."""
    h0 = reversed_branch(gt, t0, predictor, grid, enc_cfg)
    h1 = reversed_branch(gt, t1, predictor, grid, enc_cfg)
    return h0 + h1


@dataclass(eq=False)
class ConsistencyReport:
    """Decodes of both reversed branches and of their sum, in heatmap pixels.

    Distances are per landmark; NaN where either side failed to decode or the
    landmark is not visible in the reference frame.
    """

    branch0: LandmarkSet
    branch1: LandmarkSet
    merged: LandmarkSet
    target: LandmarkSet
    discrepancy_01: NDArray[np.float64] = field(repr=False)
    discrepancy_merged_vs_gt: NDArray[np.float64] = field(repr=False)
    branch0_vs_gt: NDArray[np.float64] = field(repr=False)
    branch1_vs_gt: NDArray[np.float64] = field(repr=False)

    @property
    def mean_discrepancy_01(self) -> float:
        return float(np.nanmean(self.discrepancy_01))

    @property
    def mean_merged_vs_gt(self) -> float:
        return float(np.nanmean(self.discrepancy_merged_vs_gt))


def _dist(a: LandmarkSet, b: LandmarkSet) -> NDArray[np.float64]:
    d = np.hypot(*(a.points - b.points).T)
    return np.where(a.visibility & b.visibility, d, np.nan)


def consistency_report(
    gt: LandmarkSet,
    t0: AffineTransform,
    t1: AffineTransform,
    predictor: Predictor,
    grid: GridSpec,
    enc_cfg: EncoderConfig,
    dec_cfg: DecoderConfig | None = None,
) -> ConsistencyReport:
    dec_cfg = dec_cfg or DecoderConfig()
    h0 = reversed_branch(gt, t0, predictor, grid, enc_cfg)
    h1 = reversed_branch(gt, t1, predictor, grid, enc_cfg)
    d0 = decode_stack(h0, dec_cfg).coords
    d1 = decode_stack(h1, dec_cfg).coords
    dm = decode_stack(h0 + h1, dec_cfg).coords
    target = scale_coords(gt, grid, "none")
    return ConsistencyReport(
        branch0=d0,
        branch1=d1,
        merged=dm,
        target=target,
        discrepancy_01=_dist(d0, d1),
        discrepancy_merged_vs_gt=_dist(dm, target),
        branch0_vs_gt=_dist(d0, target),
        branch1_vs_gt=_dist(d1, target),
    )
