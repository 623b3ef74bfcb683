"""Render landmark coordinates into Gaussian heatmaps.

Two encodings are supported: the quantized baseline, which snaps the scaled
coordinate to the grid (``round`` or ``floor``) before placing the Gaussian,
and the continuous one (``none``), which keeps the sub-pixel center and
simply samples the Gaussian on the integer grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from . import kernels
from .geometry import LandmarkSet, Point2

QuantizeMode = Literal["round", "floor", "none"]
Normalization = Literal["pdf", "amplitude_one"]

QUANTIZE_MODES: tuple[str, ...] = ("round", "floor", "none")
NORMALIZATIONS: tuple[str, ...] = ("pdf", "amplitude_one")


@dataclass(frozen=True)
class GridSpec:
    """Heatmap grid: ``width x height`` pixels, ``scale`` input pixels per heatmap pixel."""

    width: int = 64
    height: int = 64
    scale: float = 4.0

    def __post_init__(self) -> None:
        if self.width < 4 or self.height < 4:
            raise ValueError(f"heatmap grid must be at least 4x4, got {self.width}x{self.height}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(rows, cols)`` of one heatmap."""
        return (self.height, self.width)


@dataclass(frozen=True)
class EncoderConfig:
    sigma: float = 1.0
    quantize_mode: QuantizeMode = "none"
    normalization: Normalization = "amplitude_one"
    truncation_radius: int | None = None

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.quantize_mode not in QUANTIZE_MODES:
            raise ValueError(f"unknown quantize_mode {self.quantize_mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.truncation_radius is not None and self.truncation_radius < math.ceil(3 * self.sigma):
            raise ValueError(
                f"truncation_radius must be >= ceil(3*sigma) = {math.ceil(3 * self.sigma)}"
            )

    @property
    def amplitude(self) -> float:
        if self.normalization == "pdf":
            return 1.0 / (2.0 * math.pi * self.sigma**2)
        return 1.0


def round_half_away(x):
    """Round to nearest integer, ties away from zero (``np.round`` rounds ties to even)."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    fl = np.floor(ax)
    # floor(|x| + 0.5) misrounds 0.49999999999999994 up; the fraction test is exact
    return np.copysign(fl + (ax - fl >= 0.5), x)


def quantize(xy, mode: QuantizeMode):
    if mode == "round":
        return round_half_away(xy)
    if mode == "floor":
        return np.floor(xy)
    if mode == "none":
        return np.asarray(xy, dtype=np.float64)
    raise ValueError(f"unknown quantize_mode {mode!r}")


def in_grid(xy, grid: GridSpec) -> NDArray[np.bool_]:
    """True where a heatmap coordinate lies in ``[-0.5, dim - 0.5)`` on both axes."""
    xy = np.asarray(xy, dtype=np.float64)
    x, y = xy[..., 0], xy[..., 1]
    return (x >= -0.5) & (x < grid.width - 0.5) & (y >= -0.5) & (y < grid.height - 0.5)


def scale_coords(landmarks: LandmarkSet, grid: GridSpec, mode: QuantizeMode = "none") -> LandmarkSet:
    """Map input-image coordinates to heatmap coordinates.

    Coordinates are divided by ``grid.scale`` and then quantized per ``mode``.
    Points that land outside the grid are kept but marked invisible.
    """
    hm = quantize(landmarks.points / grid.scale, mode)
    with np.errstate(invalid="ignore"):
        vis = landmarks.visibility & in_grid(hm, grid)
    return LandmarkSet(hm, vis)


def unscale_coords(landmarks: LandmarkSet, grid: GridSpec) -> LandmarkSet:
    return landmarks.with_points(landmarks.points * grid.scale)


def render_gaussian(center: Point2 | tuple[float, float], grid: GridSpec, cfg: EncoderConfig) -> NDArray[np.float64]:
    """Sample one isotropic Gaussian centered at ``center`` (heatmap coords).

    Returns a ``(height, width)`` array indexed ``[y, x]``.
    """
    cx, cy = center
    radius = -1.0 if cfg.truncation_radius is None else float(cfg.truncation_radius)
    return kernels.render_batch(
        np.array([[cx, cy]]), np.array([True]), grid.height, grid.width, cfg.sigma, cfg.amplitude, radius
    )[0]


def encode_landmarks(landmarks: LandmarkSet, grid: GridSpec, cfg: EncoderConfig) -> NDArray[np.float64]:
    """Encode ``K`` input-image landmarks as a ``(K, height, width)`` heatmap stack.

    Invisible landmarks, including those that fall off the grid, give all-zero maps.
    """
    hm = scale_coords(landmarks, grid, cfg.quantize_mode)
    return encode_heatmap_coords(hm, grid, cfg)


def encode_heatmap_coords(hm: LandmarkSet, grid: GridSpec, cfg: EncoderConfig) -> NDArray[np.float64]:
    """Like :func:`encode_landmarks` for points already in heatmap coordinates (no quantization)."""
    radius = -1.0 if cfg.truncation_radius is None else float(cfg.truncation_radius)
    centers = np.where(hm.visibility[:, None], hm.points, 0.0)
    return kernels.render_batch(centers, hm.visibility, grid.height, grid.width, cfg.sigma, cfg.amplitude, radius)
