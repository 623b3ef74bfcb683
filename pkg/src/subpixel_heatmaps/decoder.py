"""Recover sub-pixel landmark coordinates from heatmaps.

Four strategies are provided:

* ``argmax`` - integer location of the highest pixel;
* ``heuristic`` - argmax moved 0.25 px toward its highest 4-neighbor;
* ``local_softargmax`` - argmax refined by a temperature-scaled soft-argmax
  over a ``d x d`` window around it;
* ``global_softargmax`` - the same expectation over the whole map.

Single-map functions raise :class:`EmptyHeatmapError` on all-zero input;
:func:`decode_stack` instead reports such landmarks as invisible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from . import kernels
from .geometry import LandmarkSet, Point2

Strategy = Literal["argmax", "heuristic", "local_softargmax", "global_softargmax"]

STRATEGIES: dict[str, int] = {
    "argmax": kernels.ARGMAX,
    "heuristic": kernels.HEURISTIC,
    "local_softargmax": kernels.LOCAL_SOFTARGMAX,
    "global_softargmax": kernels.GLOBAL_SOFTARGMAX,
}


class EmptyHeatmapError(ValueError):
    """The heatmap has no positive activation, so there is nothing to localize."""


@dataclass(frozen=True)
class DecoderConfig:
    window: int = 5
    tau: float = 10.0
    strategy: Strategy = "local_softargmax"
    boundary_policy: Literal["shift_window"] = "shift_window"

    def __post_init__(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be an odd integer >= 3, got {self.window}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.boundary_policy != "shift_window":
            raise ValueError(f"unsupported boundary policy {self.boundary_policy!r}")


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Per-landmark decode output in heatmap coordinates.

    ``window_origin`` is the top-left corner of the soft-argmax window for the
    local strategy and the argmax pixel for the others.
    """

    coords: LandmarkSet
    peak_values: NDArray[np.float64]
    window_origin: NDArray[np.int64]


def _as_map(hm) -> NDArray[np.float64]:
    hm = np.asarray(hm, dtype=np.float64)
    if hm.ndim != 2 or hm.size == 0:
        raise ValueError(f"expected a non-empty 2D heatmap, got shape {hm.shape}")
    return hm


def argmax2d(hm) -> tuple[Point2, float]:
    """Integer ``(x, y)`` of the maximum; exact ties resolve to the first in row-major order."""
    hm = _as_map(hm)
    idx = int(np.argmax(hm))
    peak = float(hm.flat[idx])
    if not peak > 0:
        raise EmptyHeatmapError("heatmap has no positive value")
    y, x = divmod(idx, hm.shape[1])
    return Point2(float(x), float(y)), peak


def _decode_single(hm, strategy: int, d: int = 5, tau: float = 10.0) -> Point2:
    coords, peaks, _ = kernels.decode_batch(_as_map(hm)[None], strategy, d, tau)
    if not peaks[0] > 0:
        raise EmptyHeatmapError("heatmap has no positive value")
    return Point2(float(coords[0, 0]), float(coords[0, 1]))


def heuristic_decode(hm) -> Point2:
    """Argmax shifted by 0.25 px toward the highest of its 4-connected neighbors.

    Neighbors are scanned left, right, up, down and the first one wins exact
    ties. Neighbors outside the map are ignored.
    """
    return _decode_single(hm, kernels.HEURISTIC)


def extract_window(hm, center: Point2 | tuple[int, int], d: int) -> tuple[NDArray[np.float64], tuple[int, int]]:
    """Crop a ``d x d`` window around ``center``, shifted inward at the borders.

    Returns ``(window, (origin_x, origin_y))``.
    """
    hm = _as_map(hm)
    height, width = hm.shape
    if d % 2 == 0 or d < 1:
        raise ValueError(f"window size must be odd, got {d}")
    if d > min(height, width):
        raise ValueError(f"window {d} does not fit a {width}x{height} map")
    cx, cy = (int(round(c)) for c in center)
    half = (d - 1) // 2
    ox = min(max(cx - half, 0), width - d)
    oy = min(max(cy - half, 0), height - d)
    return hm[oy : oy + d, ox : ox + d], (ox, oy)


def softmax2d(window, tau: float) -> NDArray[np.float64]:
    """``softmax(tau * window)`` over all entries, computed with max subtraction."""
    z = tau * np.asarray(window, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def window_expectation(window, tau: float) -> tuple[float, float]:
    """Soft-argmax of a window as ``(x, y)`` in window-local pixel units."""
    p = softmax2d(window, tau)
    rows, cols = p.shape
    return float(p.sum(axis=0) @ np.arange(cols)), float(p.sum(axis=1) @ np.arange(rows))


def local_softargmax_decode(hm, cfg: DecoderConfig | None = None) -> Point2:
    """Argmax refined by a soft-argmax over the surrounding ``cfg.window`` pixels.

    The result is ``window origin + E[(m, n)]`` under ``softmax(tau * window)``.
    For a window centered on the argmax this is ``argmax + offset - (d - 1) / 2``.
    """
    cfg = cfg or DecoderConfig()
    return _decode_single(hm, kernels.LOCAL_SOFTARGMAX, cfg.window, cfg.tau)


def global_softargmax_decode(hm, tau: float = 10.0) -> Point2:
    return _decode_single(hm, kernels.GLOBAL_SOFTARGMAX, 1, tau)


def local_softargmax_jacobian(window, tau: float) -> NDArray[np.float64]:
    """Analytic derivative of the window soft-argmax w.r.t. each window value.

    Returns a ``(d, d, 2)`` array ``J`` with ``J[n, m, 0] = d(dx)/d(h[n, m])``
    and ``J[n, m, 1] = d(dy)/d(h[n, m])``, where
    ``d(dx)/d(h[n, m]) = tau * p[n, m] * (m - dx)``.
    """
    window = np.asarray(window, dtype=np.float64)
    p = softmax2d(window, tau)
    rows, cols = p.shape
    m = np.arange(cols, dtype=np.float64)[None, :]
    n = np.arange(rows, dtype=np.float64)[:, None]
    ex = float((p * m).sum())
    ey = float((p * n).sum())
    return np.stack([tau * p * (m - ex), tau * p * (n - ey)], axis=-1)


def decode_stack(stack, cfg: DecoderConfig | None = None) -> DecodeResult:
    """Decode every map of a ``(K, height, width)`` stack with ``cfg.strategy``."""
    cfg = cfg or DecoderConfig()
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim != 3:
        raise ValueError(f"expected a (K, H, W) stack, got shape {stack.shape}")
    coords, peaks, origins = kernels.decode_batch(stack, STRATEGIES[cfg.strategy], cfg.window, cfg.tau)
    visible = peaks > 0
    return DecodeResult(
        coords=LandmarkSet(coords, visible),
        peak_values=np.maximum(peaks, 0.0),
        window_origin=origins,
    )
