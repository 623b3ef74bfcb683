"""Landmark evaluation: NME, cumulative error curve, AUC and failure rate.

NME values are percentages. The cumulative curve counts samples with
``nme <= t`` while the failure rate counts ``nme > t``, so at any threshold the
two partition the samples exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import LandmarkSet


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SampleError:
    errors: NDArray[np.float64]  # per-point Euclidean error, NaN where not visible
    normalizer: float
    nme: float

    @property
    def mean_px_err(self) -> float:
        return float(np.nanmean(self.errors))


@dataclass(eq=False)
class EvalReport:
    samples: list[SampleError]
    nme_mean: float
    auc: float
    fr: float
    curve: list[tuple[float, float]] = field(default_factory=list)
    auc_cutoff: float = 7.0
    fr_threshold: float = 10.0

    @property
    def nmes(self) -> NDArray[np.float64]:
        return np.array([s.nme for s in self.samples])

    @property
    def mean_px_err(self) -> float:
        """Mean per-point error over all visible points of all samples."""
        errs = np.concatenate([s.errors for s in self.samples]) if self.samples else np.array([])
        errs = errs[~np.isnan(errs)]
        return float(math.fsum(errs) / errs.size) if errs.size else float("nan")


def point_errors(pred: LandmarkSet, gt: LandmarkSet) -> NDArray[np.float64]:
    """Euclidean distance per point, NaN where ``gt`` is not visible."""
    if len(pred) != len(gt):
        raise MetricError(f"prediction has {len(pred)} points, ground truth {len(gt)}")
    d = np.hypot(*(pred.points - gt.points).T)
    return np.where(gt.visibility, d, np.nan)


def nme(pred: LandmarkSet, gt: LandmarkSet, norm: float) -> SampleError:
    """Normalized mean error (percent) over the visible ground-truth points.

    A visible ground-truth point whose prediction is missing (NaN) is an error.
    """
    if not norm > 0:
        raise MetricError(f"normalizer must be positive, got {norm}")
    errors = point_errors(pred, gt)
    vis = gt.visibility
    if not vis.any():
        raise MetricError("no visible ground-truth points")
    if np.isnan(errors[vis]).any():
        raise MetricError("prediction missing for a visible ground-truth point")
    value = 100.0 * math.fsum(errors[vis] / norm) / int(vis.sum())
    return SampleError(errors=errors, normalizer=float(norm), nme=value)


def _as_nmes(nmes: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(nmes, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise MetricError("no samples")
    return arr


def cumulative_curve(nmes: ArrayLike, max_threshold: float, steps: int) -> list[tuple[float, float]]:
    """Fraction of samples with ``nme <= t`` on ``steps`` evenly spaced thresholds in ``[0, max_threshold]``."""
    if steps < 2:
        raise MetricError("curve needs at least two thresholds")
    arr = np.sort(_as_nmes(nmes))
    thresholds = np.linspace(0.0, max_threshold, steps)
    counts = np.searchsorted(arr, thresholds, side="right")
    return [(float(t), float(c) / arr.size) for t, c in zip(thresholds, counts)]


def auc(nmes: ArrayLike, cutoff: float) -> float:
    """Area under the cumulative error curve on ``[0, cutoff]``, divided by ``cutoff``.

    The empirical curve is a step function, so the integral is exact: a sample
    with error ``e`` contributes ``max(0, cutoff - e)``.
    """
    if not cutoff > 0:
        raise MetricError(f"cutoff must be positive, got {cutoff}")
    arr = _as_nmes(nmes)
    contrib = np.clip(cutoff - np.maximum(arr, 0.0), 0.0, cutoff)
    return math.fsum(contrib) / (cutoff * arr.size)


def failure_rate(nmes: ArrayLike, threshold: float) -> float:
    if not threshold > 0:
        raise MetricError(f"threshold must be positive, got {threshold}")
    arr = _as_nmes(nmes)
    return 100.0 * int(np.count_nonzero(arr > threshold)) / arr.size


def evaluate(
    samples: list[SampleError],
    auc_cutoff: float = 7.0,
    fr_threshold: float = 10.0,
    curve_steps: int = 101,
) -> EvalReport:
    nmes = [s.nme for s in samples]
    return EvalReport(
        samples=samples,
        nme_mean=math.fsum(nmes) / len(nmes) if nmes else float("nan"),
        auc=auc(nmes, auc_cutoff),
        fr=failure_rate(nmes, fr_threshold),
        curve=cumulative_curve(nmes, auc_cutoff, curve_steps),
        auc_cutoff=auc_cutoff,
        fr_threshold=fr_threshold,
    )
