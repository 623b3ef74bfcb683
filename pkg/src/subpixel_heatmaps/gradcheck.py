"""Finite-difference check of the local soft-argmax Jacobian."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .bench import make_rng
from .decoder import local_softargmax_jacobian, window_expectation


def finite_difference_jacobian(window, tau: float, step: float = 1e-4) -> np.ndarray:
    """Central differences of the window soft-argmax, same layout as the analytic Jacobian."""
    window = np.asarray(window, dtype=np.float64)
    out = np.empty(window.shape + (2,))
    for idx in np.ndindex(window.shape):
        hi = window.copy()
        lo = window.copy()
        hi[idx] += step
        lo[idx] -= step
        out[idx] = np.subtract(window_expectation(hi, tau), window_expectation(lo, tau)) / (2 * step)
    return out


def relative_error(analytic, numeric) -> float:
    """``max|A - N| / max|N|`` per output axis, worst axis returned."""
    err = np.abs(analytic - numeric).max(axis=(0, 1))
    return float((err / np.abs(numeric).max(axis=(0, 1))).max())


def gradcheck(taus: Sequence[float], window: int, n_windows: int, step: float, seed: int) -> list[tuple]:
    """Worst relative and absolute Jacobian error over random uniform ``[0, 1)`` windows, per tau."""
    rng = make_rng(seed)
    rows = []
    for tau in taus:
        worst_rel = 0.0
        worst_abs = 0.0
        for _ in range(n_windows):
            w = rng.uniform(0.0, 1.0, (window, window))
            analytic = local_softargmax_jacobian(w, tau)
            numeric = finite_difference_jacobian(w, tau, step)
            worst_rel = max(worst_rel, relative_error(analytic, numeric))
            worst_abs = max(worst_abs, float(np.abs(analytic - numeric).max()))
        rows.append((float(tau), window, n_windows, step, worst_rel, worst_abs))
    return rows
