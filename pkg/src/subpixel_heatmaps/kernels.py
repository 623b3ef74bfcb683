"""Hot loops: batched Gaussian rendering, batched decoding, bilinear warping.

Every kernel exists twice, a numba version (``*_nb``) and a vectorized numpy
version (``*_np``). The public wrappers dispatch on ``_jit.USE_NUMBA``. Both
paths evaluate the same expressions per pixel; they agree to within a few ulps
(libm ``exp`` and summation order may differ), not bit-for-bit.

Array layout is ``(..., rows, cols)`` = ``(..., y, x)``.
"""

from __future__ import annotations

import math

import numpy as np

from . import _jit
from ._jit import njit

ARGMAX = 0
HEURISTIC = 1
LOCAL_SOFTARGMAX = 2
GLOBAL_SOFTARGMAX = 3

HEURISTIC_SHIFT = 0.25


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _render_nb(centers, visible, height, width, sigma, amplitude, radius):
    n = centers.shape[0]
    out = np.empty((n, height, width))
    gx = np.empty(width)
    gy = np.empty(height)
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    for k in range(n):
        if not visible[k]:
            out[k] = 0.0
            continue
        cx = centers[k, 0]
        cy = centers[k, 1]
        for x in range(width):
            dx = x - cx
            if radius >= 0 and abs(dx) > radius:
                gx[x] = 0.0
            else:
                gx[x] = math.exp(-(dx * dx) * inv2s2)
        for y in range(height):
            dy = y - cy
            if radius >= 0 and abs(dy) > radius:
                gy[y] = 0.0
            else:
                gy[y] = amplitude * math.exp(-(dy * dy) * inv2s2)
        flat = out[k].ravel()
        for y in range(height):
            ay = gy[y]
            base = y * width
            for x in range(width):
                flat[base + x] = ay * gx[x]
    return out


def _render_np(centers, visible, height, width, sigma, amplitude, radius):
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    dx = np.arange(width, dtype=np.float64)[None, :] - centers[:, 0:1]
    dy = np.arange(height, dtype=np.float64)[None, :] - centers[:, 1:2]
    gx = np.exp(-(dx * dx) * inv2s2)
    gy = amplitude * np.exp(-(dy * dy) * inv2s2)
    if radius >= 0:
        gx[np.abs(dx) > radius] = 0.0
        gy[np.abs(dy) > radius] = 0.0
    out = gy[:, :, None] * gx[:, None, :]
    out[~visible] = 0.0
    return out


def render_batch(centers, visible, height, width, sigma, amplitude, radius=-1.0):
    """Render ``N`` separable isotropic Gaussians into an ``(N, height, width)`` array.

    ``radius < 0`` disables truncation; otherwise pixels whose x or y offset
    from the center exceeds ``radius`` are exactly zero. Invisible rows stay
    all-zero.
    """
    centers = np.ascontiguousarray(centers, dtype=np.float64).reshape(-1, 2)
    visible = np.ascontiguousarray(visible, dtype=np.bool_).reshape(-1)
    args = (centers, visible, int(height), int(width), float(sigma), float(amplitude), float(radius))
    if _jit.USE_NUMBA:
        return _render_nb(*args)
    return _render_np(*args)


# --------------------------------------------------------------------------
# decoding
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _decode_one_nb(hm, strategy, d, tau, out_xy, out_origin):
    """Decode one map in place; returns the peak value (<= 0 means empty map)."""
    height, width = hm.shape
    flat = hm.ravel()
    best = np.argmax(flat)
    peak = flat[best]
    iy = best // width
    ix = best - iy * width
    out_origin[0] = ix
    out_origin[1] = iy
    if not peak > 0.0:
        out_xy[0] = np.nan
        out_xy[1] = np.nan
        return peak

    if strategy == 0:
        out_xy[0] = ix
        out_xy[1] = iy
    elif strategy == 1:
        # neighbor order left, right, up, down; strict > keeps the first on ties
        best = -np.inf
        sx = 0.0
        sy = 0.0
        if ix > 0 and hm[iy, ix - 1] > best:
            best = hm[iy, ix - 1]
            sx = -1.0
            sy = 0.0
        if ix < width - 1 and hm[iy, ix + 1] > best:
            best = hm[iy, ix + 1]
            sx = 1.0
            sy = 0.0
        if iy > 0 and hm[iy - 1, ix] > best:
            best = hm[iy - 1, ix]
            sx = 0.0
            sy = -1.0
        if iy < height - 1 and hm[iy + 1, ix] > best:
            best = hm[iy + 1, ix]
            sx = 0.0
            sy = 1.0
        out_xy[0] = ix + 0.25 * sx
        out_xy[1] = iy + 0.25 * sy
    elif strategy == 2:
        l = (d - 1) // 2
        ox = min(max(ix - l, 0), width - d)
        oy = min(max(iy - l, 0), height - d)
        mx = -np.inf
        for n in range(d):
            for m in range(d):
                if hm[oy + n, ox + m] > mx:
                    mx = hm[oy + n, ox + m]
        s = 0.0
        ex = 0.0
        ey = 0.0
        for n in range(d):
            for m in range(d):
                e = math.exp(tau * (hm[oy + n, ox + m] - mx))
                s += e
                ex += e * m
                ey += e * n
        out_origin[0] = ox
        out_origin[1] = oy
        out_xy[0] = ox + ex / s
        out_xy[1] = oy + ey / s
    else:
        s = 0.0
        ex = 0.0
        ey = 0.0
        for y in range(height):
            for x in range(width):
                e = math.exp(tau * (hm[y, x] - peak))
                s += e
                ex += e * x
                ey += e * y
        out_origin[0] = 0
        out_origin[1] = 0
        out_xy[0] = ex / s
        out_xy[1] = ey / s
    return peak


@njit(cache=True, nogil=True)
def _decode_nb(maps, strategy, d, tau):
    n = maps.shape[0]
    coords = np.empty((n, 2))
    origins = np.empty((n, 2), dtype=np.int64)
    peaks = np.empty(n)
    for k in range(n):
        peaks[k] = _decode_one_nb(maps[k], strategy, d, tau, coords[k], origins[k])
    return coords, peaks, origins


def _decode_np(maps, strategy, d, tau):
    n, height, width = maps.shape
    flat = maps.reshape(n, -1)
    idx = np.argmax(flat, axis=1)
    peaks = flat[np.arange(n), idx]
    iy, ix = np.divmod(idx, width)
    origins = np.stack([ix, iy], axis=1).astype(np.int64)
    coords = np.empty((n, 2))
    rows = np.arange(n)

    if strategy == ARGMAX:
        coords[:, 0] = ix
        coords[:, 1] = iy
    elif strategy == HEURISTIC:
        def neighbor(dy, dx):
            ny, nx = iy + dy, ix + dx
            ok = (ny >= 0) & (ny < height) & (nx >= 0) & (nx < width)
            vals = maps[rows, np.clip(ny, 0, height - 1), np.clip(nx, 0, width - 1)]
            return np.where(ok, vals, -np.inf)

        neigh = np.stack([neighbor(0, -1), neighbor(0, 1), neighbor(-1, 0), neighbor(1, 0)], axis=1)
        best = np.argmax(neigh, axis=1)  # first maximum wins ties
        step = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])[best]
        coords[:, 0] = ix + HEURISTIC_SHIFT * step[:, 0]
        coords[:, 1] = iy + HEURISTIC_SHIFT * step[:, 1]
    elif strategy == LOCAL_SOFTARGMAX:
        l = (d - 1) // 2
        ox = np.clip(ix - l, 0, width - d)
        oy = np.clip(iy - l, 0, height - d)
        r = np.arange(d)
        win = maps[rows[:, None, None], (oy[:, None] + r)[:, :, None], (ox[:, None] + r)[:, None, :]]
        e = np.exp(tau * (win - win.max(axis=(1, 2))[:, None, None]))
        s = e.sum(axis=(1, 2))
        coords[:, 0] = ox + (e.sum(axis=1) * r).sum(axis=1) / s
        coords[:, 1] = oy + (e.sum(axis=2) * r).sum(axis=1) / s
        origins = np.stack([ox, oy], axis=1).astype(np.int64)
    else:
        e = np.exp(tau * (maps - peaks[:, None, None]))
        s = e.sum(axis=(1, 2))
        coords[:, 0] = (e.sum(axis=1) * np.arange(width)).sum(axis=1) / s
        coords[:, 1] = (e.sum(axis=2) * np.arange(height)).sum(axis=1) / s
        origins[:] = 0

    empty = ~(peaks > 0)
    coords[empty] = np.nan
    return coords, peaks, origins


def decode_batch(maps, strategy: int, d: int = 5, tau: float = 10.0):
    """Decode an ``(N, H, W)`` stack.

    Returns ``(coords (N, 2) as x, y; peaks (N,); origins (N, 2))``. Maps whose
    maximum is not positive decode to NaN. ``origins`` holds the argmax pixel
    for argmax/heuristic, the window corner for local soft-argmax and zeros for
    the global variant.
    """
    maps = np.ascontiguousarray(maps, dtype=np.float64)
    if maps.ndim == 2:
        maps = maps[None]
    _, height, width = maps.shape
    if strategy == LOCAL_SOFTARGMAX and (d % 2 == 0 or d < 1 or d > min(height, width)):
        raise ValueError(f"window size {d} must be odd and fit a {width}x{height} map")
    if _jit.USE_NUMBA:
        return _decode_nb(maps, int(strategy), int(d), float(tau))
    return _decode_np(maps, int(strategy), int(d), float(tau))


# --------------------------------------------------------------------------
# bilinear warp
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _warp_nb(maps, src_from_dst):
    n, height, width = maps.shape
    out = np.zeros_like(maps)
    a = src_from_dst[0, 0]
    b = src_from_dst[0, 1]
    tx = src_from_dst[0, 2]
    c = src_from_dst[1, 0]
    dd = src_from_dst[1, 1]
    ty = src_from_dst[1, 2]
    for y in range(height):
        for x in range(width):
            sx = a * x + b * y + tx
            sy = c * x + dd * y + ty
            if not (sx > -1.0 and sx < width and sy > -1.0 and sy < height):
                continue
            x0 = int(math.floor(sx))
            y0 = int(math.floor(sy))
            fx = sx - x0
            fy = sy - y0
            w00 = (1.0 - fx) * (1.0 - fy)
            w10 = fx * (1.0 - fy)
            w01 = (1.0 - fx) * fy
            w11 = fx * fy
            in_x0 = x0 >= 0
            in_x1 = x0 + 1 < width
            in_y0 = y0 >= 0
            in_y1 = y0 + 1 < height
            for k in range(n):
                v = 0.0
                if in_y0 and in_x0:
                    v += w00 * maps[k, y0, x0]
                if in_y0 and in_x1:
                    v += w10 * maps[k, y0, x0 + 1]
                if in_y1 and in_x0:
                    v += w01 * maps[k, y0 + 1, x0]
                if in_y1 and in_x1:
                    v += w11 * maps[k, y0 + 1, x0 + 1]
                out[k, y, x] = v
    return out


def _warp_np(maps, src_from_dst):
    n, height, width = maps.shape
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    m = src_from_dst
    sx = m[0, 0] * xx + m[0, 1] * yy + m[0, 2]
    sy = m[1, 0] * xx + m[1, 1] * yy + m[1, 2]
    inside = (sx > -1.0) & (sx < width) & (sy > -1.0) & (sy < height)
    sx = np.where(inside, sx, 0.0)
    sy = np.where(inside, sy, 0.0)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0
    padded = np.pad(maps, ((0, 0), (1, 1), (1, 1)))

    def tap(yi, xi):
        return padded[:, yi + 1, xi + 1]

    out = (
        (1.0 - fx) * (1.0 - fy) * tap(y0, x0)
        + fx * (1.0 - fy) * tap(y0, x0 + 1)
        + (1.0 - fx) * fy * tap(y0 + 1, x0)
        + fx * fy * tap(y0 + 1, x0 + 1)
    )
    out[:, ~inside] = 0.0
    return out


def warp_batch(maps, src_from_dst):
    """Inverse-map bilinear resampling with zero fill.

    Output pixel ``(x, y)`` reads the source at ``src_from_dst @ (x, y, 1)``;
    taps that fall outside the source contribute zero.
    """
    maps = np.ascontiguousarray(maps, dtype=np.float64)
    squeeze = maps.ndim == 2
    if squeeze:
        maps = maps[None]
    m = np.ascontiguousarray(src_from_dst, dtype=np.float64)
    out = _warp_nb(maps, m) if _jit.USE_NUMBA else _warp_np(maps, m)
    return out[0] if squeeze else out
