"""Independent reference implementations used as test oracles.

Nothing here imports the package under test: each function re-derives its
result from the defining formula, in plain Python or mpmath.
"""

from __future__ import annotations

import math

import mpmath as mp


def gaussian_value(x, y, cx, cy, sigma, amplitude=1.0):
    return amplitude * math.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * sigma**2))


def local_softargmax_mp(cx, cy, sigma=1, tau=10, d=5, amplitude=1, dps=50):
    """Window soft-argmax of a sampled Gaussian, evaluated at ``dps`` digits.

    The argmax of a sampled isotropic Gaussian is the pixel nearest its
    center, so the window is placed there directly (interior case).
    """
    with mp.workdps(dps):
        cx, cy, sigma, tau = mp.mpf(cx), mp.mpf(cy), mp.mpf(sigma), mp.mpf(tau)
        ix = int(mp.floor(cx + mp.mpf(1) / 2))
        iy = int(mp.floor(cy + mp.mpf(1) / 2))
        half = (d - 1) // 2
        ox, oy = ix - half, iy - half
        s = ex = ey = mp.mpf(0)
        for n in range(d):
            for m in range(d):
                h = amplitude * mp.exp(-((ox + m - cx) ** 2 + (oy + n - cy) ** 2) / (2 * sigma**2))
                w = mp.exp(tau * h)
                s += w
                ex += w * m
                ey += w * n
        return float(ox + ex / s), float(oy + ey / s)


def expected_uniform_rounding_error() -> float:
    """E|(u, v)| for u, v ~ U(-1/2, 1/2), by numerical double integration."""
    with mp.workdps(30):
        val = mp.quad(lambda u, v: mp.sqrt(u * u + v * v), [-0.5, 0, 0.5], [-0.5, 0, 0.5])
    return float(val)


def bilinear_sample(grid, x, y):
    """Bilinear read of a nested-list image at ``(x, y)`` with zero outside."""
    rows, cols = len(grid), len(grid[0])

    def px(i, j):
        return grid[j][i] if 0 <= i < cols and 0 <= j < rows else 0.0

    x0, y0 = math.floor(x), math.floor(y)
    fx, fy = x - x0, y - y0
    return (
        (1 - fx) * (1 - fy) * px(x0, y0)
        + fx * (1 - fy) * px(x0 + 1, y0)
        + (1 - fx) * fy * px(x0, y0 + 1)
        + fx * fy * px(x0 + 1, y0 + 1)
    )


def riemann_auc(nmes, cutoff, steps=100_000):
    """Midpoint Riemann sum of the empirical CDF on [0, cutoff], divided by cutoff."""
    srt = sorted(nmes)
    n = len(srt)
    total = 0.0
    j = 0
    dt = cutoff / steps
    for i in range(steps):
        t = (i + 0.5) * dt
        while j < n and srt[j] <= t:
            j += 1
        total += j / n
    return total * dt / cutoff


def rotate_about(x, y, angle_deg, cx, cy):
    a = math.radians(angle_deg)
    dx, dy = x - cx, y - cy
    return cx + math.cos(a) * dx - math.sin(a) * dy, cy + math.sin(a) * dx + math.cos(a) * dy


def invert_2x3(m):
    (a, b, tx), (c, d, ty) = m
    det = a * d - b * c
    ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
    return [[ia, ib, -(ia * tx + ib * ty)], [ic, id_, -(ic * tx + id_ * ty)]]


def reference_local_decode(hm, d, tau):
    """Plain-Python argmax + shifted window + soft-argmax on a nested list."""
    rows, cols = len(hm), len(hm[0])
    best, bx, by = hm[0][0], 0, 0
    for y in range(rows):
        for x in range(cols):
            if hm[y][x] > best:
                best, bx, by = hm[y][x], x, y
    half = (d - 1) // 2
    ox = min(max(bx - half, 0), cols - d)
    oy = min(max(by - half, 0), rows - d)
    vals = [hm[oy + n][ox + m] for n in range(d) for m in range(d)]
    mx = max(vals)
    s = ex = ey = 0.0
    for n in range(d):
        for m in range(d):
            w = math.exp(tau * (hm[oy + n][ox + m] - mx))
            s += w
            ex += w * m
            ey += w * n
    return ox + ex / s, oy + ey / s
