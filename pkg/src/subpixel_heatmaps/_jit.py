"""Numba switch.

Set ``SUBPIXEL_HEATMAPS_DISABLE_JIT=1`` to run the pure-numpy kernels only.
Numba is also skipped when it cannot be imported.
"""

from __future__ import annotations

import importlib.util
import os

_FALSEY = {"", "0", "false", "no", "off"}


def _env_disabled() -> bool:
    return os.environ.get("SUBPIXEL_HEATMAPS_DISABLE_JIT", "").strip().lower() not in _FALSEY


HAVE_NUMBA = importlib.util.find_spec("numba") is not None

USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator.

    Kernels are always compiled when numba exists so the benchmark can compare
    both paths in one process; ``USE_NUMBA`` only controls which one the public
    API dispatches to.
    """
    if HAVE_NUMBA:
        import numba

        return numba.njit(*args, **kwargs)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
