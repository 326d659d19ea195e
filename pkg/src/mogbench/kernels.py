"""Backend selection for the geometric kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``MOGBENCH_PURE_PYTHON`` is set to a non-empty value,
the numpy implementation is used. Both produce identical results.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from types import ModuleType

import numpy as np

from . import _pykernels

EPS = _pykernels.EPS


def _load_compiled() -> ModuleType | None:
    if os.environ.get("MOGBENCH_PURE_PYTHON"):
        return None
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()
backend: ModuleType = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


@lru_cache(maxsize=64)
def _rotations(n: int, span: float) -> tuple[np.ndarray, np.ndarray]:
    angles = [span * k / n for k in range(n)]
    cos_arr = np.array([math.cos(a) for a in angles])
    sin_arr = np.array([math.sin(a) for a in angles])
    cos_arr.flags.writeable = False
    sin_arr.flags.writeable = False
    return cos_arr, sin_arr


def yaw_samples(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cosines and sines of ``k * pi / n`` for ``k`` in ``range(n)``."""
    return _rotations(n, math.pi)


def yaw_angle(k: int, n: int) -> float:
    return math.pi * k / n


def in_rect_mask(px, py, cx, cy, yaw, half_w, half_d):
    return backend.in_rect_mask(px, py, cx, cy, math.cos(yaw), math.sin(yaw), half_w, half_d)


def in_disc_mask(px, py, cx, cy, radius):
    return backend.in_disc_mask(px, py, cx, cy, radius)


def first_feasible_yaw(mx, my, ox, oy, cx, cy, cos_arr, sin_arr, half_w, half_d) -> int:
    return int(backend.first_feasible_yaw(mx, my, ox, oy, cx, cy, cos_arr, sin_arr, half_w, half_d))


def grid_counts(px, py, layers, gx, gy, cos_arr, sin_arr, half_w, half_d, disc_radius, max_layers):
    return backend.grid_counts(px, py, layers, gx, gy, cos_arr, sin_arr, half_w, half_d, disc_radius, max_layers)
