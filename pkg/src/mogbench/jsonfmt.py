"""Deterministic JSON encoding with fixed-precision decimals.

``json.dumps`` always prints floats with ``repr``; log and scene files need
lengths with 3 fractional digits and times with 6, and a key order that
never changes. Values wrapped in :class:`Fixed` are emitted as fixed-point
decimals, everything else falls back to ``json.dumps``.
"""

from __future__ import annotations

import json
import math
from typing import Any


class Fixed:
    __slots__ = ("value", "digits")

    def __init__(self, value: float, digits: int):
        self.value = float(value)
        self.digits = digits


def mm(value: float) -> Fixed:
    return Fixed(value, 3)


def sec(value: float | None) -> Fixed | None:
    return None if value is None else Fixed(value, 6)


def encode(obj: Any) -> str:
    if isinstance(obj, Fixed):
        if not math.isfinite(obj.value):
            raise ValueError(f"cannot encode non-finite value {obj.value}")
        text = f"{obj.value:.{obj.digits}f}"
        return "0." + "0" * obj.digits if text == "-0." + "0" * obj.digits else text
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in obj) + "]"
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"cannot encode non-finite value {obj}")
    return json.dumps(obj)
