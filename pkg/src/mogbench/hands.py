"""Hand archetypes as planar capture footprints."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .catalog import ObjectSpec, footprint_area

# Fraction of the hand footprint that packed objects can occupy.
PACKING_EFFICIENCY = 0.6


class HandKind(str, Enum):
    PARALLEL_GRIPPER = "parallel_gripper"
    TRIFINGER = "trifinger"
    SOFT_HAND = "soft_hand"
    HUMAN_HAND = "human_hand"


@dataclass(frozen=True)
class RectFootprint:
    """``width`` runs along the hand's local x axis, ``depth`` along local y."""

    width: float
    depth: float

    def __post_init__(self):
        if not (self.width > 0 and self.depth > 0):
            raise ValueError("footprint dimensions must be positive")

    @property
    def area(self) -> float:
        return self.width * self.depth

    @property
    def min_dim(self) -> float:
        return min(self.width, self.depth)


@dataclass(frozen=True)
class DiscFootprint:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("footprint radius must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def min_dim(self) -> float:
        return 2.0 * self.radius


Footprint = RectFootprint | DiscFootprint


@dataclass(frozen=True)
class HandModel:
    kind: HandKind
    footprint: Footprint
    max_layers: int = 1
    slip_prob: float = 0.0
    capacity_override: int | None = None

    def __post_init__(self):
        if self.max_layers < 1:
            raise ValueError("max_layers must be >= 1")
        if not 0.0 <= self.slip_prob <= 1.0:
            raise ValueError("slip_prob must lie in [0, 1]")
        if self.capacity_override is not None and self.capacity_override < 0:
            raise ValueError("capacity_override must be non-negative")


@dataclass(frozen=True)
class GraspPose:
    x: float
    y: float
    yaw: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


# The trifinger disc radius is calibrated so that capacity(cube_m_s) == 4.
_BUILTIN = {
    HandKind.PARALLEL_GRIPPER: HandModel(HandKind.PARALLEL_GRIPPER, RectFootprint(85.0, 25.0), max_layers=1, slip_prob=0.05),
    HandKind.TRIFINGER: HandModel(HandKind.TRIFINGER, DiscFootprint(55.0), max_layers=2, slip_prob=0.05),
    HandKind.SOFT_HAND: HandModel(HandKind.SOFT_HAND, RectFootprint(100.0, 90.0), max_layers=2, slip_prob=0.05),
    HandKind.HUMAN_HAND: HandModel(HandKind.HUMAN_HAND, RectFootprint(180.0, 90.0), max_layers=3, slip_prob=0.01),
}


def builtin_hand(kind: HandKind | str) -> HandModel:
    return _BUILTIN[HandKind(kind)]


@dataclass(frozen=True)
class CaptureRegion:
    """A hand footprint placed in the bin frame."""

    footprint: Footprint
    x: float
    y: float
    yaw: float

    def contains(self, px, py) -> np.ndarray:
        px = np.atleast_1d(np.asarray(px, dtype=float))
        py = np.atleast_1d(np.asarray(py, dtype=float))
        fp = self.footprint
        if isinstance(fp, DiscFootprint):
            return kernels.in_disc_mask(px, py, self.x, self.y, fp.radius)
        return kernels.in_rect_mask(px, py, self.x, self.y, self.yaw, fp.width / 2.0, fp.depth / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        return bool(self.contains([x], [y])[0])

    def vertices(self) -> np.ndarray:
        """Rectangle corners in the bin frame (counter-clockwise); discs have none."""
        fp = self.footprint
        if isinstance(fp, DiscFootprint):
            return np.zeros((0, 2))
        hw, hd = fp.width / 2.0, fp.depth / 2.0
        local = np.array([[hw, hd], [-hw, hd], [-hw, -hd], [hw, -hd]])
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return local @ np.array([[c, s], [-s, c]]) + np.array([self.x, self.y])


def capture_region(hand: HandModel, pose: GraspPose) -> CaptureRegion:
    yaw = 0.0 if isinstance(hand.footprint, DiscFootprint) else pose.yaw
    return CaptureRegion(hand.footprint, pose.x, pose.y, yaw)


def capacity(hand: HandModel, spec: ObjectSpec) -> int:
    """How many objects of ``spec`` the hand retains in one grasp."""
    if hand.capacity_override is not None:
        return hand.capacity_override
    ratio = PACKING_EFFICIENCY * hand.footprint.area / footprint_area(spec)
    # guard against 3.9999999 style results for exact ratios
    return max(0, math.floor(ratio + 1e-9))
