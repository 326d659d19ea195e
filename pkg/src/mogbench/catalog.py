"""Benchmark object taxonomy and planar footprints.

The built-in catalog holds the six primitive shapes in three simulated sizes
and two real-object sizes each, plus the single irregular object. All
lengths are millimeters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CatalogError


class Shape(str, Enum):
    CUBE = "cube"
    SPHERE = "sphere"
    CYLINDER = "cylinder"
    CUBOID = "cuboid"
    CONE = "cone"
    ELLIPSOID = "ellipsoid"
    IRREGULAR = "irregular"


class SizeClass(str, Enum):
    S = "s"
    M = "m"
    L = "l"


class Origin(str, Enum):
    SIMULATED = "simulated"
    REAL = "real"


DIM_NAMES: dict[Shape, tuple[str, ...]] = {
    Shape.CUBE: ("side",),
    Shape.SPHERE: ("diameter",),
    Shape.CYLINDER: ("diameter", "height"),
    Shape.CUBOID: ("length", "width", "height"),
    Shape.CONE: ("diameter", "height"),
    Shape.ELLIPSOID: ("long", "short"),
    Shape.IRREGULAR: ("length", "diameter"),
}


@dataclass(frozen=True)
class ObjectSpec:
    shape: Shape
    size_class: SizeClass
    origin: Origin
    dims: tuple[float, ...]
    label: str

    def __post_init__(self):
        names = DIM_NAMES[self.shape]
        if len(self.dims) != len(names):
            raise ValueError(f"{self.shape.value} needs dims {names}, got {self.dims}")
        if any(not d > 0 for d in self.dims):
            raise ValueError(f"dimensions must be strictly positive: {self.dims}")

    def dim(self, name: str) -> float:
        return self.dims[DIM_NAMES[self.shape].index(name)]


# label -> (shape, size class, origin, dims)
_TABLE: dict[str, tuple[Shape, SizeClass, Origin, tuple[float, ...]]] = {
    "cube_s_s": (Shape.CUBE, SizeClass.S, Origin.SIMULATED, (30.0,)),
    "cube_m_s": (Shape.CUBE, SizeClass.M, Origin.SIMULATED, (35.0,)),
    "cube_l_s": (Shape.CUBE, SizeClass.L, Origin.SIMULATED, (40.0,)),
    "cube_l_r": (Shape.CUBE, SizeClass.L, Origin.REAL, (55.0,)),
    "cube_s_r": (Shape.CUBE, SizeClass.S, Origin.REAL, (25.0,)),
    "sphere_s_s": (Shape.SPHERE, SizeClass.S, Origin.SIMULATED, (30.0,)),
    "sphere_m_s": (Shape.SPHERE, SizeClass.M, Origin.SIMULATED, (35.0,)),
    "sphere_l_s": (Shape.SPHERE, SizeClass.L, Origin.SIMULATED, (40.0,)),
    "sphere_l_r": (Shape.SPHERE, SizeClass.L, Origin.REAL, (52.0,)),
    "sphere_s_r": (Shape.SPHERE, SizeClass.S, Origin.REAL, (40.0,)),
    "cylin_s_s": (Shape.CYLINDER, SizeClass.S, Origin.SIMULATED, (30.0, 30.0)),
    "cylin_m_s": (Shape.CYLINDER, SizeClass.M, Origin.SIMULATED, (35.0, 35.0)),
    "cylin_l_s": (Shape.CYLINDER, SizeClass.L, Origin.SIMULATED, (40.0, 40.0)),
    "cylin_l_r": (Shape.CYLINDER, SizeClass.L, Origin.REAL, (26.0, 63.0)),
    "cylin_s_r": (Shape.CYLINDER, SizeClass.S, Origin.REAL, (36.0, 30.0)),
    "cuboid_s_s": (Shape.CUBOID, SizeClass.S, Origin.SIMULATED, (30.0, 10.0, 30.0)),
    "cuboid_m_s": (Shape.CUBOID, SizeClass.M, Origin.SIMULATED, (40.0, 20.0, 40.0)),
    "cuboid_l_s": (Shape.CUBOID, SizeClass.L, Origin.SIMULATED, (50.0, 30.0, 50.0)),
    "cuboid_l_r": (Shape.CUBOID, SizeClass.L, Origin.REAL, (107.0, 37.0, 29.0)),
    "cuboid_s_r": (Shape.CUBOID, SizeClass.S, Origin.REAL, (71.0, 16.0, 44.0)),
    "cone_s_s": (Shape.CONE, SizeClass.S, Origin.SIMULATED, (10.0, 30.0)),
    "cone_m_s": (Shape.CONE, SizeClass.M, Origin.SIMULATED, (15.0, 35.0)),
    "cone_l_s": (Shape.CONE, SizeClass.L, Origin.SIMULATED, (20.0, 40.0)),
    "cone_l_r": (Shape.CONE, SizeClass.L, Origin.REAL, (8.0, 17.0)),
    "cone_s_r": (Shape.CONE, SizeClass.S, Origin.REAL, (40.0, 56.0)),
    "ellip_s_s": (Shape.ELLIPSOID, SizeClass.S, Origin.SIMULATED, (30.0, 20.0)),
    "ellip_m_s": (Shape.ELLIPSOID, SizeClass.M, Origin.SIMULATED, (35.0, 25.0)),
    "ellip_l_s": (Shape.ELLIPSOID, SizeClass.L, Origin.SIMULATED, (40.0, 30.0)),
    "ellip_l_r": (Shape.ELLIPSOID, SizeClass.L, Origin.REAL, (60.0, 45.0)),
    "ellip_s_r": (Shape.ELLIPSOID, SizeClass.S, Origin.REAL, (33.0, 21.0)),
    # no size class or origin is given for the irregular object
    "irreg": (Shape.IRREGULAR, SizeClass.M, Origin.REAL, (40.0, 16.0)),
}

CATALOG: dict[str, ObjectSpec] = {
    label: ObjectSpec(shape, size, origin, dims, label)
    for label, (shape, size, origin, dims) in _TABLE.items()
}


def catalog_lookup(label: str) -> ObjectSpec:
    try:
        return CATALOG[label]
    except KeyError:
        raise CatalogError(f"unknown object label {label!r}") from None


def catalog_labels() -> list[str]:
    return list(CATALOG)


def footprint_kind(spec: ObjectSpec) -> str:
    """One of ``"rectangle"``, ``"disc"`` or ``"ellipse"``."""
    if spec.shape in (Shape.CUBE, Shape.CUBOID, Shape.IRREGULAR):
        return "rectangle"
    if spec.shape is Shape.ELLIPSOID:
        return "ellipse"
    return "disc"


def footprint_extent(spec: ObjectSpec) -> tuple[float, float]:
    """Full planar extents (along, across) of the footprint at yaw 0.

    Round objects rest upright, so cylinders and cones show their base disc.
    The irregular object is treated as a 40x16 rectangle.
    """
    s = spec.shape
    if s is Shape.CUBE:
        a = spec.dims[0]
        return a, a
    if s in (Shape.CUBOID, Shape.IRREGULAR, Shape.ELLIPSOID):
        return spec.dims[0], spec.dims[1]
    d = spec.dims[0]
    return d, d


def footprint_area(spec: ObjectSpec) -> float:
    a, b = footprint_extent(spec)
    kind = footprint_kind(spec)
    if kind == "rectangle":
        return a * b
    return math.pi * a * b / 4.0


def bounding_radius(spec: ObjectSpec) -> float:
    """Radius of the smallest circle containing the footprint at any yaw."""
    a, b = footprint_extent(spec)
    kind = footprint_kind(spec)
    if kind == "rectangle":
        return math.hypot(a, b) / 2.0
    return max(a, b) / 2.0


def footprint_outline(spec: ObjectSpec, yaw: float = 0.0, samples: int = 64) -> np.ndarray:
    """Boundary points of the footprint centred at the origin, rotated by ``yaw``.

    Rectangles return their four corners; round footprints return
    ``samples`` points on the boundary curve.
    """
    a, b = footprint_extent(spec)
    if footprint_kind(spec) == "rectangle":
        pts = np.array([[a, b], [-a, b], [-a, -b], [a, -b]], dtype=float) / 2.0
    else:
        t = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
        pts = np.column_stack([a / 2.0 * np.cos(t), b / 2.0 * np.sin(t)])
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    return pts @ rot.T
