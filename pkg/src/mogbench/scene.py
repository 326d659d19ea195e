"""Planar bin scenes: single-layer surface layouts and layered piles.

A scene is a 2.5D world. Each object has a planar pose in the bin frame
(origin at the bin's lower-left corner, millimeters) and an integer layer,
0 being the bin floor. Overlap and support tests use bounding circles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

import numpy as np

from .catalog import ObjectSpec, bounding_radius, catalog_lookup
from .errors import CatalogError, DensityError, IdError, IngestError
from .jsonfmt import Fixed, encode, mm

SCHEMA = "mogbench/1"

# Rejection-sampling cap per placed object.
MAX_ATTEMPTS = 10_000
_BATCH = 64


class Scenario(str, Enum):
    SURFACE = "surface"
    PILE = "pile"


@dataclass(frozen=True)
class BinRect:
    width: float = 400.0
    height: float = 400.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("bin dimensions must be positive")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class ObjectInstance:
    id: int
    spec: ObjectSpec
    x: float
    y: float
    yaw: float = 0.0
    layer: int = 0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def radius(self) -> float:
        return bounding_radius(self.spec)


@dataclass(frozen=True)
class Scene:
    bin: BinRect
    scenario: Scenario
    objects: tuple[ObjectInstance, ...]
    seed: int = 0
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {o.id: o for o in self.objects}
        if len(index) != len(self.objects):
            raise IdError("object ids must be unique")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    @property
    def ids(self) -> list[int]:
        return [o.id for o in self.objects]

    def get(self, obj_id: int) -> ObjectInstance:
        try:
            return self._index[obj_id]
        except KeyError:
            raise IdError(f"unknown object id {obj_id}") from None

    def xy(self) -> np.ndarray:
        if not self.objects:
            return np.zeros((0, 2))
        return np.array([[o.x, o.y] for o in self.objects], dtype=float)

    def layers(self) -> np.ndarray:
        return np.array([o.layer for o in self.objects], dtype=np.int64)

    def radii(self) -> np.ndarray:
        return np.array([o.radius for o in self.objects], dtype=float)

    @property
    def spec(self) -> ObjectSpec | None:
        """The object spec shared by every instance, or None for empty or mixed scenes."""
        specs = {o.spec for o in self.objects}
        return specs.pop() if len(specs) == 1 else None

    def with_objects(self, objects: Iterable[ObjectInstance]) -> Scene:
        return replace(self, objects=tuple(objects))


def _inflated_bounds(bin_: BinRect, r: float) -> tuple[float, float, float, float]:
    return r, bin_.width - r, r, bin_.height - r


def _draw_batch(rng: np.random.Generator, n: int, bounds) -> np.ndarray:
    x0, x1, y0, y1 = bounds
    u = rng.random((n, 3))
    return np.column_stack([x0 + u[:, 0] * (x1 - x0), y0 + u[:, 1] * (y1 - y0), u[:, 2] * math.pi])


def _generate(spec: ObjectSpec, count: int, bin_: BinRect, seed: int, scenario: Scenario) -> Scene:
    if count < 0:
        raise ValueError("count must be non-negative")
    r = bounding_radius(spec)
    bounds = _inflated_bounds(bin_, r)
    if count and (bounds[1] < bounds[0] or bounds[3] < bounds[2]):
        raise DensityError(f"bin {bin_.width}x{bin_.height} cannot hold one {spec.label}", 0, count)
    rng = np.random.default_rng(seed)
    xs = np.empty(count)
    ys = np.empty(count)
    layers = np.zeros(count, dtype=np.int64)
    objects = []
    for i in range(count):
        attempts = 0
        placed = False
        while attempts < MAX_ATTEMPTS and not placed:
            batch = _draw_batch(rng, min(_BATCH, MAX_ATTEMPTS - attempts), bounds)
            dx = batch[:, 0:1] - xs[None, :i]
            dy = batch[:, 1:2] - ys[None, :i]
            d = np.sqrt(dx * dx + dy * dy)
            if scenario is Scenario.SURFACE:
                ok = (d >= 2.0 * r).all(axis=1)
                lay = np.zeros(len(batch), dtype=np.int64)
            else:
                ok, lay = _drop_layers(d, layers[:i], r, r)
            hits = np.flatnonzero(ok)
            if hits.size:
                j = int(hits[0])
                attempts += j + 1
                xs[i], ys[i], layers[i] = batch[j, 0], batch[j, 1], lay[j]
                objects.append(ObjectInstance(i, spec, float(batch[j, 0]), float(batch[j, 1]), float(batch[j, 2]), int(lay[j])))
                placed = True
            else:
                attempts += len(batch)
        if not placed:
            raise DensityError(
                f"placed {i} of {count} {spec.label} in {bin_.width}x{bin_.height} bin "
                f"after {MAX_ATTEMPTS} attempts",
                i,
                count,
            )
    return Scene(bin_, scenario, tuple(objects), seed)


def _drop_layers(d: np.ndarray, layers: np.ndarray, r_new: float, r_old: float):
    """Layer assignment for candidate drops given distances ``d`` (candidates x placed).

    A candidate overlapping nothing lands on the floor. Otherwise it lands one
    layer above the highest overlapped object and is accepted only if an
    object on that highest layer has the candidate's center within its
    bounding circle.
    """
    if d.shape[1] == 0:
        return np.ones(d.shape[0], dtype=bool), np.zeros(d.shape[0], dtype=np.int64)
    overlap = d < r_new + r_old
    top = np.where(overlap, layers[None, :], -1).max(axis=1)
    support = overlap & (layers[None, :] == top[:, None]) & (d <= r_old)
    ok = (top < 0) | support.any(axis=1)
    return ok, top + 1


def generate_surface_scene(spec: ObjectSpec, count: int, bin: BinRect | None = None, seed: int = 0) -> Scene:
    """Non-overlapping single-layer layout of ``count`` identical objects."""
    return _generate(spec, count, bin or BinRect(), seed, Scenario.SURFACE)


def generate_pile_scene(spec: ObjectSpec, count: int, bin: BinRect | None = None, seed: int = 0) -> Scene:
    """Pile built by sequential drops; every raised object rests on one below it."""
    return _generate(spec, count, bin or BinRect(), seed, Scenario.PILE)


def generate_scene(spec: ObjectSpec, count: int, scenario: Scenario | str, bin: BinRect | None = None, seed: int = 0) -> Scene:
    scenario = Scenario(scenario)
    return _generate(spec, count, bin or BinRect(), seed, scenario)


def supporters(scene: Scene, inst: ObjectInstance) -> list[ObjectInstance]:
    return [
        o
        for o in scene.objects
        if o.layer == inst.layer - 1 and math.hypot(o.x - inst.x, o.y - inst.y) <= o.radius
    ]


def remove_objects(scene: Scene, ids: Iterable[int]) -> Scene:
    """Remove instances; in piles, unsupported objects drop until supported."""
    ids = set(ids)
    unknown = ids - set(scene.ids)
    if unknown:
        raise IdError(f"unknown object ids {sorted(unknown)}")
    if not ids:
        return scene
    remaining = {o.id: o for o in scene.objects if o.id not in ids}
    if scene.scenario is Scenario.PILE:
        _settle(remaining)
    return scene.with_objects(o for o in (remaining[i] for i in sorted(remaining)))


def _settle(objs: dict[int, ObjectInstance]) -> None:
    changed = True
    while changed:
        changed = False
        for inst in sorted(objs.values(), key=lambda o: (o.layer, o.id)):
            inst = objs[inst.id]
            if inst.layer == 0:
                continue
            below = [o for o in objs.values() if o.id != inst.id]
            if any(o.layer == inst.layer - 1 and math.hypot(o.x - inst.x, o.y - inst.y) <= o.radius for o in below):
                continue
            new_layer = max(
                [0]
                + [
                    o.layer + 1
                    for o in below
                    if o.layer <= inst.layer - 2 and math.hypot(o.x - inst.x, o.y - inst.y) <= o.radius
                ]
            )
            objs[inst.id] = replace(inst, layer=new_layer)
            changed = True


def move_object(scene: Scene, obj_id: int, x: float, y: float) -> Scene:
    target = scene.get(obj_id)
    moved = replace(target, x=float(x), y=float(y))
    return scene.with_objects(moved if o.id == obj_id else o for o in scene.objects)


def check_surface_invariant(scene: Scene) -> bool:
    objs = scene.objects
    for i, a in enumerate(objs):
        if a.layer != 0:
            return False
        for b in objs[i + 1 :]:
            if math.hypot(a.x - b.x, a.y - b.y) < a.radius + b.radius:
                return False
    return True


def check_support_invariant(scene: Scene) -> bool:
    return all(o.layer == 0 or supporters(scene, o) for o in scene.objects)


# -- serialization -----------------------------------------------------------


def scene_to_text(scene: Scene) -> str:
    header = {
        "schema": SCHEMA,
        "kind": "scene",
        "scenario": scene.scenario.value,
        "bin": [mm(scene.bin.width), mm(scene.bin.height)],
        "seed": int(scene.seed),
        "count": len(scene),
    }
    lines = [encode(header)]
    for o in scene.objects:
        lines.append(
            encode(
                {
                    "kind": "object",
                    "id": o.id,
                    "label": o.spec.label,
                    "x": mm(o.x),
                    "y": mm(o.y),
                    "yaw": Fixed(o.yaw, 6),
                    "layer": o.layer,
                }
            )
        )
    return "\n".join(lines) + "\n"


def scene_from_text(text: str) -> Scene:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise IngestError("empty scene document", row=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc.msg}", row=1) from None
    if header.get("schema") != SCHEMA or header.get("kind") != "scene":
        raise IngestError(f"expected a {SCHEMA} scene header", row=1, field="schema")
    objects = []
    for n, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
            spec = catalog_lookup(rec["label"])
        except CatalogError as exc:
            raise IngestError(str(exc), row=n, field="label") from None
        except KeyError as exc:
            raise IngestError("missing value", row=n, field=str(exc.args[0])) from None
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc.msg}", row=n) from None
        try:
            objects.append(
                ObjectInstance(int(rec["id"]), spec, float(rec["x"]), float(rec["y"]), float(rec["yaw"]), int(rec["layer"]))
            )
        except KeyError as exc:
            raise IngestError("missing value", row=n, field=str(exc.args[0])) from None
        except (ValueError, TypeError, json.JSONDecodeError) as exc:
            raise IngestError(str(exc), row=n) from None
    if len(objects) != header.get("count"):
        raise IngestError("object count does not match header", row=1, field="count")
    w, h = header["bin"]
    return Scene(BinRect(float(w), float(h)), Scenario(header["scenario"]), tuple(objects), int(header["seed"]))
