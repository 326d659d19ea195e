"""Baseline grasp planners.

Surface scenes follow the cluster-and-sweep strategy: size-constrained
k-means groups nearby objects, a hand rectangle is swept in orientation over
each cluster centroid, and if no cluster can be covered without touching an
outsider the K closest objects are dragged together first. Pile scenes use
a grid search over hand poses.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .catalog import ObjectSpec
from .errors import EmptySceneError, IncapableHandError, InsufficientObjectsError, PlanningError
from .hands import DiscFootprint, GraspPose, HandModel, capacity
from .scene import Scenario, Scene, move_object
from .sim import candidate_ids

MAX_KMEANS_ITER = 100
GATHER_FRACTION = 0.4
EXHAUSTIVE_GROUP_LIMIT = 15
# fine sweep used when no coarse orientation fits (0.05 degree steps)
REFINE_YAWS = 3600


@dataclass(frozen=True)
class Cluster:
    member_ids: tuple[int, ...]
    centroid: tuple[float, float]

    def __len__(self) -> int:
        return len(self.member_ids)


@dataclass(frozen=True)
class GraspPlan:
    pose: GraspPose
    target_ids: tuple[int, ...]
    grouping_moves: tuple[tuple[int, tuple[float, float]], ...] = ()
    expected_count: int = 0


class CountPolicyKind(str, Enum):
    GREEDY = "greedy"
    CONSERVATIVE = "conservative"
    FIXED = "fixed"


@dataclass(frozen=True)
class CountPolicy:
    kind: CountPolicyKind = CountPolicyKind.GREEDY
    p: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CountPolicyKind(self.kind))
        if self.kind is CountPolicyKind.FIXED and (self.p is None or self.p < 1):
            raise ValueError("fixed count policy needs p >= 1")


@dataclass(frozen=True)
class PlannerConfig:
    planner: str = "auto"  # auto | cluster | grid
    count_policy: CountPolicy = field(default_factory=CountPolicy)
    grid_spacing: float = 10.0
    grid_yaws: int = 8
    feasibility_yaws: int = 180
    refine_yaws: int = REFINE_YAWS
    kmeans_restarts: int = 4

    def __post_init__(self):
        if self.planner not in ("auto", "cluster", "grid"):
            raise ValueError(f"unknown planner {self.planner!r}")
        if not self.grid_spacing > 0 or self.grid_yaws < 1 or self.feasibility_yaws < 1 or self.refine_yaws < 0 or self.kmeans_restarts < 1:
            raise ValueError("planner parameters must be positive")


# -- clustering --------------------------------------------------------------


def _sorted_objects(scene: Scene):
    objs = sorted(scene.objects, key=lambda o: o.id)
    ids = [o.id for o in objs]
    xy = np.array([[o.x, o.y] for o in objs], dtype=float).reshape(-1, 2)
    return ids, xy


def _kmeans_pp(xy: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    n = len(xy)
    centers = [xy[int(rng.integers(n))]]
    for _ in range(1, m):
        d2 = ((xy[:, None, :] - np.array(centers)[None, :, :]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        idx = int(rng.choice(n, p=d2 / total)) if total > 0 else int(rng.integers(n))
        centers.append(xy[idx])
    return np.array(centers)


def _constrained_assign(xy: np.ndarray, centers: np.ndarray, caps: list[int]) -> np.ndarray:
    """Greedy fill: walk (object, cluster) pairs by increasing distance and
    assign while the object is free and the cluster has room."""
    n, m = len(xy), len(centers)
    d2 = ((xy[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    obj = np.repeat(np.arange(n), m)
    clu = np.tile(np.arange(m), n)
    order = np.lexsort((clu, obj, d2.ravel()))
    labels = np.full(n, -1, dtype=np.int64)
    room = list(caps)
    left = n
    for t in order:
        i, j = obj[t], clu[t]
        if labels[i] < 0 and room[j] > 0:
            labels[i] = j
            room[j] -= 1
            left -= 1
            if not left:
                break
    return labels


def constrained_kmeans(scene: Scene, K: int, seed: int = 0, restarts: int = 4) -> list[Cluster]:
    """Partition the scene into floor(n/K) clusters of exactly K objects plus
    at most one cluster holding the n mod K leftovers.

    Lloyd iterations with the size-constrained greedy assignment run from
    ``restarts`` k-means++ seedings; the lowest within-cluster sum of
    squares wins. Clusters are returned ordered by their smallest member id.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = len(scene)
    if n < K:
        raise InsufficientObjectsError(f"need at least {K} objects, scene has {n}")
    ids, xy = _sorted_objects(scene)
    m = math.ceil(n / K)
    caps = [K] * m
    if n % K:
        caps[-1] = n % K
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, math.inf
    for _ in range(restarts):
        centers = _kmeans_pp(xy, m, rng)
        labels = None
        for _ in range(MAX_KMEANS_ITER):
            new = _constrained_assign(xy, centers, caps)
            if labels is not None and np.array_equal(new, labels):
                break
            labels = new
            centers = np.array([xy[labels == j].mean(axis=0) for j in range(m)])
        inertia = float(((xy - centers[labels]) ** 2).sum())
        if inertia < best_inertia - 1e-9:
            best_labels, best_inertia = labels, inertia
    clusters = []
    for j in range(m):
        idx = np.flatnonzero(best_labels == j)
        members = tuple(ids[i] for i in idx)
        c = xy[idx].mean(axis=0)
        clusters.append(Cluster(members, (float(c[0]), float(c[1]))))
    clusters.sort(key=lambda c: c.member_ids[0])
    return clusters


def cluster_of(scene: Scene, member_ids) -> Cluster:
    members = tuple(sorted(member_ids))
    pts = np.array([scene.get(i).position for i in members], dtype=float)
    c = pts.mean(axis=0)
    return Cluster(members, (float(c[0]), float(c[1])))


# -- feasibility -------------------------------------------------------------


def feasibility_check(
    cluster: Cluster, hand: HandModel, scene: Scene, n_yaw: int = 180, refine_yaws: int = REFINE_YAWS
) -> GraspPose | None:
    """First hand orientation over the cluster centroid that covers every
    member center and no other object center, or None.

    The ``n_yaw`` coarse samples are tried first. When none qualifies and
    ``refine_yaws`` is positive, a finer sweep catches feasible orientation
    windows narrower than the coarse step.
    """
    members = set(cluster.member_ids)
    mxy = np.array([scene.get(i).position for i in cluster.member_ids], dtype=float).reshape(-1, 2)
    oxy = np.array([o.position for o in scene.objects if o.id not in members], dtype=float).reshape(-1, 2)
    cx, cy = cluster.centroid
    fp = hand.footprint
    if isinstance(fp, DiscFootprint):
        inside = kernels.in_disc_mask(mxy[:, 0], mxy[:, 1], cx, cy, fp.radius)
        outside = kernels.in_disc_mask(oxy[:, 0], oxy[:, 1], cx, cy, fp.radius)
        return GraspPose(cx, cy, 0.0) if inside.all() and not outside.any() else None
    mx, my = np.ascontiguousarray(mxy[:, 0]), np.ascontiguousarray(mxy[:, 1])
    ox, oy = np.ascontiguousarray(oxy[:, 0]), np.ascontiguousarray(oxy[:, 1])
    for n in (n_yaw, refine_yaws) if refine_yaws and refine_yaws > n_yaw else (n_yaw,):
        cos_arr, sin_arr = kernels.yaw_samples(n)
        k = kernels.first_feasible_yaw(mx, my, ox, oy, cx, cy, cos_arr, sin_arr, fp.width / 2.0, fp.depth / 2.0)
        if k >= 0:
            return GraspPose(cx, cy, kernels.yaw_angle(k, n))
    return None


def feasible_clusters(
    scene: Scene, hand: HandModel, K: int, seed: int = 0, *, n_yaw: int = 180, restarts: int = 4, refine_yaws: int = REFINE_YAWS
):
    """(cluster, pose) pairs for every full-size cluster that passes the check."""
    out = []
    for c in constrained_kmeans(scene, K, seed, restarts):
        if len(c) != K:
            continue
        pose = feasibility_check(c, hand, scene, n_yaw, refine_yaws)
        if pose is not None:
            out.append((c, pose))
    return out


# -- grouping ----------------------------------------------------------------


def closest_group(scene: Scene, K: int) -> tuple[int, ...]:
    """The K objects with the smallest sum of pairwise distances.

    Exhaustive for up to 15 objects; beyond that each object seeds a greedy
    nearest-to-set growth and the best seed wins. Ties go to lower ids.
    """
    ids, xy = _sorted_objects(scene)
    n = len(ids)
    if n < K:
        raise InsufficientObjectsError(f"need at least {K} objects, scene has {n}")
    d = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2))
    best, best_cost = None, math.inf
    if n <= EXHAUSTIVE_GROUP_LIMIT:
        for combo in itertools.combinations(range(n), K):
            idx = np.array(combo)
            cost = d[np.ix_(idx, idx)].sum() / 2.0
            if cost < best_cost:
                best, best_cost = combo, cost
    else:
        for start in range(n):
            group = [start]
            while len(group) < K:
                rest = [j for j in range(n) if j not in group]
                add = min(rest, key=lambda j: (d[j, group].sum(), j))
                group.append(add)
            idx = np.array(sorted(group))
            cost = d[np.ix_(idx, idx)].sum() / 2.0
            if cost < best_cost:
                best, best_cost = tuple(idx), cost
    return tuple(ids[i] for i in best)


def _medoid(scene: Scene, group: tuple[int, ...]) -> int:
    pts = np.array([scene.get(i).position for i in group])
    cost = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)).sum(axis=1)
    return group[int(np.argmin(cost))]


def _find_destination(scene: Scene, obj_id: int, center: tuple[float, float], gather_r: float):
    """Closest free spot (to the object's current position) within the gather circle."""
    obj = scene.get(obj_id)
    r = obj.radius
    others = [o for o in scene.objects if o.id != obj_id]
    oxy = np.array([o.position for o in others], dtype=float).reshape(-1, 2)
    orad = np.array([o.radius for o in others], dtype=float)
    cx, cy = center
    radii = np.linspace(0.0, gather_r, 25)
    angles = np.arange(360) * (math.pi / 180.0)
    rr, aa = np.meshgrid(radii, angles, indexing="ij")
    px = (cx + rr * np.cos(aa)).ravel()
    py = (cy + rr * np.sin(aa)).ravel()
    ok = (px >= r) & (px <= scene.bin.width - r) & (py >= r) & (py <= scene.bin.height - r)
    if len(others):
        dist = np.sqrt((px[:, None] - oxy[None, :, 0]) ** 2 + (py[:, None] - oxy[None, :, 1]) ** 2)
        ok &= (dist >= orad[None, :] + r).all(axis=1)
    if not ok.any():
        return None
    drag = np.hypot(px - obj.x, py - obj.y)
    drag[~ok] = np.inf
    i = int(np.argmin(drag))
    return float(px[i]), float(py[i])


def apply_moves(scene: Scene, moves) -> Scene:
    for obj_id, (x, y) in moves:
        scene = move_object(scene, obj_id, x, y)
    return scene


def plan_grouping_moves(
    scene: Scene, hand: HandModel, K: int, seed: int = 0, *, n_yaw: int = 180, refine_yaws: int = REFINE_YAWS
) -> GraspPlan:
    """Drag the K closest objects into a tight group around their medoid.

    Every member farther than 0.4 x the hand's smallest footprint dimension
    from the medoid is moved to the nearest free spot inside that circle; the
    medoid stays put. The returned pose covers the regrouped cluster.
    ``seed`` is accepted for interface symmetry; the plan is deterministic.
    """
    if len(scene) < K:
        raise InsufficientObjectsError(f"need at least {K} objects, scene has {len(scene)}")
    if scene.scenario is not Scenario.SURFACE:
        raise PlanningError("grouping moves are only defined for surface scenes")
    group = closest_group(scene, K)
    med = _medoid(scene, group)
    center = scene.get(med).position
    gather_r = GATHER_FRACTION * hand.footprint.min_dim
    moves = []
    work = scene
    for obj_id in group:
        if obj_id == med:
            continue
        o = work.get(obj_id)
        if math.hypot(o.x - center[0], o.y - center[1]) <= gather_r:
            continue
        dest = _find_destination(work, obj_id, center, gather_r)
        if dest is None:
            raise PlanningError(f"no collision-free destination for object {obj_id} near {med}")
        moves.append((obj_id, dest))
        work = move_object(work, obj_id, *dest)
    pose = feasibility_check(cluster_of(work, group), hand, work, n_yaw, refine_yaws)
    if pose is None:
        raise PlanningError(f"regrouped objects {list(group)} still cannot be covered by the hand")
    return GraspPlan(pose, tuple(sorted(group)), tuple(moves), K)


def plan_surface_grasp(scene: Scene, hand: HandModel, p: int, seed: int = 0, config: PlannerConfig | None = None) -> GraspPlan:
    """A feasible K = p cluster if one exists, otherwise a grouping plan."""
    config = config or PlannerConfig()
    if not len(scene):
        raise EmptySceneError("scene is empty")
    K = min(p, len(scene))
    found = feasible_clusters(
        scene, hand, K, seed, n_yaw=config.feasibility_yaws, restarts=config.kmeans_restarts, refine_yaws=config.refine_yaws
    )
    if found:
        cluster, pose = found[0]
        return GraspPlan(pose, cluster.member_ids, (), K)
    return plan_grouping_moves(scene, hand, K, seed, n_yaw=config.feasibility_yaws, refine_yaws=config.refine_yaws)


# -- pile search -------------------------------------------------------------


def pile_grid(scene: Scene, hand: HandModel, spacing: float = 10.0, n_yaw: int = 8):
    gx = np.arange(0.0, scene.bin.width + 1e-9, spacing)
    gy = np.arange(0.0, scene.bin.height + 1e-9, spacing)
    if isinstance(hand.footprint, DiscFootprint):
        n_yaw = 1
    return gx, gy, n_yaw


def grid_candidate_counts(scene: Scene, hand: HandModel, spacing: float = 10.0, n_yaw: int = 8):
    gx, gy, n_yaw = pile_grid(scene, hand, spacing, n_yaw)
    cos_arr, sin_arr = kernels.yaw_samples(n_yaw)
    xy = scene.xy()
    fp = hand.footprint
    if isinstance(fp, DiscFootprint):
        hw = hd = 0.0
        disc = fp.radius
    else:
        hw, hd, disc = fp.width / 2.0, fp.depth / 2.0, 0.0
    counts = kernels.grid_counts(
        np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]), scene.layers(), gx, gy, cos_arr, sin_arr, hw, hd, disc, hand.max_layers
    )
    return counts, (gx, gy, n_yaw)


def plan_pile_grasp(scene: Scene, hand: HandModel, p: int, spacing: float = 10.0, n_yaw: int = 8) -> GraspPlan:
    """Grid pose whose candidate count is closest to ``p``.

    Ties prefer the larger count, then the lower grid index
    ``(ix * ny + iy) * n_yaw + k``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not len(scene):
        raise EmptySceneError("scene is empty")
    counts, (gx, gy, nk) = grid_candidate_counts(scene, hand, spacing, n_yaw)
    idx = np.arange(len(counts))
    best = int(np.lexsort((idx, -counts, np.abs(counts - p)))[0])
    ix, iy, k = np.unravel_index(best, (len(gx), len(gy), nk))
    pose = GraspPose(float(gx[ix]), float(gy[iy]), kernels.yaw_angle(int(k), nk))
    targets = tuple(candidate_ids(scene, hand, pose))
    return GraspPlan(pose, targets, (), int(counts[best]))


def plan_grasp(scene: Scene, hand: HandModel, p: int, seed: int = 0, config: PlannerConfig | None = None) -> GraspPlan:
    config = config or PlannerConfig()
    kind = config.planner
    if kind == "auto":
        kind = "cluster" if scene.scenario is Scenario.SURFACE else "grid"
    if kind == "cluster":
        return plan_surface_grasp(scene, hand, p, seed, config)
    return plan_pile_grasp(scene, hand, p, config.grid_spacing, config.grid_yaws)


# -- round target ------------------------------------------------------------


def select_target_count(remaining: int, hand: HandModel, spec: ObjectSpec, policy: CountPolicy | None = None) -> int:
    if remaining < 1:
        raise ValueError("remaining must be >= 1")
    policy = policy or CountPolicy()
    cap = capacity(hand, spec)
    if cap == 0:
        raise IncapableHandError(f"{hand.kind.value} cannot hold a single {spec.label}")
    if policy.kind is CountPolicyKind.GREEDY:
        return min(cap, remaining)
    if policy.kind is CountPolicyKind.CONSERVATIVE:
        return min(max(cap - 1, 1), remaining)
    return min(policy.p, remaining)
