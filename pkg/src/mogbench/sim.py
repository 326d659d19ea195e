"""Seeded simulation of one grasp attempt and of protocol phase durations.

Durations run on a virtual clock with a tick of 1/64 s. Every timestamp and
duration is therefore an exact binary fraction: sums and differences of
them are exact in floating point, and they print exactly with six decimals,
so timing identities survive a trip through the log format bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import ObjectSpec
from .hands import GraspPose, HandModel, capacity, capture_region
from .scene import Scene

CLOCK_TICK = 1.0 / 64.0
SETTLE_WAIT = 3.0


@dataclass(frozen=True)
class TimeModel:
    t_approach_mean: float = 2.0
    t_grasp_mean: float = 3.0
    t_lift_mean: float = 1.0
    t_transfer_mean: float = 4.0
    t_sop_mean: float = 5.0
    jitter_frac: float = 0.1
    grouping_move_cost: float = 1.5

    def __post_init__(self):
        for name in ("t_approach_mean", "t_grasp_mean", "t_lift_mean", "t_transfer_mean", "t_sop_mean"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.jitter_frac < 1.0:
            raise ValueError("jitter_frac must lie in [0, 1)")
        if self.grouping_move_cost < 0:
            raise ValueError("grouping_move_cost must be non-negative")


@dataclass(frozen=True)
class PhaseTimes:
    t0: float
    t1: float
    t2: float
    t3: float
    t_a: float
    t_g: float
    t_l: float
    t_OPO: float

    @classmethod
    def from_ticks(cls, a: int, g: int, l: int) -> PhaseTimes:
        t0 = 0.0
        t1 = a * CLOCK_TICK
        t2 = (a + g) * CLOCK_TICK
        t3 = (a + g + l) * CLOCK_TICK
        return cls.from_timestamps(t0, t1, t2, t3)

    @classmethod
    def from_timestamps(cls, t0: float, t1: float, t2: float, t3: float) -> PhaseTimes:
        t_a, t_g, t_l = t1 - t0, t2 - t1, t3 - t2
        if min(t_a, t_g, t_l) < 0:
            raise ValueError("timestamps must be non-decreasing")
        return cls(t0, t1, t2, t3, t_a, t_g, t_l, t_a + t_g + t_l)

    @classmethod
    def from_durations(cls, t_a: float, t_g: float, t_l: float) -> PhaseTimes:
        """For logs that report only phase durations; timestamps start at 0."""
        if min(t_a, t_g, t_l) < 0:
            raise ValueError("phase durations must be non-negative")
        t1 = t_a
        t2 = t1 + t_g
        return cls(0.0, t1, t2, t2 + t_l, t_a, t_g, t_l, t_a + t_g + t_l)


@dataclass(frozen=True)
class GraspOutcome:
    candidates: tuple[int, ...]
    retained: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.retained)


def _ticks(mean: float, jitter: float, rng: np.random.Generator) -> int:
    u = rng.uniform(-jitter, jitter) if jitter > 0 else 0.0
    ticks = round(mean * (1.0 + u) / CLOCK_TICK)
    lo = math.ceil(mean * (1.0 - jitter) / CLOCK_TICK - 1e-9)
    hi = math.floor(mean * (1.0 + jitter) / CLOCK_TICK + 1e-9)
    if lo <= hi:
        ticks = min(max(ticks, lo), hi)
    return max(ticks, 0)


def _sample_phases(means: tuple[float, float, float], extra_grasp: float, jitter: float, rng) -> PhaseTimes:
    a = _ticks(means[0], jitter, rng)
    g = _ticks(means[1], jitter, rng) + round(extra_grasp / CLOCK_TICK)
    l = _ticks(means[2], jitter, rng)
    return PhaseTimes.from_ticks(a, g, l)


def sample_phase_times(model: TimeModel, grouping_moves: int, rng: np.random.Generator) -> PhaseTimes:
    """Approach/grasp/lift times for one OPO round; grouping moves lengthen the grasp phase."""
    if grouping_moves < 0:
        raise ValueError("grouping_moves must be non-negative")
    means = (model.t_approach_mean, model.t_grasp_mean, model.t_lift_mean)
    return _sample_phases(means, grouping_moves * model.grouping_move_cost, model.jitter_frac, rng)


def sop_phase_means(model: TimeModel) -> tuple[float, float, float]:
    """Split the single-object pick time across phases in the OPO proportions.

    The approach and grasp parts are rounded to whole ticks and the lift
    takes the rest, so the three always add back up to ``t_sop_mean``.
    """
    total = model.t_approach_mean + model.t_grasp_mean + model.t_lift_mean
    a = round(model.t_sop_mean * model.t_approach_mean / total / CLOCK_TICK) * CLOCK_TICK
    g = round(model.t_sop_mean * model.t_grasp_mean / total / CLOCK_TICK) * CLOCK_TICK
    return a, g, model.t_sop_mean - a - g


def sample_sop_phase_times(model: TimeModel, rng: np.random.Generator) -> PhaseTimes:
    return _sample_phases(sop_phase_means(model), 0.0, model.jitter_frac, rng)


def sample_transfer_time(model: TimeModel, rng: np.random.Generator) -> float:
    """Transfer to the target bin plus the return to the start position."""
    return _ticks(model.t_transfer_mean, model.jitter_frac, rng) * CLOCK_TICK


def candidate_ids(scene: Scene, hand: HandModel, pose: GraspPose) -> list[int]:
    """Objects under the capture region that lie within the hand's digging depth."""
    if not len(scene):
        return []
    xy = scene.xy()
    inside = capture_region(hand, pose).contains(xy[:, 0], xy[:, 1])
    if not inside.any():
        return []
    layers = scene.layers()
    floor = layers[inside].max() - (hand.max_layers - 1)
    keep = inside & (layers >= floor)
    ids = scene.ids
    return sorted(ids[i] for i in np.flatnonzero(keep))


def simulate_grasp(
    scene: Scene,
    hand: HandModel,
    pose: GraspPose,
    rng: np.random.Generator,
    spec: ObjectSpec | None = None,
) -> GraspOutcome:
    cands = candidate_ids(scene, hand, pose)
    if not cands:
        return GraspOutcome((), ())
    spec = spec or scene.spec
    if spec is None:
        raise ValueError("mixed-object scenes need an explicit spec for capacity")
    cap = capacity(hand, spec)
    if len(cands) <= cap:
        provisional = cands
    else:
        size = min(max(cap + int(rng.integers(-1, 2)), 0), len(cands))
        picked = rng.choice(len(cands), size=size, replace=False)
        provisional = sorted(cands[i] for i in picked)
    slipped = rng.random(len(provisional)) < hand.slip_prob
    retained = tuple(i for i, s in zip(provisional, slipped) if not s)
    return GraspOutcome(tuple(cands), retained)
