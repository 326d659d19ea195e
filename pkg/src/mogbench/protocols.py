"""OPO, APT and PTA benchmark procedures with full timing ledgers.

Every stochastic choice draws from a generator seeded by
``derive_seed(master_seed, protocol stream, repetition, ...)``, so any
single trial or run can be reproduced on its own and repetitions can run in
any order (or in parallel) with identical results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .catalog import ObjectSpec
from .errors import EmptySceneError, InsufficientObjectsError, PlanningError
from .hands import HandModel
from .planners import PlannerConfig, apply_moves, feasible_clusters, plan_grasp, select_target_count
from .scene import BinRect, Scenario, Scene, generate_scene, remove_objects
from .sim import (
    SETTLE_WAIT,
    PhaseTimes,
    TimeModel,
    sample_phase_times,
    sample_sop_phase_times,
    sample_transfer_time,
    simulate_grasp,
)

STREAMS = {"OPO": 1, "APT": 2, "PTA": 3, "SOP": 4, "AR": 5}

STALL_ROUNDS = 10


def derive_seed(*keys: int) -> int:
    """64-bit seed derived from a key path such as (master, stream, trial)."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SceneFactory:
    spec: ObjectSpec
    count: int = 20
    scenario: Scenario = Scenario.PILE
    bin: BinRect = field(default_factory=BinRect)

    def __call__(self, seed: int) -> Scene:
        return generate_scene(self.spec, self.count, self.scenario, self.bin, seed)


@dataclass(frozen=True)
class BenchmarkEnv:
    scene_factory: Callable[[int], Scene]
    hand: HandModel
    time_model: TimeModel = field(default_factory=TimeModel)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    trial_count: int = 100
    max_rounds: int = 50
    master_seed: int = 0
    spec: ObjectSpec | None = None

    def __post_init__(self):
        if self.trial_count < 1 or self.max_rounds < 1:
            raise ValueError("trial_count and max_rounds must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if self.spec is None:
            spec = getattr(self.scene_factory, "spec", None)
            if spec is None:
                raise ValueError("spec is required when the scene factory does not expose one")
            object.__setattr__(self, "spec", spec)

    def seed(self, stream: str, *keys: int) -> int:
        return derive_seed(self.master_seed, STREAMS[stream], *keys)


@dataclass(frozen=True)
class TrialRecord:
    protocol: str  # OPO | APT_round | PTA_round | SOP
    target_p: int
    q: int
    phase: PhaseTimes | None
    settle_wait: float = SETTLE_WAIT
    grouping_moves_used: int = 0
    scene_seed: int | None = None
    trial_seed: int | None = None
    retained: tuple[int, ...] = ()
    failure: str | None = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass(frozen=True)
class RoundEntry:
    record: TrialRecord
    t_transfer: float | None


def ledger_total(rounds, excess=()) -> float | None:
    """Sum of (t_OPO + t_transfer) over rounds then excess returns, in order."""
    total = 0.0
    for entry in (*rounds, *excess):
        if entry.record.phase is None or entry.t_transfer is None:
            return None
        total += entry.record.phase.t_OPO + entry.t_transfer
    return total


@dataclass(frozen=True)
class ProtocolRunResult:
    protocol: str  # APT | PTA
    N_target: int | None
    initial_count: int
    rounds: tuple[RoundEntry, ...]
    excess: tuple[RoundEntry, ...] = ()
    completed: bool = True
    flag: str | None = None  # max_rounds | stall

    @property
    def m_OPO(self) -> int:
        return len(self.rounds)

    @property
    def excess_returns(self) -> int:
        return len(self.excess)

    @property
    def picked(self) -> int:
        return sum(e.record.q for e in self.rounds)

    @property
    def delivered(self) -> int:
        return self.picked - self.excess_returns

    @property
    def k(self) -> int:
        """Objects the run was asked to move."""
        return self.N_target if self.protocol == "APT" else self.initial_count

    @property
    def t_total(self) -> float | None:
        return ledger_total(self.rounds, self.excess)

    @property
    def t_product(self) -> float | None:
        """m_OPO * (mean t_OPO + mean t_transfer), the homogeneous-round form."""
        if not self.rounds or self.t_total is None:
            return None
        n = len(self.rounds)
        mean_opo = sum(e.record.phase.t_OPO for e in self.rounds) / n
        mean_tr = sum(e.t_transfer for e in self.rounds) / n
        return n * (mean_opo + mean_tr)


# -- single rounds -----------------------------------------------------------


def _grasp_round(env: BenchmarkEnv, scene: Scene, p: int, kind: str, scene_seed: int, trial_seed: int):
    rng = np.random.default_rng(trial_seed)
    plan_seed = int(rng.integers(2**63))
    try:
        plan = plan_grasp(scene, env.hand, p, plan_seed, env.planner)
    except (PlanningError, InsufficientObjectsError, EmptySceneError) as exc:
        phase = sample_phase_times(env.time_model, 0, rng)
        rec = TrialRecord(kind, p, 0, phase, scene_seed=scene_seed, trial_seed=trial_seed, failure=f"{exc.code}: {exc}")
        return rec, scene
    work = apply_moves(scene, plan.grouping_moves)
    phase = sample_phase_times(env.time_model, len(plan.grouping_moves), rng)
    outcome = simulate_grasp(work, env.hand, plan.pose, rng, env.spec)
    rec = TrialRecord(
        kind,
        p,
        outcome.q,
        phase,
        grouping_moves_used=len(plan.grouping_moves),
        scene_seed=scene_seed,
        trial_seed=trial_seed,
        retained=outcome.retained,
    )
    return rec, remove_objects(work, outcome.retained)


def _sop_round(env: BenchmarkEnv, scene: Scene, scene_seed: int | None, trial_seed: int):
    """Single-object pick; the single-object baseline is taken to be perfect."""
    rng = np.random.default_rng(trial_seed)
    phase = sample_sop_phase_times(env.time_model, rng)
    if not len(scene):
        return TrialRecord("SOP", 1, 0, phase, scene_seed=scene_seed, trial_seed=trial_seed), scene
    top = max(scene.objects, key=lambda o: (o.layer, -o.id))
    rec = TrialRecord("SOP", 1, 1, phase, scene_seed=scene_seed, trial_seed=trial_seed, retained=(top.id,))
    return rec, remove_objects(scene, [top.id])


# -- procedures --------------------------------------------------------------


def opo_trial(env: BenchmarkEnv, p: int, index: int) -> TrialRecord:
    scene_seed = env.seed("OPO", index, 0)
    scene = env.scene_factory(scene_seed)
    rec, _ = _grasp_round(env, scene, p, "OPO", scene_seed, env.seed("OPO", index, 1))
    return rec


def run_opo(env: BenchmarkEnv, p: int, jobs: int = 1) -> list[TrialRecord]:
    """One OPO attempt at target ``p`` per trial, each on a fresh scene."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return _map(opo_trial, env, [(p, i) for i in range(env.trial_count)], jobs)


def _round(env: BenchmarkEnv, scene: Scene, p: int, kind: str, scene_seed: int, trial_seed: int):
    if p == 1:
        return _sop_round(env, scene, scene_seed, trial_seed)
    return _grasp_round(env, scene, p, kind, scene_seed, trial_seed)


def run_apt(env: BenchmarkEnv, N_target: int, repetition: int = 0) -> ProtocolRunResult:
    """Deliver exactly ``N_target`` objects; overshoot is picked back one by one."""
    if N_target < 1:
        raise ValueError("N_target must be >= 1")
    scene_seed = env.seed("APT", repetition, 0)
    scene = env.scene_factory(scene_seed)
    if len(scene) < N_target:
        raise InsufficientObjectsError(f"source bin holds {len(scene)} objects, N_target is {N_target}")
    initial = len(scene)
    tm = env.time_model
    remaining = N_target
    rounds: list[RoundEntry] = []
    excess: list[RoundEntry] = []
    while remaining > 0 and len(rounds) < env.max_rounds:
        r = len(rounds)
        p = min(select_target_count(remaining, env.hand, env.spec, env.planner.count_policy), len(scene))
        trial_seed = env.seed("APT", repetition, 1, r)
        rec, scene = _round(env, scene, p, "APT_round", scene_seed, trial_seed)
        t_tr = sample_transfer_time(tm, np.random.default_rng(env.seed("APT", repetition, 2, r)))
        rounds.append(RoundEntry(rec, t_tr))
        remaining -= rec.q
        if remaining < 0:
            for j in range(-remaining):
                seed = env.seed("APT", repetition, 3, r, j)
                rng = np.random.default_rng(seed)
                phase = sample_sop_phase_times(tm, rng)
                ret = TrialRecord("SOP", 1, 1, phase, scene_seed=scene_seed, trial_seed=seed)
                excess.append(RoundEntry(ret, sample_transfer_time(tm, rng)))
            remaining = 0
    completed = remaining == 0
    return ProtocolRunResult(
        "APT", N_target, initial, tuple(rounds), tuple(excess), completed, None if completed else "max_rounds"
    )


def run_pta(env: BenchmarkEnv, repetition: int = 0) -> ProtocolRunResult:
    """Empty the source bin."""
    scene_seed = env.seed("PTA", repetition, 0)
    scene = env.scene_factory(scene_seed)
    if not len(scene):
        raise EmptySceneError("source scene is empty")
    initial = len(scene)
    tm = env.time_model
    rounds: list[RoundEntry] = []
    flag = None
    zero_streak = 0
    while len(scene) and len(rounds) < env.max_rounds:
        r = len(rounds)
        p = select_target_count(len(scene), env.hand, env.spec, env.planner.count_policy)
        rec, scene = _round(env, scene, p, "PTA_round", scene_seed, env.seed("PTA", repetition, 1, r))
        t_tr = sample_transfer_time(tm, np.random.default_rng(env.seed("PTA", repetition, 2, r)))
        rounds.append(RoundEntry(rec, t_tr))
        zero_streak = zero_streak + 1 if rec.q == 0 else 0
        if zero_streak >= STALL_ROUNDS:
            flag = "stall"
            break
    completed = not len(scene)
    if not completed and flag is None:
        flag = "max_rounds"
    return ProtocolRunResult("PTA", None, initial, tuple(rounds), (), completed, flag)


def run_apt_repeated(env: BenchmarkEnv, N_target: int, jobs: int = 1) -> list[ProtocolRunResult]:
    return _map(run_apt, env, [(N_target, i) for i in range(env.trial_count)], jobs)


def run_pta_repeated(env: BenchmarkEnv, jobs: int = 1) -> list[ProtocolRunResult]:
    return _map(run_pta, env, [(i,) for i in range(env.trial_count)], jobs)


@dataclass(frozen=True)
class SopCalibration:
    """Single-object baseline times, kept as exact sums over ``trials``."""

    pick_sum: float
    full_sum: float
    trials: int

    @property
    def t_sopt(self) -> float:
        """Mean pick + transfer time."""
        return self.full_sum / self.trials

    @property
    def t_SOG(self) -> float:
        """Mean pick-only time."""
        return self.pick_sum / self.trials


def sop_calibration(env: BenchmarkEnv, trials: int) -> SopCalibration:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pick_sum = 0.0
    full_sum = 0.0
    for i in range(trials):
        rng = np.random.default_rng(env.seed("SOP", i))
        pick = sample_sop_phase_times(env.time_model, rng).t_OPO
        pick_sum += pick
        full_sum += pick + sample_transfer_time(env.time_model, rng)
    return SopCalibration(pick_sum, full_sum, trials)


def run_sop_calibration(env: BenchmarkEnv, trials: int) -> float:
    """Mean single-object pick-and-transfer time, t_sopt."""
    return sop_calibration(env, trials).t_sopt


def _call(args):
    fn, env, extra = args
    return fn(env, *extra)


def _map(fn, env: BenchmarkEnv, arglist, jobs: int):
    if jobs <= 1:
        return [fn(env, *extra) for extra in arglist]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_call, [(fn, env, extra) for extra in arglist], chunksize=max(1, len(arglist) // (4 * jobs))))


@dataclass(frozen=True)
class AvailabilityRecord:
    scene_seed: int
    object_count: int
    feasible_clusters: int

    @property
    def available(self) -> bool:
        return self.feasible_clusters > 0


def run_availability(env: BenchmarkEnv, k: int, scenes: int | None = None) -> list[AvailabilityRecord]:
    """Check ``scenes`` fresh scenes (default: env.trial_count) for a graspable k-cluster."""
    out = []
    for i in range(env.trial_count if scenes is None else scenes):
        scene_seed = env.seed("AR", i, 0)
        scene = env.scene_factory(scene_seed)
        found = []
        if len(scene) >= k:
            found = feasible_clusters(
                scene,
                env.hand,
                k,
                env.seed("AR", i, 1),
                n_yaw=env.planner.feasibility_yaws,
                restarts=env.planner.kmeans_restarts,
                refine_yaws=env.planner.refine_yaws,
            )
        out.append(AvailabilityRecord(scene_seed, len(scene), len(found)))
    return out


@dataclass(frozen=True)
class RunLog:
    """Everything one CLI run produces, in memory; the log file is its serialization."""

    protocol: str  # opo | apt | pta | sop-calibrate | ar
    master_seed: int | None = None
    config_digest: str = ""
    config: dict | None = None
    source: str = "native"
    trials: tuple[TrialRecord, ...] = ()
    runs: tuple[ProtocolRunResult, ...] = ()
    calibration: SopCalibration | None = None
    availability: tuple[AvailabilityRecord, ...] = ()
    target: int | None = None
