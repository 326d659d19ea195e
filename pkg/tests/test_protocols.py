from __future__ import annotations

from dataclasses import replace

import pytest

from mogbench.catalog import catalog_lookup
from mogbench.errors import EmptySceneError, InsufficientObjectsError
from mogbench.hands import builtin_hand
from mogbench.protocols import (
    STALL_ROUNDS,
    BenchmarkEnv,
    SceneFactory,
    derive_seed,
    ledger_total,
    run_apt,
    run_apt_repeated,
    run_availability,
    run_opo,
    run_pta,
    run_pta_repeated,
    run_sop_calibration,
    sop_calibration,
)
from mogbench.scene import BinRect, Scenario
from mogbench.sim import TimeModel

from conftest import make_scene

CROSS = [(0, 0), (36, 0), (-36, 0), (0, 36), (0, -36)]


def fixed_scene_env(scene, hand, **kw):
    return BenchmarkEnv(lambda seed: scene, hand, spec=scene.objects[0].spec if len(scene) else catalog_lookup("cube_s_r"), **kw)


def default_env(**kw):
    return BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s")), builtin_hand("trifinger"), **kw)


class TestEnv:
    def test_validation(self):
        with pytest.raises(ValueError):
            default_env(trial_count=0)
        with pytest.raises(ValueError):
            default_env(max_rounds=0)

    def test_spec_from_factory(self):
        assert default_env().spec.label == "cube_m_s"

    def test_seed_paths_differ(self):
        assert derive_seed(0, 1, 2) != derive_seed(0, 1, 3) != derive_seed(1, 1, 2)
        assert derive_seed(5, 4) == derive_seed(5, 4)


class TestOPO:
    def test_record_count(self):
        assert len(run_opo(default_env(trial_count=100), 2)) == 100

    def test_exact_when_capacity_suffices(self, soft_hand):
        hand = replace(soft_hand, slip_prob=0.0)
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_s_r"), 12, Scenario.SURFACE), hand, trial_count=60)
        recs = run_opo(env, 2)
        assert all(r.q == 2 and not r.failed for r in recs)

    def test_fresh_scene_per_trial(self):
        recs = run_opo(default_env(trial_count=10), 2)
        assert len({r.scene_seed for r in recs}) == 10

    def test_reproducible(self):
        assert run_opo(default_env(trial_count=20, master_seed=3), 3) == run_opo(default_env(trial_count=20, master_seed=3), 3)

    def test_parallel_equals_sequential(self):
        env = default_env(trial_count=16, master_seed=8)
        assert run_opo(env, 2, jobs=2) == run_opo(env, 2)

    def test_trend(self):
        env = default_env(trial_count=300)
        ok2 = sum(r.q == 2 for r in run_opo(env, 2))
        ok4 = sum(r.q == 4 for r in run_opo(env, 4))
        assert ok2 >= ok4

    def test_planning_failure_is_recorded(self):
        hand = replace(builtin_hand("parallel_gripper"), slip_prob=0.0)
        scene = make_scene([(50, 50), (350, 350), (50, 350)])
        recs = run_opo(fixed_scene_env(scene, hand, trial_count=3), 2)
        assert all(r.q == 0 and r.failure.startswith("planning:") for r in recs)
        assert all(r.phase.t_OPO == r.phase.t_a + r.phase.t_g + r.phase.t_l for r in recs)

    def test_bad_target(self):
        with pytest.raises(ValueError):
            run_opo(default_env(), 0)


class TestAPT:
    def test_capacity_three_trace(self, exact_soft_hand):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_s_r"), 12, Scenario.SURFACE), exact_soft_hand)
        run = run_apt(env, 5)
        assert [e.record.q for e in run.rounds] == [3, 2]
        assert run.m_OPO == 2 and run.delivered == 5 and run.completed and run.excess_returns == 0

    def test_overshoot_costs_one_return(self):
        hand = replace(builtin_hand("trifinger"), capacity_override=3, slip_prob=0.0)
        scene = make_scene([(100, 100)] * 3 + [(300, 300)], scenario=Scenario.PILE)
        run = run_apt(fixed_scene_env(scene, hand), 2)
        assert [e.record.q for e in run.rounds] == [3]
        assert run.excess_returns == 1 and run.delivered == 2 and run.completed
        (ret,) = run.excess
        assert ret.record.protocol == "SOP"
        base = run.rounds[0].record.phase.t_OPO + run.rounds[0].t_transfer
        assert run.t_total == base + ret.record.phase.t_OPO + ret.t_transfer

    def test_single_object_target_is_sop(self):
        run = run_apt(default_env(), 1)
        assert [(e.record.protocol, e.record.q) for e in run.rounds] == [("SOP", 1)]

    def test_round_cap(self, exact_soft_hand):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_s_r"), 12, Scenario.SURFACE), exact_soft_hand, max_rounds=1)
        run = run_apt(env, 5)
        assert not run.completed and run.flag == "max_rounds" and run.delivered == 3

    def test_not_enough_objects(self):
        with pytest.raises(InsufficientObjectsError):
            run_apt(BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s"), 3), builtin_hand("trifinger")), 5)

    def test_ledger_exact(self):
        for run in run_apt_repeated(default_env(trial_count=30), 10):
            total = 0.0
            for e in (*run.rounds, *run.excess):
                total += e.record.phase.t_OPO + e.t_transfer
            assert run.t_total == total == ledger_total(run.rounds, run.excess)

    def test_conservation(self):
        for N in (5, 10):
            for run in run_apt_repeated(default_env(trial_count=40, master_seed=N), N):
                assert run.completed and run.picked - run.excess_returns == N

    def test_parallel_equals_sequential(self):
        env = default_env(trial_count=8, master_seed=2)
        assert run_apt_repeated(env, 5, jobs=2) == run_apt_repeated(env, 5)


class TestPTA:
    def test_single_object(self):
        run = run_pta(fixed_scene_env(make_scene([(200, 200)], scenario=Scenario.PILE), builtin_hand("trifinger")))
        assert [(e.record.protocol, e.record.q) for e in run.rounds] == [("SOP", 1)]
        assert run.completed and run.delivered == 1

    def test_capacity_five_two_rounds(self, soft_hand):
        hand = replace(soft_hand, capacity_override=5, slip_prob=0.0)
        pts = [(100 + x, 100 + y) for x, y in CROSS] + [(300 + x, 300 + y) for x, y in CROSS]
        run = run_pta(fixed_scene_env(make_scene(pts), hand))
        assert run.m_OPO == 2 and [e.record.q for e in run.rounds] == [5, 5] and run.completed

    def test_retained_objects_leave_the_bin(self):
        run = run_pta(default_env(master_seed=4))
        taken = [i for e in run.rounds for i in e.record.retained]
        assert len(taken) == len(set(taken)) == run.initial_count

    def test_stall(self):
        hand = replace(builtin_hand("parallel_gripper"), capacity_override=2, slip_prob=0.0)
        run = run_pta(fixed_scene_env(make_scene([(50, 50), (350, 350), (50, 350)]), hand))
        assert run.flag == "stall" and not run.completed and run.m_OPO == STALL_ROUNDS

    def test_empty_scene(self):
        with pytest.raises(EmptySceneError):
            run_pta(BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s"), 0), builtin_hand("trifinger")))

    def test_conservation(self):
        for run in run_pta_repeated(default_env(trial_count=40)):
            assert run.completed and run.picked == run.initial_count
            assert run.t_total == ledger_total(run.rounds)

    def test_product_form_matches_homogeneous_ledger(self):
        tm = TimeModel(jitter_frac=0.0)
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s"), 8), builtin_hand("trifinger"), time_model=tm)
        run = run_pta(env)
        if all(e.record.protocol != "SOP" for e in run.rounds):
            assert run.t_product == pytest.approx(run.t_total)


class TestCalibration:
    def test_no_jitter(self):
        env = default_env(time_model=TimeModel(jitter_frac=0.0))
        assert run_sop_calibration(env, 10) == 5.0 + 4.0
        assert sop_calibration(env, 10).t_SOG == 5.0

    def test_law_of_large_numbers(self):
        assert run_sop_calibration(default_env(), 1000) == pytest.approx(9.0, rel=0.02)

    def test_reproducible(self):
        assert sop_calibration(default_env(master_seed=7), 50) == sop_calibration(default_env(master_seed=7), 50)

    def test_bad_trials(self):
        with pytest.raises(ValueError):
            sop_calibration(default_env(), 0)


def test_availability_records():
    env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_s_r"), 12, Scenario.SURFACE, BinRect()), builtin_hand("soft_hand"))
    recs = run_availability(env, 3, scenes=10)
    assert len(recs) == 10 and all(r.object_count == 12 for r in recs)
    assert all(r.available == (r.feasible_clusters > 0) for r in recs)
