from __future__ import annotations

import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mogbench.catalog import catalog_lookup
from mogbench.errors import CalibrationError, EmptyInputError, IngestError
from mogbench.hands import builtin_hand
from mogbench.metrics import (
    MetricsReport,
    TrialSet,
    availability_rate,
    cgpu,
    cgpu_adjusted,
    cgpu_simplified,
    cgpu_with_overhead,
    overall_success_rate,
    picking_accuracy,
    summarize,
)
from mogbench.protocols import BenchmarkEnv, RunLog, SceneFactory, TrialRecord, run_apt, run_opo, run_pta, sop_calibration
from mogbench.scene import Scenario

from conftest import make_scene

outcome_lists = st.lists(st.integers(0, 8), min_size=1, max_size=60)


class TestPickingAccuracy:
    def test_perfect(self):
        assert picking_accuracy(TrialSet((3, 3, 3), 3)) == 0.0

    def test_small_example(self):
        assert picking_accuracy(TrialSet((2, 3, 2, 1), 2)) == pytest.approx(math.sqrt(2 / 4), abs=1e-12)
        assert picking_accuracy(TrialSet((2, 3, 2, 1), 2)) == pytest.approx(0.70711, abs=1e-5)

    def test_reported_rmse(self):
        # 60 trials one off the target, 40 on it: squared-error sum 60
        outcomes = (1,) * 30 + (3,) * 30 + (2,) * 40
        assert picking_accuracy(TrialSet(outcomes, 2)) == pytest.approx(0.7746, abs=1e-4)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            picking_accuracy(TrialSet((), 2))

    @settings(max_examples=200)
    @given(outcomes=outcome_lists, target=st.integers(1, 8), shift=st.integers(-5, 5), data=st.data())
    def test_invariances(self, outcomes, target, shift, data):
        pa = picking_accuracy(TrialSet(tuple(outcomes), target))
        perm = data.draw(st.permutations(outcomes))
        assert picking_accuracy(TrialSet(tuple(perm), target)) == pytest.approx(pa, rel=1e-12, abs=1e-15)
        moved = TrialSet(tuple(o + shift for o in outcomes), target + shift)
        assert picking_accuracy(moved) == pytest.approx(pa, rel=1e-12, abs=1e-15)
        assert (pa == 0) == (overall_success_rate(TrialSet(tuple(outcomes), target)) == 1)


class TestSuccessRate:
    def test_all(self):
        assert overall_success_rate(TrialSet((2, 2), 2)) == 1.0

    def test_reported_rate(self):
        assert overall_success_rate(TrialSet((2,) * 13 + (1,) * 3, 2)) == 0.8125

    def test_none(self):
        assert overall_success_rate(TrialSet((1,) * 7, 2)) == 0.0

    def test_exact_match_only(self):
        assert overall_success_rate(TrialSet((3, 4), 2)) == 0.0

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            overall_success_rate(TrialSet((), 1))

    @given(outcomes=outcome_lists, target=st.integers(0, 8))
    def test_range(self, outcomes, target):
        ts = TrialSet(tuple(outcomes), target)
        assert 0.0 <= overall_success_rate(ts) <= 1.0
        assert 0 <= ts.N_success <= ts.N_total


class TestCGPU:
    def test_two_rounds_five_objects(self):
        assert cgpu_simplified(2, 5) == 0.4

    def test_one_per_round(self):
        assert cgpu_simplified(7, 7) == 1.0

    def test_zero_k(self):
        with pytest.raises(ZeroDivisionError):
            cgpu_simplified(3, 0)

    def test_time_form(self):
        assert cgpu(50.0, 5, 10.0) == 1.0
        assert cgpu(0.4 * 5 * 10.0, 5, 10.0) == pytest.approx(0.4)

    @pytest.mark.parametrize("t_sopt", [0.0, -1.0])
    def test_bad_calibration(self, t_sopt):
        with pytest.raises(CalibrationError):
            cgpu(10.0, 2, t_sopt)

    def test_overhead(self):
        assert cgpu_with_overhead(0.4, 0.0) == 0.4
        assert cgpu_with_overhead(0.4, 0.25) == pytest.approx(0.5)
        assert cgpu_with_overhead(0.4, 1.0) == 0.8

    def test_adjusted(self):
        assert cgpu_adjusted(0.4, 6.0, 6.0) == 0.4
        assert cgpu_adjusted(0.4, 9.0, 6.0) == pytest.approx(0.6)
        with pytest.raises(CalibrationError):
            cgpu_adjusted(0.4, 9.0, 0.0)

    @pytest.mark.parametrize("k,cap", [(10, 3), (7, 2), (12, 4), (5, 3)])
    def test_perfect_capacity_pta(self, k, cap, soft_hand):
        """Perfect grasping needs ceil(k / cap) rounds."""
        hand = replace(soft_hand, capacity_override=cap, slip_prob=0.0)
        # objects spread in pairs along a row: clusters always fit the hand
        pts = [(40 + 28 * i, 200) for i in range(k)]
        scene = make_scene(pts, label="sphere_s_s", scenario=Scenario.PILE)
        env = BenchmarkEnv(lambda s: scene, hand, spec=catalog_lookup("sphere_s_s"))
        run = run_pta(env)
        assert run.completed
        assert cgpu_simplified(run.m_OPO, k) == math.ceil(k / cap) / k


class TestAvailability:
    def test_tight_cluster(self, soft_hand):
        scenes = [make_scene([(200, 200), (230, 200), (215, 228)]) for _ in range(3)]
        assert availability_rate(scenes, soft_hand, 3) == 1.0

    def test_far_apart(self, soft_hand):
        scenes = [make_scene([(30, 30), (370, 30), (200, 370)])]
        assert availability_rate(scenes, soft_hand, 3) == 0.0

    def test_empty(self, soft_hand):
        with pytest.raises(EmptyInputError):
            availability_rate([], soft_hand, 3)


def apt_log(env, runs, trials=20):
    return RunLog("apt", 0, "x", runs=tuple(runs), calibration=sop_calibration(env, trials))


class TestSummarize:
    def test_opo_only(self):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s")), builtin_hand("trifinger"), trial_count=30)
        rep = summarize(RunLog("opo", 0, "x", trials=tuple(run_opo(env, 2))))
        assert rep.PA is not None and rep.OSR is not None and rep.N_total == 30
        assert rep.CGPU is None and rep.CGPU_s is None and rep.CGPU_a is None and rep.k is None
        assert rep.settle_wait == 3.0

    def test_apt_fixture(self, exact_soft_hand):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_s_r"), 12, Scenario.SURFACE), exact_soft_hand)
        run = run_apt(env, 5)
        rep = summarize(apt_log(env, [run]))
        assert rep.CGPU_s == 0.4 and rep.delivered == 5 and rep.k == 5 and rep.N_OPO == 2

    def test_time_metrics_recomputed_from_ledger(self, exact_soft_hand):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_s_r"), 12, Scenario.SURFACE), exact_soft_hand)
        run = run_apt(env, 5)
        cal = sop_calibration(env, 20)
        rep = summarize(RunLog("apt", 0, "x", runs=(run,), calibration=cal))
        hand_sum = sum(e.record.phase.t_OPO + e.t_transfer for e in run.rounds)
        assert rep.CGPU == pytest.approx(hand_sum / (5 * cal.t_sopt), rel=1e-12)
        assert rep.CGPU_o == pytest.approx(rep.CGPU, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_identities(self, seed):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s")), builtin_hand("trifinger"), master_seed=seed)
        runs = [run_apt(env, 10, rep) for rep in range(5)]
        rep = summarize(apt_log(env, runs))
        assert rep.CGPU_s == pytest.approx(rep.N_OPO / rep.k, rel=1e-12)
        assert rep.CGPU_a == pytest.approx((1 + rep.lambda_ao) * rep.CGPU_s, rel=1e-12)
        assert rep.CGPU_o == pytest.approx(rep.CGPU_s + rep.lambda_o * rep.CGPU_s, rel=1e-12)

    def test_without_calibration(self):
        env = BenchmarkEnv(SceneFactory(catalog_lookup("cube_m_s")), builtin_hand("trifinger"))
        rep = summarize(RunLog("pta", 0, "x", runs=(run_apt(env, 5),)))
        assert rep.CGPU_s is not None and rep.t_OPO_avg is not None
        assert rep.CGPU is None and rep.CGPU_a is None and rep.t_sopt is None

    def test_mixed_targets(self):
        recs = (TrialRecord("OPO", 2, 2, None), TrialRecord("OPO", 3, 3, None))
        with pytest.raises(IngestError):
            summarize(RunLog("opo", trials=recs))

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            summarize(RunLog("opo"))
        with pytest.raises(EmptyInputError):
            summarize(RunLog("apt"))

    def test_field_order_is_stable(self):
        names = MetricsReport.field_names()
        assert names[0] == "protocol" and names.index("PA") < names.index("CGPU")
