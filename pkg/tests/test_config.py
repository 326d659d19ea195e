from __future__ import annotations

import pytest

from mogbench.config import config_from_mapping, parse_config
from mogbench.errors import ConfigError
from mogbench.hands import DiscFootprint, HandKind, RectFootprint
from mogbench.planners import CountPolicyKind
from mogbench.scene import Scenario


class TestParse:
    def test_minimal(self):
        cfg = parse_config("protocol: opo\nseed: 1\n")
        assert cfg.seed == 1 and cfg.protocol == "opo"
        assert cfg.spec.label == "cube_m_s" and cfg.scenario is Scenario.PILE
        assert cfg.trials == 100 and cfg.max_rounds == 50 and cfg.hand.kind is HandKind.TRIFINGER

    def test_seed_required(self):
        with pytest.raises(ConfigError, match="seed required"):
            parse_config("protocol: opo\n")

    def test_object_resolved(self):
        cfg = parse_config("seed: 0\nobject: cube_m_s\n")
        assert cfg.spec.dim("side") == 35.0

    def test_unknown_object(self):
        with pytest.raises(ConfigError, match="cube_x_q"):
            parse_config("seed: 0\nobject: cube_x_q\n")

    @pytest.mark.parametrize(
        "text",
        [
            "seed: 0\ncolour: red\n",
            "seed: 0\nhand: {base: soft_hand, fingers: 5}\n",
            "seed: 0\ntime: {t_sleep: 1}\n",
            "seed: 0\nplanner: {beam: 3}\n",
        ],
    )
    def test_unknown_keys(self, text):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(text)

    @pytest.mark.parametrize("field", ["t_grasp_mean", "t_transfer_mean", "t_sop_mean"])
    @pytest.mark.parametrize("value", [0, -2.5])
    def test_non_positive_times(self, field, value):
        with pytest.raises(ConfigError):
            parse_config(f"seed: 0\ntime: {{{field}: {value}}}\n")

    @pytest.mark.parametrize(
        "text",
        [
            "seed: -1\n",
            "seed: 1.5\n",
            "seed: 0\nprotocol: juggle\n",
            "seed: 0\nscenario: heap\n",
            "seed: 0\nbin: [10]\n",
            "seed: 0\nhand: robot_arm\n",
            "seed: 0\ntrials: 0\n",
            "seed: 0\nhand: {kind: soft_hand}\n",
            "seed: 0\nhand: {base: soft_hand, slip_prob: 2}\n",
            "seed: 0\nplanner: {count_policy: fixed}\n",
            "- a\n- b\n",
            "seed: [unclosed\n",
        ],
    )
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_inline_hands(self):
        cfg = parse_config("seed: 0\nhand: {base: soft_hand, capacity_override: 3, slip_prob: 0.0}\n")
        assert cfg.hand.capacity_override == 3 and cfg.hand.slip_prob == 0.0
        assert cfg.hand.footprint == RectFootprint(100.0, 90.0)
        cfg = parse_config("seed: 0\nhand: {kind: trifinger, footprint: {disc: 42}, max_layers: 3}\n")
        assert cfg.hand.footprint == DiscFootprint(42.0) and cfg.hand.max_layers == 3

    def test_planner_and_time(self):
        cfg = parse_config(
            "seed: 4\nplanner: {kind: grid, count_policy: fixed, fixed_p: 2, grid_spacing: 5}\ntime: {jitter_frac: 0}\n"
        )
        assert cfg.planner.planner == "grid" and cfg.planner.grid_spacing == 5.0
        assert cfg.planner.count_policy.kind is CountPolicyKind.FIXED and cfg.planner.count_policy.p == 2
        assert cfg.time.jitter_frac == 0.0


class TestDigest:
    def test_stable(self):
        assert parse_config("seed: 3\n").digest() == parse_config("seed: 3\nprotocol: opo\n").digest()

    def test_sensitive(self):
        assert parse_config("seed: 3\n").digest() != parse_config("seed: 4\n").digest()
        assert parse_config("seed: 3\n").digest() != parse_config("seed: 3\ntime: {jitter_frac: 0.2}\n").digest()

    def test_output_path_excluded(self):
        assert config_from_mapping({"seed": 1, "output": "a.jsonl"}).digest() == config_from_mapping({"seed": 1}).digest()

    def test_env_wiring(self):
        cfg = parse_config("seed: 9\nobject: cube_s_r\nscenario: surface\nscene_size: 7\ntrials: 3\n")
        env = cfg.env()
        assert env.master_seed == 9 and env.trial_count == 3 and len(env.scene_factory(0)) == 7
