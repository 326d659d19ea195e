"""Run configuration: a YAML key-value document validated into :class:`RunConfig`.

Example::

    protocol: apt
    seed: 7
    object: cube_m_s
    scenario: pile
    n_target: 10
    hand: trifinger          # or a mapping, see below
    time: {jitter_frac: 0.1}
    planner: {count_policy: greedy}

An inline hand is either a full definition (``kind``, ``footprint``) or a
builtin name under ``base`` with field overrides::

    hand: {base: soft_hand, capacity_override: 3, slip_prob: 0.0}
    hand: {kind: soft_hand, footprint: {rectangle: [100, 90]}, max_layers: 2}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import yaml

from .catalog import ObjectSpec, catalog_lookup
from .errors import CatalogError, ConfigError
from .hands import DiscFootprint, HandKind, HandModel, RectFootprint, builtin_hand
from .planners import CountPolicy, PlannerConfig
from .protocols import BenchmarkEnv, SceneFactory
from .scene import BinRect, Scenario
from .sim import TimeModel

PROTOCOLS = ("opo", "apt", "pta", "sop-calibrate", "ar")

_TOP_KEYS = {
    "protocol", "seed", "object", "scenario", "p", "n_target", "scene_size", "bin",
    "hand", "time", "planner", "trials", "max_rounds", "sop_trials", "output",
}
_HAND_KEYS = {"base", "kind", "footprint", "max_layers", "slip_prob", "capacity_override"}
_TIME_KEYS = {
    "t_approach_mean", "t_grasp_mean", "t_lift_mean", "t_transfer_mean", "t_sop_mean",
    "jitter_frac", "grouping_move_cost",
}
_PLANNER_KEYS = {"kind", "count_policy", "fixed_p", "grid_spacing", "grid_yaws", "feasibility_yaws", "refine_yaws", "kmeans_restarts"}


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    seed: int
    spec: ObjectSpec
    scenario: Scenario = Scenario.PILE
    p: int = 2
    n_target: int = 5
    scene_size: int = 20
    bin: BinRect = field(default_factory=BinRect)
    hand: HandModel = field(default_factory=lambda: builtin_hand("trifinger"))
    time: TimeModel = field(default_factory=TimeModel)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    trials: int = 100
    max_rounds: int = 50
    sop_trials: int = 100
    output: str | None = None

    def env(self) -> BenchmarkEnv:
        factory = SceneFactory(self.spec, self.scene_size, self.scenario, self.bin)
        return BenchmarkEnv(
            factory, self.hand, self.time, self.planner, self.trials, self.max_rounds, self.seed, self.spec
        )

    def canonical(self) -> dict[str, Any]:
        """Fully resolved configuration as plain data (the output path excluded)."""
        fp = self.hand.footprint
        footprint = (
            {"disc": fp.radius} if isinstance(fp, DiscFootprint) else {"rectangle": [fp.width, fp.depth]}
        )
        policy = self.planner.count_policy
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "object": self.spec.label,
            "scenario": self.scenario.value,
            "p": self.p,
            "n_target": self.n_target,
            "scene_size": self.scene_size,
            "bin": [self.bin.width, self.bin.height],
            "hand": {
                "kind": self.hand.kind.value,
                "footprint": footprint,
                "max_layers": self.hand.max_layers,
                "slip_prob": self.hand.slip_prob,
                "capacity_override": self.hand.capacity_override,
            },
            "time": asdict(self.time),
            "planner": {
                "kind": self.planner.planner,
                "count_policy": policy.kind.value,
                "fixed_p": policy.p,
                "grid_spacing": self.planner.grid_spacing,
                "grid_yaws": self.planner.grid_yaws,
                "feasibility_yaws": self.planner.feasibility_yaws,
                "refine_yaws": self.planner.refine_yaws,
                "kmeans_restarts": self.planner.kmeans_restarts,
            },
            "trials": self.trials,
            "max_rounds": self.max_rounds,
            "sop_trials": self.sop_trials,
        }

    def digest(self) -> str:
        return config_digest(self.canonical())


def config_digest(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _check_keys(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key{'s' if len(unknown) > 1 else ''} in {where}: {', '.join(unknown)}")


def _int(data: dict, key: str, default: int | None, minimum: int) -> int | None:
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}")
    return value


def _mapping(value: Any, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping")
    return value


def _hand(value: Any) -> HandModel:
    if value is None:
        return builtin_hand("trifinger")
    if isinstance(value, str):
        try:
            return builtin_hand(value)
        except ValueError:
            raise ConfigError(f"unknown hand {value!r}") from None
    data = _mapping(value, "hand")
    _check_keys(data, _HAND_KEYS, "hand")
    try:
        if "base" in data:
            hand = builtin_hand(data["base"])
        elif "kind" in data and "footprint" in data:
            hand = HandModel(HandKind(data["kind"]), RectFootprint(1.0, 1.0))
        else:
            raise ConfigError("hand needs either 'base' or both 'kind' and 'footprint'")
        changes: dict[str, Any] = {}
        if "kind" in data:
            changes["kind"] = HandKind(data["kind"])
        if "footprint" in data:
            fp = _mapping(data["footprint"], "hand.footprint")
            if set(fp) == {"rectangle"}:
                w, d = fp["rectangle"]
                changes["footprint"] = RectFootprint(float(w), float(d))
            elif set(fp) == {"disc"}:
                changes["footprint"] = DiscFootprint(float(fp["disc"]))
            else:
                raise ConfigError("hand.footprint must be {rectangle: [width, depth]} or {disc: radius}")
        for key in ("max_layers", "capacity_override"):
            if key in data:
                changes[key] = _int(data, key, None, 0 if key == "capacity_override" else 1)
        if "slip_prob" in data:
            changes["slip_prob"] = float(data["slip_prob"])
        return replace(hand, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid hand: {exc}") from None


def _time(value: Any) -> TimeModel:
    data = _mapping(value, "time")
    _check_keys(data, _TIME_KEYS, "time")
    try:
        return TimeModel(**{k: float(v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid time model: {exc}") from None


def _planner(value: Any) -> PlannerConfig:
    data = _mapping(value, "planner")
    _check_keys(data, _PLANNER_KEYS, "planner")
    try:
        policy = CountPolicy(data.get("count_policy", "greedy"), data.get("fixed_p"))
        return PlannerConfig(
            planner=data.get("kind", "auto"),
            count_policy=policy,
            grid_spacing=float(data.get("grid_spacing", 10.0)),
            grid_yaws=int(data.get("grid_yaws", 8)),
            feasibility_yaws=int(data.get("feasibility_yaws", 180)),
            refine_yaws=int(data.get("refine_yaws", 3600)),
            kmeans_restarts=int(data.get("kmeans_restarts", 4)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid planner: {exc}") from None


def config_from_mapping(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a key-value mapping")
    _check_keys(data, _TOP_KEYS, "config")
    if data.get("seed") is None:
        raise ConfigError("seed required")
    seed = _int(data, "seed", None, 0)
    protocol = data.get("protocol", "opo")
    if protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol!r}; expected one of {', '.join(PROTOCOLS)}")
    try:
        spec = catalog_lookup(data.get("object", "cube_m_s"))
    except CatalogError as exc:
        raise ConfigError(str(exc)) from None
    try:
        scenario = Scenario(data.get("scenario", "pile"))
    except ValueError:
        raise ConfigError(f"unknown scenario {data.get('scenario')!r}") from None
    bin_ = data.get("bin", [400.0, 400.0])
    try:
        w, h = bin_
        bin_rect = BinRect(float(w), float(h))
    except (TypeError, ValueError):
        raise ConfigError("bin must be [width, height] with positive lengths") from None
    output = data.get("output")
    return RunConfig(
        protocol=protocol,
        seed=seed,
        spec=spec,
        scenario=scenario,
        p=_int(data, "p", 2, 1),
        n_target=_int(data, "n_target", 5, 1),
        scene_size=_int(data, "scene_size", 20, 0),
        bin=bin_rect,
        hand=_hand(data.get("hand")),
        time=_time(data.get("time")),
        planner=_planner(data.get("planner")),
        trials=_int(data, "trials", 100, 1),
        max_rounds=_int(data, "max_rounds", 50, 1),
        sop_trials=_int(data, "sop_trials", 100, 1),
        output=None if output is None else str(output),
    )


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {str(exc).splitlines()[0]}") from None
    return config_from_mapping(data if data is not None else {})
