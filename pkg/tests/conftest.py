from __future__ import annotations

from dataclasses import replace

import pytest

from mogbench.catalog import catalog_lookup
from mogbench.hands import builtin_hand
from mogbench.scene import BinRect, ObjectInstance, Scenario, Scene


def make_scene(points, label="cube_s_r", scenario=Scenario.SURFACE, bin=None, layers=None, seed=0) -> Scene:
    """Scene with objects at the given (x, y) centers, ids 0..n-1, yaw 0."""
    spec = catalog_lookup(label)
    layers = layers or [0] * len(points)
    objs = tuple(ObjectInstance(i, spec, float(x), float(y), 0.0, int(l)) for i, ((x, y), l) in enumerate(zip(points, layers)))
    return Scene(bin or BinRect(), scenario, objs, seed)


@pytest.fixture
def cube_s_r():
    return catalog_lookup("cube_s_r")


@pytest.fixture
def cube_m_s():
    return catalog_lookup("cube_m_s")


@pytest.fixture
def soft_hand():
    return builtin_hand("soft_hand")


@pytest.fixture
def exact_soft_hand():
    """Soft hand pinned to capacity 3 with no slip: every grasp is deterministic."""
    return replace(builtin_hand("soft_hand"), capacity_override=3, slip_prob=0.0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)
