"""Compare the compiled and numpy kernel backends on realistic inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]

Reports the best-of-N wall time per call for each available backend and
checks that both return identical results.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from mogbench import kernels
from mogbench.catalog import catalog_lookup
from mogbench.hands import builtin_hand
from mogbench.planners import constrained_kmeans, pile_grid
from mogbench.scene import BinRect, generate_pile_scene, generate_surface_scene


def feasibility_case():
    """An infeasible 3-cluster, so every one of the 3,600 yaws is scanned."""
    hand = builtin_hand("soft_hand")
    spec = catalog_lookup("cube_s_r")
    for seed in range(1000):
        scene = generate_surface_scene(spec, 12, BinRect(), seed)
        for c in constrained_kmeans(scene, 3, 0):
            mxy = np.array([scene.get(i).position for i in c.member_ids])
            oxy = np.array([o.position for o in scene.objects if o.id not in c.member_ids])
            cos_arr, sin_arr = kernels.yaw_samples(3600)
            args = (
                np.ascontiguousarray(mxy[:, 0]), np.ascontiguousarray(mxy[:, 1]),
                np.ascontiguousarray(oxy[:, 0]), np.ascontiguousarray(oxy[:, 1]),
                *c.centroid, cos_arr, sin_arr, hand.footprint.width / 2, hand.footprint.depth / 2,
            )
            if kernels.backend.first_feasible_yaw(*args) < 0:
                return args
    raise RuntimeError("no infeasible cluster found")


def grid_case():
    hand = builtin_hand("trifinger")
    scene = generate_pile_scene(catalog_lookup("cube_m_s"), 20, BinRect(), 0)
    gx, gy, n_yaw = pile_grid(scene, hand)
    cos_arr, sin_arr = kernels.yaw_samples(n_yaw)
    xy = scene.xy()
    return (
        np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]), scene.layers(),
        gx, gy, cos_arr, sin_arr, 0.0, 0.0, hand.footprint.radius, hand.max_layers,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    cases = {"first_feasible_yaw (3600 yaws)": ("first_feasible_yaw", feasibility_case()),
             "grid_counts (41x41x1 poses)": ("grid_counts", grid_case())}
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the numpy fallback only")
    for label, (name, call_args) in cases.items():
        results = {}
        print(label)
        for bname, mod in backends.items():
            fn = getattr(mod, name)
            number = 20
            best = min(timeit.repeat(lambda: fn(*call_args), number=number, repeat=args.repeat)) / number
            results[bname] = fn(*call_args)
            print(f"  {bname:7s} {best * 1e6:10.1f} us/call")
        values = list(results.values())
        same = all(np.array_equal(np.asarray(v), np.asarray(values[0])) for v in values)
        print(f"  identical results: {same}")


if __name__ == "__main__":
    main()
