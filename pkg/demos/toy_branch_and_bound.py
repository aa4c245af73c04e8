"""Branch and bound on a small mixed-integer problem, checked against enumeration.

The toy problem has two integer variables and one continuous variable, small
enough that every integer combination can be enumerated. We run the tree
search with population legacy switched on and off, then compare each front's
hypervolume with the brute-force front.

Run: python demos/toy_branch_and_bound.py
"""

from bnbnsga import GAParams, TreePolicy, run_tree
from bnbnsga.oracle import brute_force_front, hypervolume_2d, reference_point, toy_instances

import numpy as np


def as_array(front):
    return np.array([m.f for m in front], dtype=float).reshape(-1, 2)


def main():
    toy = next(t for t in toy_instances() if t.name == "two-int")
    oracle = as_array(brute_force_front(toy))
    print(f"{toy.name}: the enumerated front has {len(oracle)} points")

    params = GAParams(pop_size=32, max_generations=40, rng_seed=0)
    for legacy in (True, False):
        res = run_tree(toy.problem, params, TreePolicy(legacy=legacy, node_generations=20, time_limit_s=None))
        F = as_array(res.front)
        ref = reference_point(oracle, F)
        ratio = hypervolume_2d(F, ref) / hypervolume_2d(oracle, ref)
        print(f"legacy={legacy!s:5}  nodes={res.solved:3d}  {res.status_counts()}")
        print(f"             front size {len(F)}, hypervolume ratio {ratio:.4f}")


if __name__ == "__main__":
    main()
