"""Feasibility seeding: harvest feasible points with branch and bound, then run NSGA-II.

The tree search differs from a plain run in two ways: nodes where NSGA-II
finds nothing feasible are still branched, and the whole search stops after
the first node that produces feasible points. Those points become part of the
initial population of a standalone NSGA-II run.
"""

from __future__ import annotations

import time
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .mcbb import TreePolicy, TreeResult, run_tree
from .model import ContractError, Individual, ProblemDef
from .nsga2 import GAParams, Observer, evolve, seed_population


@dataclass(frozen=True)
class SeederPolicy:
    min_feasible: int = 1
    continue_on_infeasible_root: bool = True
    legacy: bool = True
    max_nodes: int = 10_000
    time_limit_s: float | None = 1800.0
    node_generations: int = 50
    leaf_generations: int | None = None

    def __post_init__(self):
        if self.min_feasible < 1:
            raise ContractError("min_feasible must be >= 1")

    def tree_policy(self) -> TreePolicy:
        return TreePolicy(
            legacy=self.legacy,
            node_generations=self.node_generations,
            leaf_generations=self.leaf_generations,
            max_nodes=self.max_nodes,
            time_limit_s=self.time_limit_s,
            branch_infeasible=self.continue_on_infeasible_root,
            stop_after_feasible=self.min_feasible,
        )


@dataclass
class Harvest:
    seeds: list[np.ndarray]
    tree: TreeResult

    @property
    def exhausted(self) -> bool:
        return self.tree.stopped_by is None


def harvest(
    problem: ProblemDef,
    params: GAParams,
    policy: SeederPolicy | None = None,
    *,
    observer: Observer | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> Harvest:
    """Run the modified tree and collect feasible vectors from the stopping node.

    Every feasible member of that node's final population is returned (front
    members first), capped at half the population size.
    """
    policy = policy or SeederPolicy()
    tree = run_tree(problem, params, policy.tree_policy(), observer=observer, should_stop=should_stop)
    if tree.stopped_by is None:
        return Harvest([], tree)
    pop = tree.nodes[tree.stopped_by].final_pop
    feas = np.flatnonzero(pop.feasible)
    order = feas[np.lexsort((-pop.crowding[feas], pop.rank[feas]))]
    seeds: list[np.ndarray] = []
    seen: set[bytes] = set()
    for i in order:
        key = pop.X[i].tobytes()
        if key in seen:
            continue
        seen.add(key)
        seeds.append(pop.X[i].copy())
        if len(seeds) >= params.pop_size // 2:
            break
    # seeds must be feasible in the unrestricted problem too
    for s in seeds:
        problem.check(s)
        if not problem.individual(s).feasible:
            raise AssertionError(f"harvested seed is infeasible at root: {s.tolist()}")
    return Harvest(seeds, tree)


def find_feasible(problem: ProblemDef, params: GAParams, policy: SeederPolicy | None = None, **kw) -> list[np.ndarray]:
    return harvest(problem, params, policy, **kw).seeds


@dataclass
class SeedReport:
    seed_count: int
    harvest_nodes: int
    harvest_wall_time_s: float
    ga_wall_time_s: float
    exhausted: bool
    stopped_by: int | None
    tree_status: dict = field(default_factory=dict)
    truncated: bool = False


def seeded_solve(
    problem: ProblemDef,
    params: GAParams,
    policy: SeederPolicy | None = None,
    *,
    observer: Observer | None = None,
    deadline: float | None = None,
) -> tuple[list[Individual], SeedReport]:
    """Harvest seeds, then solve the full problem with NSGA-II started from them.

    With no seeds this is exactly a random-start NSGA-II run for
    ``params.rng_seed``.
    """
    policy = policy or SeederPolicy()
    if deadline is not None:
        remaining = max(0.0, deadline - time.monotonic())
        limit = remaining if policy.time_limit_s is None else min(policy.time_limit_s, remaining)
        policy = replace(policy, time_limit_s=limit)
    t0 = time.monotonic()
    h = harvest(problem, params, policy, observer=observer)
    t1 = time.monotonic()
    rng = np.random.default_rng(params.rng_seed)
    initial = seed_population(problem, params.pop_size, h.seeds, rng, observer)
    final_pop, front = evolve(problem, params, initial, rng=rng, observer=observer, deadline=deadline)
    t2 = time.monotonic()
    report = SeedReport(
        seed_count=len(h.seeds),
        harvest_nodes=h.tree.solved,
        harvest_wall_time_s=t1 - t0,
        ga_wall_time_s=t2 - t1,
        exhausted=h.exhausted,
        stopped_by=h.tree.stopped_by,
        tree_status=h.tree.status_counts(),
        truncated=bool(final_pop.meta.get("truncated")),
    )
    return front, report

