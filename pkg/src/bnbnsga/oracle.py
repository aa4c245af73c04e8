"""Brute-force reference solvers and small enumerable test problems.

Nothing here is used by the solvers themselves. The functions deliberately
take the slow, obvious route (explicit double loops, full enumeration) so they
can check the vectorized code paths.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .model import (
    Categorical,
    Continuous,
    ContractError,
    Individual,
    Integer,
    ProblemDef,
    constrained_dominates,
    violation_rows,
)

MAX_INT_VARS = 3
MAX_INT_CARDINALITY = 200
MAX_CONT_VARS = 2


def brute_force_ranks(members: Sequence[Individual]) -> list[int]:
    """Front index of every member by repeated domination counting.

    The pairwise relation is evaluated once with the scalar
    ``constrained_dominates``; fronts are then peeled off by counting how
    many remaining members dominate each one.
    """
    n = len(members)
    beats = [[j for j in range(n) if j != i and constrained_dominates(members[i], members[j])] for i in range(n)]
    count = [0] * n
    for i in range(n):
        for j in beats[i]:
            count[j] += 1
    rank = [-1] * n
    current = [j for j in range(n) if count[j] == 0]
    k = 0
    while current:
        nxt = []
        for i in current:
            rank[i] = k
            for j in beats[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        current = nxt
        k += 1
    return rank


def nondominated(points: Sequence[Individual]) -> list[Individual]:
    """O(N^2) Pareto filter; identical objective vectors collapse to the first seen."""
    if not points:
        return []
    F = np.array([p.f for p in points], dtype=float)
    out: list[Individual] = []
    seen: set[tuple[float, ...]] = set()
    for a in points:
        # row-by-row scan against every other point
        if np.any(np.all(F <= a.f, axis=1) & np.any(F < a.f, axis=1)):
            continue
        key = tuple(a.f.tolist())
        if key in seen:
            continue
        seen.add(key)
        out.append(a)
    return out


def hypervolume_2d(F: np.ndarray, ref: Sequence[float]) -> float:
    """Exact two-objective hypervolume by a sweep over the first objective."""
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    ref = np.asarray(ref, dtype=float)
    F = F[np.all(F < ref, axis=1)]
    if len(F) == 0:
        return 0.0
    F = F[np.lexsort((F[:, 1], F[:, 0]))]
    hv = 0.0
    level = ref[1]
    for f1, f2 in F:
        if f2 < level:
            hv += (ref[0] - f1) * (level - f2)
            level = f2
    return float(hv)


def reference_point(*fronts: np.ndarray) -> np.ndarray:
    """Componentwise max over the union of fronts, pushed out by 10 %."""
    F = np.vstack([np.asarray(f, dtype=float).reshape(-1, 2) for f in fronts if len(f)])
    worst = F.max(axis=0)
    return worst + 0.1 * np.abs(worst)


def _front_2d_fast(F: np.ndarray) -> np.ndarray:
    """Indices of the non-dominated rows of a 2-objective set (sort sweep)."""
    order = np.lexsort((F[:, 1], F[:, 0]))
    keep = []
    best = np.inf
    for i in order:
        if F[i, 1] < best:
            keep.append(i)
            best = F[i, 1]
    return np.asarray(keep, dtype=int)


@dataclass(frozen=True)
class ToyMINLP:
    name: str
    problem: ProblemDef

    def __post_init__(self):
        check_toy_size(self.problem)


def check_toy_size(problem: ProblemDef) -> None:
    ints = [s for s in problem.specs if s.is_integer]
    conts = [s for s in problem.specs if not s.is_integer]
    card = int(np.prod([s.cardinality for s in ints])) if ints else 1
    if len(ints) > MAX_INT_VARS or card > MAX_INT_CARDINALITY or len(conts) > MAX_CONT_VARS:
        raise ContractError(
            f"problem too large for enumeration: {len(ints)} integer vars "
            f"(cardinality {card}), {len(conts)} continuous vars; limits are "
            f"{MAX_INT_VARS}, {MAX_INT_CARDINALITY}, {MAX_CONT_VARS}"
        )


def brute_force_front(problem: ProblemDef | ToyMINLP, grid_density: int = 101, refine: int = 10) -> list[Individual]:
    """Enumerate integer combinations, grid the continuous box, keep the Pareto set.

    After the coarse grid, each combination's non-dominated grid points get a
    local grid ``refine`` times finer spanning one coarse step on either side.
    """
    if isinstance(problem, ToyMINLP):
        problem = problem.problem
    check_toy_size(problem)
    if problem.p != 2:
        raise ContractError("brute_force_front supports two objectives")
    specs = problem.specs
    int_idx = [i for i, s in enumerate(specs) if s.is_integer]
    cont_idx = [i for i, s in enumerate(specs) if not s.is_integer]
    axes = [np.linspace(specs[i].lo, specs[i].hi, grid_density) for i in cont_idx]
    steps = [(specs[i].hi - specs[i].lo) / max(grid_density - 1, 1) for i in cont_idx]
    int_ranges = [range(int(specs[i].lo), int(specs[i].hi) + 1) for i in int_idx]

    def grid_points(combo, cont_axes):
        mesh = np.meshgrid(*cont_axes, indexing="ij") if cont_axes else []
        n = mesh[0].size if mesh else 1
        X = np.empty((n, len(specs)))
        for i, v in zip(int_idx, combo):
            X[:, i] = v
        for i, m in zip(cont_idx, mesh):
            X[:, i] = m.ravel()
        return X

    def feasible_eval(X):
        F, C = problem.evaluate(X)
        V = violation_rows(C, problem.tol_feas)
        ok = V == 0.0
        return X[ok], F[ok], C[ok]

    pool: list[Individual] = []
    for combo in itertools.product(*int_ranges):
        X, F, C = feasible_eval(grid_points(combo, axes))
        if len(X) == 0:
            continue
        keep = _front_2d_fast(F)
        if cont_idx and refine > 1:
            extra = []
            for x in X[keep]:
                local = [
                    np.clip(np.linspace(x[i] - h, x[i] + h, 2 * refine + 1), specs[i].lo, specs[i].hi)
                    for i, h in zip(cont_idx, steps)
                ]
                extra.append(grid_points(combo, local))
            X2, F2, C2 = feasible_eval(np.vstack(extra))
            X = np.vstack([X[keep], X2])
            F = np.vstack([F[keep], F2])
            C = np.vstack([C[keep], C2])
            keep = _front_2d_fast(F)
        pool.extend(Individual(X[i].copy(), F[i].copy(), C[i].copy(), 0.0) for i in keep)
    if not pool:
        return []
    PF = np.array([ind.f for ind in pool])
    return nondominated([pool[i] for i in _front_2d_fast(PF)])


# Enumerable instances used by the tests and the acceptance suite.

def _toy_one_int():
    def ev(X):
        y, x = X[:, 0], X[:, 1]
        f1 = 0.1 + x + 0.1 * y
        f2 = 0.1 + (1.0 - x) ** 2 + 0.12 * (9 - y)
        c = 0.05 * y - 0.2 - x
        return np.c_[f1, f2], c[:, None]

    specs = [Integer("y", 0, 9), Continuous("x", 0.0, 1.0)]
    return ToyMINLP("one-int", ProblemDef(specs, 2, 1, ev, vectorized=True, name="one-int"))


def _toy_two_int():
    def ev(X):
        y1, y2, x = X[:, 0], X[:, 1], X[:, 2]
        f1 = 0.1 + x**2 + 0.2 * y1 + 0.05 * y2
        f2 = 0.1 + (x - 2.0) ** 2 + 0.3 * np.abs(y1 - y2) + 0.25 * (5 - y1)
        c = (3.0 - y1 - y2) / 3.0
        return np.c_[f1, f2], c[:, None]

    specs = [Integer("y1", 0, 5), Integer("y2", 0, 5), Continuous("x", 0.0, 2.0)]
    return ToyMINLP("two-int", ProblemDef(specs, 2, 1, ev, vectorized=True, name="two-int"))


_CAT = (0.5, 0.8, 1.0, 1.5, 2.0, 3.0)


def _toy_categorical():
    cat = np.array(_CAT)

    def ev(X):
        v = cat[X[:, 0].astype(int)]
        n, x1, x2 = X[:, 1], X[:, 2], X[:, 3]
        f1 = 0.1 + v * x1 + 0.1 * n + 0.5 * x2**2
        f2 = 0.1 + (1.0 - x1) / v + 0.5 * (1.0 - x2) ** 2 + 0.06 * (8 - n)
        c = np.c_[0.5 - x1 - x2, (v * n - 12.0) / 12.0]
        return np.c_[f1, f2], c

    specs = [Categorical("v", _CAT), Integer("n", 1, 8), Continuous("x1", 0.0, 1.0), Continuous("x2", 0.0, 1.0)]
    return ToyMINLP("categorical", ProblemDef(specs, 2, 2, ev, vectorized=True, name="categorical"))


def _toy_pure_int():
    def ev(X):
        y1, y2 = X[:, 0], X[:, 1]
        f1 = 1.0 + y1 + 0.5 * y2
        f2 = 1.0 + (9.0 - y1) ** 2 / 9.0 + 0.7 * (9.0 - y2)
        c = (y1 * y2 - 30.0) / 30.0
        return np.c_[f1, f2], c[:, None]

    specs = [Integer("y1", 0, 9), Integer("y2", 0, 9)]
    return ToyMINLP("pure-int", ProblemDef(specs, 2, 1, ev, vectorized=True, name="pure-int"))


def _toy_three_int():
    def ev(X):
        y1, y2, y3, x = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
        f1 = 0.2 + x + 0.1 * (y1 + y2) + 0.05 * y3
        f2 = 0.1 + (1.0 - x) ** 2 * (1.0 + 0.1 * y3) + 0.1 * (4 - y1) + 0.05 * (4 - y2)
        c = np.c_[0.1 * y3 - x, (y1 + y2 + y3 - 9.0) / 9.0]
        return np.c_[f1, f2], c

    specs = [Integer("y1", 0, 4), Integer("y2", 0, 4), Integer("y3", 0, 3), Continuous("x", 0.0, 1.0)]
    return ToyMINLP("three-int", ProblemDef(specs, 2, 2, ev, vectorized=True, name="three-int"))


def toy_instances() -> list[ToyMINLP]:
    return [_toy_one_int(), _toy_two_int(), _toy_categorical(), _toy_pure_int(), _toy_three_int()]
