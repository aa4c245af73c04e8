"""Constrained NSGA-II with SBX crossover and polynomial mutation.

The engine works on whole populations stored as numpy arrays. Integer and
categorical slots go through the same real-valued operators and are then
rounded half away from zero and clipped to their domains.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ContractError,
    Individual,
    ProblemDef,
    constrained_dominance_matrix,
    round_half_away,
    violation_rows,
)

Observer = Callable[[np.ndarray, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class GAParams:
    """NSGA-II settings. Defaults are the full-budget values used for the reducer study."""

    pop_size: int = 200
    max_generations: int = 500
    p_crossover: float = 0.8
    p_mutation: float = 0.9
    eta_c: float = 100.0
    eta_m: float = 10.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.pop_size < 4 or self.pop_size % 2:
            raise ContractError(f"pop_size must be even and >= 4, got {self.pop_size}")
        if self.max_generations < 0:
            raise ContractError("max_generations must be non-negative")
        for name in ("p_crossover", "p_mutation"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ContractError(f"{name} must lie in [0, 1], got {v}")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise ContractError("distribution indices must be positive")
        if self.rng_seed < 0:
            raise ContractError("rng_seed must be unsigned")


@dataclass
class Population:
    X: np.ndarray
    F: np.ndarray
    C: np.ndarray
    V: np.ndarray
    rank: np.ndarray | None = None
    crowding: np.ndarray | None = None
    generation: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.X)

    def __getitem__(self, i: int) -> Individual:
        return Individual(
            self.X[i].copy(),
            self.F[i].copy(),
            self.C[i].copy(),
            float(self.V[i]),
            None if self.rank is None else int(self.rank[i]),
            None if self.crowding is None else float(self.crowding[i]),
        )

    @property
    def members(self) -> list[Individual]:
        return [self[i] for i in range(len(self))]

    @property
    def feasible(self) -> np.ndarray:
        return self.V == 0.0

    def take(self, idx: Sequence[int] | np.ndarray) -> Population:
        idx = np.asarray(idx, dtype=int)
        return Population(
            self.X[idx].copy(),
            self.F[idx].copy(),
            self.C[idx].copy(),
            self.V[idx].copy(),
            None if self.rank is None else self.rank[idx].copy(),
            None if self.crowding is None else self.crowding[idx].copy(),
            self.generation,
        )

    @classmethod
    def evaluated(cls, problem: ProblemDef, X: np.ndarray, observer: Observer | None = None) -> Population:
        X = np.asarray(X, dtype=float)
        F, C = problem.evaluate(X)
        V = violation_rows(C, problem.tol_feas)
        if observer is not None:
            observer(X, F, V)
        return cls(X.copy(), F, C, V)

    @classmethod
    def from_individuals(cls, members: Sequence[Individual]) -> Population:
        return cls(
            np.array([m.x for m in members], dtype=float),
            np.array([m.f for m in members], dtype=float),
            np.array([m.c for m in members], dtype=float),
            np.array([m.violation for m in members], dtype=float),
        )


def _sort_arrays(F: np.ndarray, V: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    n = len(F)
    rank = np.full(n, -1, dtype=int)
    if n == 0:
        return [], rank
    D = constrained_dominance_matrix(F, V)
    counts = D.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    k = 0
    while current.size:
        rank[current] = k
        fronts.append(current)
        counts = counts - D[current].sum(axis=0)
        counts[rank >= 0] = -1
        current = np.flatnonzero(counts == 0)
        k += 1
    return fronts, rank


def fast_nondominated_sort(pop: Population) -> list[list[int]]:
    """Partition ``pop`` into fronts under constrained dominance; sets ``pop.rank``."""
    fronts, rank = _sort_arrays(pop.F, pop.V)
    pop.rank = rank
    return [f.tolist() for f in fronts]


def crowding_distance(front: Sequence[Individual] | np.ndarray) -> np.ndarray:
    """Crowding distance of each member of a mutually non-dominated front."""
    if isinstance(front, np.ndarray):
        F = np.atleast_2d(np.asarray(front, dtype=float))
    else:
        F = np.array([ind.f for ind in front], dtype=float)
    n = len(F)
    if n == 0:
        return np.zeros(0)
    dist = np.zeros(n)
    for k in range(F.shape[1]):
        col = F[:, k]
        span = col.max() - col.min()
        if span == 0.0:
            continue
        order = np.argsort(col, kind="stable")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if n > 2:
            dist[order[1:-1]] += (col[order[2:]] - col[order[:-2]]) / span
    return dist


def _rank_and_crowd(pop: Population) -> list[np.ndarray]:
    fronts, rank = _sort_arrays(pop.F, pop.V)
    crowd = np.zeros(len(pop))
    for f in fronts:
        crowd[f] = np.inf if len(f) <= 2 else crowding_distance(pop.F[f])
    pop.rank = rank
    pop.crowding = crowd
    return fronts


def _snap(X: np.ndarray, lo: np.ndarray, hi: np.ndarray, int_mask: np.ndarray) -> np.ndarray:
    X = np.where(int_mask, round_half_away(X), X)
    return np.clip(X, lo, hi)


def sbx_pairs(
    P1: np.ndarray,
    P2: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    int_mask: np.ndarray,
    params: GAParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched SBX over rows of ``P1``/``P2``."""
    P1 = np.atleast_2d(P1)
    P2 = np.atleast_2d(P2)
    n, d = P1.shape
    u = rng.random((n, d))
    e = 1.0 / (params.eta_c + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** e, (1.0 / (2.0 * (1.0 - u))) ** e)
    C1 = 0.5 * ((1.0 + beta) * P1 + (1.0 - beta) * P2)
    C2 = 0.5 * ((1.0 - beta) * P1 + (1.0 + beta) * P2)
    swap = rng.random((n, d)) < 0.5
    C1, C2 = np.where(swap, C2, C1), np.where(swap, C1, C2)
    skip = rng.random(n) >= params.p_crossover
    C1[skip] = P1[skip]
    C2[skip] = P2[skip]
    return _snap(C1, lo, hi, int_mask), _snap(C2, lo, hi, int_mask)


def sbx_crossover(
    p1: Sequence[float],
    p2: Sequence[float],
    problem: ProblemDef,
    params: GAParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    c1, c2 = sbx_pairs(
        np.asarray(p1, dtype=float)[None, :],
        np.asarray(p2, dtype=float)[None, :],
        problem.lower,
        problem.upper,
        problem.int_mask,
        params,
        rng,
    )
    return c1[0], c2[0]


def mutate_rows(
    X: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    int_mask: np.ndarray,
    params: GAParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Bounded polynomial mutation, per-slot probability ``p_mutation / d``."""
    X = np.array(np.atleast_2d(X), dtype=float)
    n, d = X.shape
    span = hi - lo
    hit = (rng.random((n, d)) < params.p_mutation / d) & (span > 0)
    u = rng.random((n, d))
    if not hit.any():
        return X
    safe = np.where(span > 0, span, 1.0)
    d1 = (X - lo) / safe
    d2 = (hi - X) / safe
    e = params.eta_m + 1.0
    left = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** e
    right = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** e
    with np.errstate(invalid="ignore"):
        dq = np.where(u < 0.5, left ** (1.0 / e) - 1.0, 1.0 - right ** (1.0 / e))
    Y = np.where(hit, X + dq * span, X)
    return _snap(Y, lo, hi, int_mask)


def polynomial_mutation(
    x: Sequence[float],
    problem: ProblemDef,
    params: GAParams,
    rng: np.random.Generator,
) -> np.ndarray:
    return mutate_rows(
        np.asarray(x, dtype=float)[None, :],
        problem.lower,
        problem.upper,
        problem.int_mask,
        params,
        rng,
    )[0]


def random_vectors(problem: ProblemDef, n: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi, im = problem.lower, problem.upper, problem.int_mask
    X = lo + rng.random((n, len(lo))) * (hi - lo)
    if im.any():
        X[:, im] = rng.integers(lo[im].astype(np.int64), hi[im].astype(np.int64) + 1, size=(n, int(im.sum())))
    return X


def seed_population(
    problem: ProblemDef,
    pop_size: int,
    seeds: Sequence[Sequence[float]],
    rng: np.random.Generator,
    observer: Observer | None = None,
) -> Population:
    """Seeds verbatim followed by uniform random fill, all evaluated."""
    seeds = [np.asarray(s, dtype=float) for s in seeds]
    if len(seeds) > pop_size:
        raise ContractError(f"{len(seeds)} seeds exceed pop_size={pop_size}")
    for i, s in enumerate(seeds):
        try:
            problem.check(s)
        except ContractError as exc:
            raise ContractError(f"seed {i} rejected: {exc}") from exc
    fill = random_vectors(problem, pop_size - len(seeds), rng)
    X = np.vstack([np.array(seeds).reshape(len(seeds), problem.n_vars), fill])
    return Population.evaluated(problem, X, observer)


def _tournament(pop: Population, n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.integers(0, len(pop), n)
    b = rng.integers(0, len(pop), n)
    coin = rng.random(n) < 0.5
    ra, rb = pop.rank[a], pop.rank[b]
    ca, cb = pop.crowding[a], pop.crowding[b]
    a_wins = (ra < rb) | ((ra == rb) & (ca > cb))
    b_wins = (rb < ra) | ((ra == rb) & (cb > ca))
    return np.where(a_wins, a, np.where(b_wins, b, np.where(coin, a, b)))


def _survivors(fronts: list[np.ndarray], crowd: np.ndarray, n: int) -> np.ndarray:
    keep = []
    for f in fronts:
        if len(keep) + len(f) <= n:
            keep.extend(f.tolist())
            if len(keep) == n:
                break
            continue
        order = np.argsort(-crowd[f], kind="stable")
        keep.extend(f[order[: n - len(keep)]].tolist())
        break
    return np.asarray(keep, dtype=int)


def feasible_front(pop: Population) -> list[Individual]:
    """Feasible members of the first front."""
    if pop.rank is None:
        _rank_and_crowd(pop)
    idx = np.flatnonzero((pop.rank == 0) & pop.feasible)
    return [pop[i] for i in idx]


def evolve(
    problem: ProblemDef,
    params: GAParams,
    initial: Population,
    *,
    rng: np.random.Generator | None = None,
    generations: int | None = None,
    observer: Observer | None = None,
    should_stop: Callable[[], bool] | None = None,
    deadline: float | None = None,
) -> tuple[Population, list[Individual]]:
    """Run NSGA-II from ``initial`` and return ``(final_pop, feasible_front)``.

    ``generations`` overrides ``params.max_generations``. ``should_stop`` and
    ``deadline`` (a ``time.monotonic()`` value) are checked between
    generations; an early exit is flagged in ``final_pop.meta["truncated"]``.
    """
    if len(initial) != params.pop_size:
        raise ContractError(f"initial population has {len(initial)} members, expected {params.pop_size}")
    rng = np.random.default_rng(params.rng_seed) if rng is None else rng
    n_gen = params.max_generations if generations is None else generations
    lo, hi, im = problem.lower, problem.upper, problem.int_mask
    n = params.pop_size

    pop = initial.take(np.arange(n))
    _rank_and_crowd(pop)
    truncated = False
    for gen in range(n_gen):
        if (should_stop is not None and should_stop()) or (deadline is not None and time.monotonic() > deadline):
            truncated = True
            break
        parents = _tournament(pop, n, rng)
        C1, C2 = sbx_pairs(pop.X[parents[0::2]], pop.X[parents[1::2]], lo, hi, im, params, rng)
        kids = np.empty((n, problem.n_vars))
        kids[0::2] = C1
        kids[1::2] = C2
        kids = mutate_rows(kids, lo, hi, im, params, rng)
        off = Population.evaluated(problem, kids, observer)
        merged = Population(
            np.vstack([pop.X, off.X]),
            np.vstack([pop.F, off.F]),
            np.vstack([pop.C, off.C]),
            np.concatenate([pop.V, off.V]),
        )
        fronts = _rank_and_crowd(merged)
        pop = merged.take(_survivors(fronts, merged.crowding, n))
        _rank_and_crowd(pop)
        pop.generation = gen + 1
    pop.meta["truncated"] = truncated
    return pop, feasible_front(pop)
