"""Multi-criteria branch and bound with NSGA-II node bounding.

Each node restricts the integer/categorical slots to a box of index ranges and
is solved by NSGA-II. The node's feasible front is its upper bound and the
front's ideal point its (heuristic) lower bound. A node is pruned when NSGA-II
finds nothing feasible or when an incumbent member dominates its ideal point;
otherwise its front joins the incumbent list and the node is split in two.

With the legacy feature on, both children start NSGA-II from the parent's
final population, clamped into their own domains.
"""

from __future__ import annotations

import enum
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .model import ContractError, Individual, ProblemDef, dominates
from .nsga2 import GAParams, Observer, Population, evolve, seed_population


class NodeStatus(str, enum.Enum):
    OPEN = "open"
    FATHOMED_INFEASIBLE = "fathomed_infeasible"
    FATHOMED_OPTIMALITY = "fathomed_optimality"
    BRANCHED = "branched"
    LEAF = "leaf"


class Verdict(str, enum.Enum):
    OPTIMALITY = "optimality"
    KEEP = "keep"


class NoLowerBound(ValueError):
    """Raised when an ideal point is requested for an empty front."""


@dataclass
class Node:
    id: int
    parent_id: int | None
    depth: int
    int_domains: np.ndarray
    status: NodeStatus = NodeStatus.OPEN
    legacy_pop: Population | None = None
    front: list[Individual] | None = None
    ideal: np.ndarray | None = None
    final_pop: Population | None = None
    branch_var: int | None = None
    split: tuple[tuple[int, int], tuple[int, int]] | None = None

    def __post_init__(self):
        self.int_domains = np.asarray(self.int_domains, dtype=np.int64).reshape(-1, 2)
        if np.any(self.int_domains[:, 0] > self.int_domains[:, 1]):
            raise ContractError(f"node {self.id}: empty integer domain")

    @property
    def is_leaf(self) -> bool:
        return bool(np.all(self.int_domains[:, 0] == self.int_domains[:, 1]))

    @property
    def cardinality(self) -> int:
        return int(np.prod(self.int_domains[:, 1] - self.int_domains[:, 0] + 1, dtype=float))


def root_node(problem: ProblemDef) -> Node:
    specs = [problem.specs[i] for i in problem.int_slots]
    return Node(0, None, 0, [(int(s.lo), int(s.hi)) for s in specs])


class IncumbentList:
    """Archive of node fronts. Reduction to a Pareto set is lazy."""

    def __init__(self):
        self.entries: list[tuple[int, list[Individual]]] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.entries)

    def merge(self, node_id: int, front: Sequence[Individual]) -> IncumbentList:
        bad = [i for i, ind in enumerate(front) if not ind.feasible]
        if bad:
            v = [front[i].violation for i in bad]
            raise ContractError(f"node {node_id}: infeasible front members at {bad} (violations {v})")
        with self._lock:
            self.entries.append((node_id, list(front)))
        return self

    def snapshot(self) -> list[Individual]:
        with self._lock:
            return [ind for _, front in self.entries for ind in front]


def merge_incumbent(incumbent: IncumbentList, node_id: int, node_front: Sequence[Individual]) -> IncumbentList:
    return incumbent.merge(node_id, node_front)


def _pareto_mask(F: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """Rows of ``F`` not dominated by any other row, checked in column chunks."""
    keep = np.ones(len(F), dtype=bool)
    for start in range(0, len(F), chunk):
        block = F[start:start + chunk]
        le = np.ones((len(F), len(block)), dtype=bool)
        lt = np.zeros_like(le)
        for k in range(F.shape[1]):
            le &= F[:, k, None] <= block[None, :, k]
            lt |= F[:, k, None] < block[None, :, k]
        keep[start:start + chunk] = ~np.any(le & lt, axis=0)
    return keep


def extract_front(incumbent: IncumbentList | Sequence[Individual]) -> list[Individual]:
    """Non-dominated union of all stored fronts, one member per objective vector."""
    members = incumbent.snapshot() if isinstance(incumbent, IncumbentList) else list(incumbent)
    if not members:
        return []
    F = np.array([m.f for m in members], dtype=float)
    _, first = np.unique(F, axis=0, return_index=True)
    first = np.sort(first)
    keep = first[_pareto_mask(F[first])]
    return [members[i] for i in keep]


def ideal_point(front: Sequence[Individual] | np.ndarray) -> np.ndarray:
    if isinstance(front, np.ndarray):
        F = front
    else:
        F = np.array([ind.f for ind in front], dtype=float)
    if len(F) == 0:
        raise NoLowerBound("no lower bound available: empty front")
    return F.min(axis=0)


def fathom_check(node_ideal: np.ndarray, incumbent: IncumbentList | Sequence[Individual]) -> Verdict:
    """Optimality when some incumbent member dominates the node's ideal point.

    Dominance is transitive, so scanning the unreduced archive gives the same
    verdict as scanning its Pareto front.
    """
    members = incumbent.snapshot() if isinstance(incumbent, IncumbentList) else list(incumbent)
    if not members:
        return Verdict.KEEP
    F = np.array([m.f for m in members], dtype=float)
    ideal = np.asarray(node_ideal, dtype=float)
    hit = np.all(F <= ideal, axis=1) & np.any(F < ideal, axis=1)
    return Verdict.OPTIMALITY if hit.any() else Verdict.KEEP


def select_branch_var(node: Node) -> int:
    """Non-singleton variable with the largest domain; ties go to the lowest index."""
    card = node.int_domains[:, 1] - node.int_domains[:, 0] + 1
    if np.all(card == 1):
        raise ContractError(f"node {node.id} is a leaf and cannot be branched")
    return int(np.argmax(card))


def branch(node: Node, next_id: int, legacy: bool = True) -> tuple[Node, Node]:
    """Split the chosen domain at ``floor((lo + hi) / 2)`` into two children."""
    if node.is_leaf:
        raise ContractError(f"node {node.id} is a leaf and cannot be branched")
    k = select_branch_var(node)
    lo, hi = (int(v) for v in node.int_domains[k])
    mid = (lo + hi) // 2
    dom_a = node.int_domains.copy()
    dom_b = node.int_domains.copy()
    dom_a[k] = (lo, mid)
    dom_b[k] = (mid + 1, hi)
    inherited = node.final_pop if legacy else None
    a = Node(next_id, node.id, node.depth + 1, dom_a, legacy_pop=inherited)
    b = Node(next_id + 1, node.id, node.depth + 1, dom_b, legacy_pop=inherited)
    node.status = NodeStatus.BRANCHED
    node.branch_var = k
    node.split = ((lo, mid), (mid + 1, hi))
    return a, b


def rebound_population(
    pop: Population,
    child: Node,
    problem: ProblemDef,
    rng: np.random.Generator | None = None,
    observer: Observer | None = None,
) -> Population:
    """Clamp integer slots into the child's domains and re-evaluate every member.

    ``problem`` is the unrestricted problem; ``rng`` is unused because clamping
    is deterministic, and is accepted for interface symmetry.
    """
    X = pop.X.copy()
    slots = problem.int_slots
    X[:, slots] = np.clip(X[:, slots], child.int_domains[:, 0], child.int_domains[:, 1])
    return Population.evaluated(problem.restrict(child.int_domains), X, observer)


@dataclass(frozen=True)
class TreePolicy:
    """Search rules and budgets for one branch-and-bound run.

    ``branch_infeasible`` and ``stop_after_feasible`` are the two overrides used
    when the tree serves as a feasibility seeder.
    """

    legacy: bool = True
    node_generations: int = 50
    leaf_generations: int | None = None
    max_nodes: int = 10_000
    time_limit_s: float | None = 1800.0
    branch_infeasible: bool = False
    stop_after_feasible: int | None = None

    def __post_init__(self):
        if self.max_nodes < 1:
            raise ContractError("max_nodes must be >= 1")
        if self.stop_after_feasible is not None and self.stop_after_feasible < 1:
            raise ContractError("stop_after_feasible must be >= 1")


@dataclass
class TreeResult:
    front: list[Individual]
    log: list[dict]
    nodes: dict[int, Node]
    incumbent: IncumbentList
    truncated: bool = False
    stopped_by: int | None = None
    wall_time_s: float = 0.0
    solved: int = 0

    def status_counts(self) -> dict[str, int]:
        counts = {s.value: 0 for s in NodeStatus}
        for rec in self.log:
            counts[rec["status"]] += 1
        return counts


def node_rng(params: GAParams, node_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([params.rng_seed, node_id]))


def solve_node(
    node: Node,
    problem: ProblemDef,
    params: GAParams,
    policy: TreePolicy | None = None,
    *,
    observer: Observer | None = None,
    should_stop: Callable[[], bool] | None = None,
    deadline: float | None = None,
) -> tuple[list[Individual], Population, bool]:
    """Bound one node with NSGA-II; returns ``(front, final_pop, feasible)``."""
    if node.status != NodeStatus.OPEN:
        raise ContractError(f"node {node.id} is {node.status.value}, expected open")
    policy = policy or TreePolicy()
    rng = node_rng(params, node.id)
    restricted = problem.restrict(node.int_domains)
    if node.legacy_pop is not None:
        initial = rebound_population(node.legacy_pop, node, problem, rng, observer)
    else:
        initial = seed_population(restricted, params.pop_size, [], rng, observer)
    if node.is_leaf:
        gens = params.max_generations if policy.leaf_generations is None else policy.leaf_generations
    else:
        gens = policy.node_generations
    if node.is_leaf and problem.int_mask.all():
        gens = 0  # every member is the same point; nothing left to search
    final_pop, front = evolve(
        restricted, params, initial, rng=rng, generations=gens,
        observer=observer, should_stop=should_stop, deadline=deadline,
    )
    node.front = front
    node.final_pop = final_pop
    node.ideal = ideal_point(front) if front else None
    node.legacy_pop = None
    return front, final_pop, bool(front)


def _record(node: Node, wall: float) -> dict:
    return {
        "id": node.id,
        "parent": node.parent_id,
        "depth": node.depth,
        "status": node.status.value,
        "branch_var": node.branch_var,
        "split": None if node.split is None else [list(node.split[0]), list(node.split[1])],
        "domains": node.int_domains.tolist(),
        "ideal": None if node.ideal is None else node.ideal.tolist(),
        "front_size": 0 if node.front is None else len(node.front),
        "wall_time_s": wall,
    }


def run_tree(
    problem: ProblemDef,
    params: GAParams,
    policy: TreePolicy | None = None,
    *,
    observer: Observer | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> TreeResult:
    """Depth-first branch and bound over the integer/categorical slots.

    The lower half of a split is explored first. The run ends when the
    worklist empties, the node or time budget runs out (``truncated``), or,
    under ``stop_after_feasible``, a node yields enough feasible points.
    """
    policy = policy or TreePolicy()
    t0 = time.monotonic()
    deadline = None if policy.time_limit_s is None else t0 + policy.time_limit_s
    incumbent = IncumbentList()
    root = root_node(problem)
    nodes = {root.id: root}
    stack = [root]
    log: list[dict] = []
    next_id = 1
    solved = 0
    truncated = False
    stopped_by = None

    while stack:
        if solved >= policy.max_nodes or (deadline is not None and time.monotonic() > deadline):
            truncated = True
            break
        if should_stop is not None and should_stop():
            truncated = True
            break
        node = stack.pop()
        t_node = time.monotonic()
        front, _, feasible = solve_node(
            node, problem, params, policy, observer=observer, should_stop=should_stop, deadline=deadline
        )
        solved += 1
        children = ()
        stop = policy.stop_after_feasible is not None and len(front) >= policy.stop_after_feasible
        if not feasible:
            if policy.branch_infeasible and not node.is_leaf:
                children = branch(node, next_id, policy.legacy)
            else:
                node.status = NodeStatus.FATHOMED_INFEASIBLE
        elif fathom_check(node.ideal, incumbent) is Verdict.OPTIMALITY:
            node.status = NodeStatus.FATHOMED_OPTIMALITY
        else:
            incumbent.merge(node.id, front)
            if node.is_leaf:
                node.status = NodeStatus.LEAF
            elif not stop:
                children = branch(node, next_id, policy.legacy)
            # a stopping inner node stays open: its subtree is never explored
        log.append(_record(node, time.monotonic() - t_node))
        for child in children:
            nodes[child.id] = child
        next_id += len(children)
        stack.extend(reversed(children))
        if stop:
            stopped_by = node.id
            break
        # children hold the legacy population; drop ours to bound memory
        node.final_pop = None

    for node in stack:
        log.append(_record(node, 0.0))
    return TreeResult(
        extract_front(incumbent), log, nodes, incumbent, truncated, stopped_by, time.monotonic() - t0, solved
    )
