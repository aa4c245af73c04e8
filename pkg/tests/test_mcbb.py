import numpy as np
import pytest

from _support import domain_cells, root_domains, tiling_errors
from bnbnsga.mcbb import (
    IncumbentList,
    Node,
    NodeStatus,
    NoLowerBound,
    TreePolicy,
    Verdict,
    branch,
    extract_front,
    fathom_check,
    ideal_point,
    merge_incumbent,
    rebound_population,
    root_node,
    run_tree,
    select_branch_var,
    solve_node,
)
from bnbnsga.model import ContractError, Individual, Integer, ProblemDef, dominates
from bnbnsga.nsga2 import GAParams, Population, seed_population
from bnbnsga.oracle import nondominated, toy_instances

SMALL = GAParams(pop_size=16, max_generations=10)


def feasible(*points):
    return [Individual(np.zeros(1), np.asarray(p, dtype=float), np.zeros(1), 0.0) for p in points]


def objs(front):
    return sorted(tuple(m.f.tolist()) for m in front)


def two_value_problem():
    def ev(X):
        y = X[:, 0]
        return np.c_[y, 1.0 - y], np.zeros((len(X), 1)) - 1.0

    return ProblemDef([Integer("y", 0, 1)], 2, 1, ev, vectorized=True)


class TestIdealAndFathom:
    def test_ideal_examples(self):
        assert ideal_point(feasible((1, 2), (2, 1))).tolist() == [1, 1]
        assert ideal_point(feasible((3, 4))).tolist() == [3, 4]

    def test_ideal_random_matches_scan(self, rng):
        F = rng.random((50, 2))
        expected = [min(row[k] for row in F) for k in range(2)]
        assert ideal_point(feasible(*F)).tolist() == expected

    def test_empty_front_has_no_bound(self):
        with pytest.raises(NoLowerBound, match="no lower bound"):
            ideal_point([])

    def test_fathom_verdicts(self):
        inc = IncumbentList().merge(0, feasible((1, 1), (3, 0.5)))
        assert fathom_check(np.array([2.0, 2.0]), inc) is Verdict.OPTIMALITY
        assert fathom_check(np.array([0.5, 3.0]), inc) is Verdict.KEEP
        assert fathom_check(np.array([1.0, 1.0]), inc) is Verdict.KEEP
        assert fathom_check(np.array([1.0, 1.0]), IncumbentList()) is Verdict.KEEP


class TestBranch:
    def test_midpoint_split(self):
        node = Node(0, None, 0, [[14, 30]])
        a, b = branch(node, 1)
        assert a.int_domains.tolist() == [[14, 22]] and b.int_domains.tolist() == [[23, 30]]
        assert node.status is NodeStatus.BRANCHED and node.split == ((14, 22), (23, 30))

    def test_two_value_split(self):
        a, b = branch(Node(0, None, 0, [[5, 6]]), 1)
        assert a.int_domains.tolist() == [[5, 5]] and b.int_domains.tolist() == [[6, 6]]
        assert a.is_leaf and b.is_leaf

    def test_leaf_cannot_branch(self):
        with pytest.raises(ContractError):
            branch(Node(0, None, 0, [[3, 3], [4, 4]]), 1)

    def test_largest_domain_lowest_index(self):
        assert select_branch_var(Node(0, None, 0, [[0, 3], [0, 9], [0, 9]])) == 1

    def test_children_inherit_final_population(self):
        node = Node(0, None, 0, [[0, 3]])
        node.final_pop = object()
        a, b = branch(node, 1, legacy=True)
        assert a.legacy_pop is node.final_pop and b.legacy_pop is node.final_pop
        c, d = branch(Node(0, None, 0, [[0, 3]]), 1, legacy=False)
        assert c.legacy_pop is None and d.legacy_pop is None

    def test_exhaustive_branching_partitions_domain(self):
        root = Node(0, None, 0, [[0, 6], [2, 9]])
        leaves, stack, next_id = [], [root], 1
        while stack:
            node = stack.pop()
            if node.is_leaf:
                leaves.append(tuple(node.int_domains[:, 0]))
                continue
            children = branch(node, next_id)
            next_id += 2
            stack.extend(children)
        assert len(leaves) == len(set(leaves)) == 7 * 8
        assert set(leaves) == domain_cells([[0, 6], [2, 9]])


class TestRebound:
    def problem(self):
        return toy_instances()[1].problem  # y1, y2 in [0, 5], x in [0, 2]

    def test_inside_unchanged(self, rng):
        p = self.problem()
        pop = seed_population(p.restrict([[1, 2], [0, 5]]), 10, [], rng)
        child = Node(1, 0, 1, [[1, 2], [0, 5]])
        out = rebound_population(pop, child, p)
        assert np.array_equal(out.X, pop.X) and np.array_equal(out.F, pop.F)

    def test_clamp_to_nearest_bound(self):
        specs = [Integer("y", 0, 30)]
        p = ProblemDef(specs, 2, 0, lambda X: (np.c_[X[:, 0], -X[:, 0]], np.zeros((len(X), 0))), vectorized=True)
        pop = Population.evaluated(p, np.array([[10.0], [25.0], [15.0]]))
        out = rebound_population(pop, Node(1, 0, 1, [[12, 20]]), p)
        assert out.X[:, 0].tolist() == [12.0, 20.0, 15.0]
        assert out.F[:, 0].tolist() == [12.0, 20.0, 15.0]

    def test_full_population_satisfies_child(self, rng):
        p = self.problem()
        pop = seed_population(p, 200, [], rng)
        child = Node(1, 0, 1, [[3, 5], [0, 2]])
        out = rebound_population(pop, child, p)
        assert len(out) == 200
        restricted = p.restrict(child.int_domains)
        for x in out.X:
            restricted.check(x)
        assert np.array_equal(out.X[:, 2], pop.X[:, 2])


class TestIncumbent:
    def test_merge_examples(self):
        inc = merge_incumbent(IncumbentList(), 0, feasible((1, 1)))
        assert len(inc) == 1
        merge_incumbent(inc, 1, feasible((5, 5)))
        assert len(inc) == 2 and [e[0] for e in inc.entries] == [0, 1]

    def test_merge_rejects_infeasible(self):
        bad = [Individual(np.zeros(1), np.zeros(2), np.ones(1), 1.0)]
        with pytest.raises(ContractError, match="infeasible"):
            IncumbentList().merge(0, bad)

    def test_reduce_keeps_mutually_nondominated(self):
        inc = IncumbentList().merge(0, feasible((1, 3))).merge(1, feasible((2, 2), (0, 9)))
        assert objs(extract_front(inc)) == [(0, 9), (1, 3), (2, 2)]

    def test_extract_examples(self):
        inc = IncumbentList().merge(0, feasible((1, 1))).merge(1, feasible((2, 2)))
        assert objs(extract_front(inc)) == [(1, 1)]
        inc = IncumbentList().merge(0, feasible((1, 2), (2, 2), (1, 2)))
        assert objs(extract_front(inc)) == [(1, 2)]

    def test_extract_matches_oracle(self, rng):
        inc = IncumbentList()
        pts = []
        for k in range(5):
            front = feasible(*rng.integers(0, 30, (20, 2)))
            pts += front
            inc.merge(k, front)
        assert objs(extract_front(inc)) == objs(nondominated(pts))


class TestTree:
    def test_all_infeasible(self):
        def ev(X):
            return np.c_[X[:, 0], -X[:, 0]], np.ones((len(X), 1))

        p = ProblemDef([Integer("y", 0, 7)], 2, 1, ev, vectorized=True)
        res = run_tree(p, SMALL, TreePolicy(node_generations=3))
        assert res.front == []
        assert {r["status"] for r in res.log} == {"fathomed_infeasible"}

    def test_two_value_tree_shape(self):
        res = run_tree(two_value_problem(), SMALL, TreePolicy(node_generations=3))
        assert [r["status"] for r in res.log] == ["branched", "leaf", "leaf"]
        assert [r["parent"] for r in res.log] == [None, 0, 0]
        assert objs(res.front) == [(0.0, 1.0), (1.0, 0.0)]

    def test_node_budget_truncates(self):
        toy = toy_instances()[1]
        res = run_tree(toy.problem, SMALL, TreePolicy(node_generations=2, max_nodes=5))
        assert res.truncated
        assert res.solved == 5 == sum(r["status"] != "open" for r in res.log)
        assert tiling_errors(res.log, root_domains(toy.problem)) == []

    @pytest.mark.parametrize("legacy", [True, False])
    def test_partition_and_fathoming_audit(self, legacy):
        toy = toy_instances()[4]
        params = GAParams(pop_size=16, max_generations=8, rng_seed=2)
        res = run_tree(toy.problem, params, TreePolicy(legacy=legacy, node_generations=5))
        assert not res.truncated
        assert tiling_errors(res.log, root_domains(toy.problem)) == []
        order = {r["id"]: k for k, r in enumerate(res.log)}
        for k, rec in enumerate(res.log):
            if rec["status"] == "fathomed_optimality":
                earlier = [m for nid, front in res.incumbent.entries if order[nid] < k for m in front]
                assert any(dominates(m.f, rec["ideal"]) for m in earlier)
        final = res.front
        assert all(m.feasible for m in final)
        for a in final:
            assert not any(dominates(b.f, a.f) for b in final)

    def test_pure_integer_leaf_skips_generations(self):
        toy = toy_instances()[3]
        node = Node(0, None, 0, [[2, 2], [7, 7]])
        _, pop, _ = solve_node(node, toy.problem, SMALL)
        assert pop.generation == 0

    def test_root_node_spans_problem(self):
        toy = toy_instances()[2]
        assert root_node(toy.problem).int_domains.tolist() == [[0, 5], [1, 8]]

    def test_tree_is_deterministic(self):
        toy = toy_instances()[0]
        params = GAParams(pop_size=16, max_generations=6, rng_seed=4)
        a = run_tree(toy.problem, params, TreePolicy(node_generations=4))
        b = run_tree(toy.problem, params, TreePolicy(node_generations=4))
        assert objs(a.front) == objs(b.front)
        strip = lambda log: [{k: v for k, v in r.items() if k != "wall_time_s"} for r in log]  # noqa: E731
        assert strip(a.log) == strip(b.log)
