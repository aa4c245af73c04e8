"""Find a feasible gear reducer with the tree, then polish it with NSGA-II.

Random initial populations rarely contain a feasible reducer. The seeder
branches the integer domain until some node's population holds feasible
designs, hands those to a fresh NSGA-II run, and reports what happened.

Run: python demos/feasibility_seeding.py
"""

from bnbnsga import GAParams, SeederPolicy, seeded_solve
from bnbnsga.reducer3s import assemble, preset


def main():
    problem = assemble(preset("reference"))
    params = GAParams(pop_size=100, max_generations=150, rng_seed=4)
    policy = SeederPolicy(legacy=True, node_generations=30, max_nodes=40, time_limit_s=300)

    front, report = seeded_solve(problem, params, policy)
    print(f"tree solved {report.harvest_nodes} nodes in {report.harvest_wall_time_s:.1f}s")
    print(f"node statuses: {report.tree_status}")
    print(f"harvested {report.seed_count} feasible seeds")
    if not front:
        print("no feasible design this time; try another rng_seed or a larger budget")
        return
    print(f"final front ({len(front)} designs), volume in mm^3 and relative ratio error:")
    for ind in sorted(front, key=lambda m: m.f[0]):
        print(f"  {ind.f[0]:12.1f}  {ind.f[1]:.4f}")


if __name__ == "__main__":
    main()
