"""A miniature version of the four-method study, with plots.

Each method gets the same small budget and the same seeds. The script writes
battery files and SVG charts to ``demo_results/`` and prints converged counts.
Scale ``runs`` and the GA budget up for a real study, or use the
``bnbnsga compare`` command.

Run: python demos/method_comparison.py
"""

from bnbnsga.experiment import BnBBudget, ExperimentSpec, compare
from bnbnsga.nsga2 import GAParams
from bnbnsga.plots import render_outputs


def main():
    spec = ExperimentSpec(
        problem="reference",
        runs=3,
        ga=GAParams(pop_size=60, max_generations=60),
        bnb=BnBBudget(node_generations=15, max_nodes=20),
        explored_cap=5000,
        output_dir="demo_results",
    )
    reports = compare(spec)
    for path in render_outputs(reports, spec.output_dir):
        print(f"wrote {path}")
    for method, report in reports.items():
        print(f"{method:18s} converged {report.converged_count}/{report.runs}")


if __name__ == "__main__":
    main()
