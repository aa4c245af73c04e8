"""Byte-stable SVG rendering of battery reports."""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import BatteryReport  # noqa: E402

FEASIBLE = "green"
INFEASIBLE = "red"
_RC = {"svg.hashsalt": "bnbnsga", "svg.fonttype": "path", "path.simplify": False}


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _no_data(ax) -> None:
    ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)


def explored_scatter(report: BatteryReport, path: str | Path) -> Path:
    """Explored points (feasible green, infeasible red) with every run's front on top."""
    path = Path(path)
    explored = np.array([row for r in report.records for row in r.explored], dtype=float).reshape(-1, 3)
    front = np.array([row for r in report.records for row in r.front], dtype=float).reshape(-1, 3)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        if len(explored) == 0 and len(front) == 0:
            _no_data(ax)
        feas = explored[:, 2] > 0
        if (~feas).any():
            ax.scatter(explored[~feas, 0], explored[~feas, 1], s=4, c=INFEASIBLE, label="infeasible", gid="infeasible")
        if feas.any():
            ax.scatter(explored[feas, 0], explored[feas, 1], s=4, c=FEASIBLE, label="feasible", gid="feasible")
        if len(front):
            ax.scatter(front[:, 0], front[:, 1], s=18, facecolors="none", edgecolors="black",
                       label="front", gid="front")
        ax.set_xlabel("f1")
        ax.set_ylabel("f2")
        ax.set_title(f"{report.method}: explored domain")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc="upper right")
        _save(fig, path)
    return path


def converged_bars(reports: Mapping[str, BatteryReport], path: str | Path) -> Path:
    """Bar chart of converged-run counts per method."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        if not reports:
            _no_data(ax)
        names = list(reports)
        counts = [reports[m].converged_count for m in names]
        ax.bar(range(len(names)), counts, color="tab:blue")
        ax.set_xticks(range(len(names)), names, rotation=15)
        ax.set_ylabel("converged runs")
        top = max([r.runs for r in reports.values()], default=1)
        ax.set_ylim(0, top)
        fig.tight_layout()
        _save(fig, path)
    return path


def render_outputs(reports: BatteryReport | Mapping[str, BatteryReport], out_dir: str | Path) -> list[Path]:
    """Write one scatter per battery plus the converged-count bar chart."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(reports, BatteryReport):
        reports = {reports.method: reports}
    paths = [explored_scatter(r, out / f"explored_{m}.svg") for m, r in reports.items()]
    paths.append(converged_bars(reports, out / "converged.svg"))
    return paths
