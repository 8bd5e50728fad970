"""Scenario figure rendering.

Each report figure shows the corridor bounds, the obstacle disk with
opacity scaled by its danger level, the planned polyline and, when
available, the social force trajectory. Figures are written as SVG
with a fixed hash salt and no date metadata so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

from .env import DEST_Y, START_Y, X_MAX, X_MIN, Scenario  # noqa: E402
from .rewards import polyline_points  # noqa: E402

plt.rcParams["svg.hashsalt"] = "pedpath"


def render_scenario(path, scenario: Scenario, plan=None, trajectory=None,
                    title: str = "") -> None:
    """Draw one scenario and save it as a deterministic SVG."""
    fig, ax = plt.subplots(figsize=(4.0, 7.0))
    ax.add_patch(Rectangle((X_MIN, START_Y), X_MAX - X_MIN, DEST_Y - START_Y,
                           fill=False, edgecolor="0.3", linewidth=1.2))
    obs = scenario.obstacle
    if obs is not None:
        ax.add_patch(Circle((obs.cx, obs.cy), obs.radius, color="tab:red",
                            alpha=0.15 + 0.7 * obs.danger, linewidth=0))
    if plan is not None:
        pts = polyline_points(scenario, plan)
        ax.plot(pts[:, 0], pts[:, 1], "o-", color="tab:blue", markersize=3,
                label="planned path")
    if trajectory is not None:
        ax.plot(trajectory.pos[:, 0], trajectory.pos[:, 1], "-",
                color="tab:green", label="social force")
    ax.plot([scenario.start_x], [START_Y], "k^", markersize=7)
    ax.plot([scenario.dest_x], [DEST_Y], "k*", markersize=10)
    ax.set_xlim(X_MIN - 1, X_MAX + 1)
    ax.set_ylim(START_Y - 1, DEST_Y + 1)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if title:
        ax.set_title(title)
    if plan is not None or trajectory is not None:
        ax.legend(loc="lower right", fontsize=8)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
