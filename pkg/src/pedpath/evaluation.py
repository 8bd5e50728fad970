"""Scenario suites, path metrics, the derivative-free reference
optimizer, and side-by-side comparison of the learned planner against
the social force baseline.

The reference optimizer is a cross-entropy method over the 10-node
plan space. It serves as the ground-truth "best achievable reward"
oracle: slower than the trained policy but independent of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import policy
from .env import (BOUNDARY_MARGIN, NODE_YS, X_MAX, X_MIN, Obstacle, Scenario,
                  observe)
from .rewards import (RewardCoefficients, make_plan, polyline_points,
                      sample_path, straight_line_plan, total_reward,
                      total_reward_batch, turn_angles_deg)
from .sfm import SfmConfig, Trajectory, simulate

MIN_ORACLE_BUDGET = 10_000

CEM_POPULATION = 256
CEM_ELITE = 32
CEM_INIT_SIGMA = 2.0
CEM_MIN_SIGMA = 0.05


@dataclass(frozen=True)
class PathMetrics:
    total_length: float
    max_turn_deg: float
    min_clearance: float        # distance to obstacle edge; inf when absent
    left_fraction: float        # fraction of samples on the favoured side
    boundary_violations: int


def canonical_suite() -> list[tuple[str, Scenario]]:
    """The four standard comparison cases: (a) empty corridor,
    (b) obstacle off the direct path, (c) obstacle on the path with low
    danger, (d) the same obstacle with maximum danger."""
    on_path = dict(cx=0.5, cy=-1.0, radius=1.0)
    return [
        ("a", Scenario(0.0, 0.0)),
        ("b", Scenario(0.0, 0.0, Obstacle(cx=4.0, cy=-1.0, radius=1.0, danger=0.5))),
        ("c", Scenario(0.0, 0.0, Obstacle(danger=0.1, **on_path))),
        ("d", Scenario(0.0, 0.0, Obstacle(danger=1.0, **on_path))),
    ]


def suite_to_jsonable(suite) -> dict:
    scenarios = []
    for name, sc in suite:
        entry = {"name": name, "start_x": sc.start_x, "dest_x": sc.dest_x,
                 "obstacle": None}
        if sc.obstacle is not None:
            o = sc.obstacle
            entry["obstacle"] = {"cx": o.cx, "cy": o.cy, "radius": o.radius,
                                 "danger": o.danger}
        scenarios.append(entry)
    return {"scenarios": scenarios}


def save_suite(path, suite) -> None:
    with open(path, "w") as f:
        json.dump(suite_to_jsonable(suite), f, indent=2)
        f.write("\n")


def load_suite(path) -> list[tuple[str, Scenario]]:
    with open(path) as f:
        data = json.load(f)
    suite = []
    for entry in data["scenarios"]:
        obstacle = None
        if entry.get("obstacle") is not None:
            obstacle = Obstacle(**entry["obstacle"])
        suite.append((entry["name"],
                      Scenario(entry["start_x"], entry["dest_x"], obstacle)))
    return suite


def polyline_metrics(points: np.ndarray, scenario: Scenario,
                     side_sign: int = 1) -> PathMetrics:
    """Metrics of any polyline (planned path samples or an SFM track)."""
    diffs = np.diff(points, axis=0)
    seglen = np.linalg.norm(diffs, axis=1)
    moving = seglen > 1e-12
    segs = diffs[moving]
    max_turn = float(np.max(turn_angles_deg(segs))) if len(segs) > 1 else 0.0

    if scenario.obstacle is None:
        clearance = math.inf
    else:
        d = np.linalg.norm(points - scenario.obstacle.center, axis=1)
        clearance = float(np.min(d) - scenario.obstacle.radius)

    x = points[:, 0]
    return PathMetrics(
        total_length=float(seglen.sum()),
        max_turn_deg=max_turn,
        min_clearance=clearance,
        left_fraction=float(np.mean(side_sign * x > 0)),
        boundary_violations=int(np.sum(np.abs(x) >= BOUNDARY_MARGIN)),
    )


def plan_metrics(scenario: Scenario, plan: np.ndarray,
                 coeffs: RewardCoefficients) -> PathMetrics:
    samples = sample_path(scenario, plan, coeffs.sample_count)
    return polyline_metrics(samples, scenario, coeffs.side_sign)


def reference_optimize(scenario: Scenario, coeffs: RewardCoefficients,
                       budget: int, seed: int = 0) -> np.ndarray:
    """Cross-entropy search for the reward-optimal plan.

    Samples a Gaussian population per generation, refits mean and
    sigma to the elite, and always re-injects the straight center line
    and the straight start-to-destination line so the search can never
    end below those baselines. Returns the best plan ever scored;
    deterministic given the seed.
    """
    if budget < MIN_ORACLE_BUDGET:
        raise ValueError(f"budget must be >= {MIN_ORACLE_BUDGET}")
    rng = np.random.Generator(np.random.PCG64(seed))

    straight = straight_line_plan(scenario)
    mean = straight.copy()
    sigma = np.full(policy.ACT_DIM, CEM_INIT_SIGMA)

    best_plan = make_plan(straight)
    best_reward = -math.inf

    generations = budget // CEM_POPULATION
    for _ in range(max(1, generations)):
        pop = mean + sigma * rng.standard_normal((CEM_POPULATION - 2, policy.ACT_DIM))
        pop = np.vstack([pop, np.zeros(policy.ACT_DIM), straight])
        pop = np.clip(pop, X_MIN, X_MAX)
        rewards = total_reward_batch(scenario, pop, coeffs)

        order = np.argsort(rewards)[::-1]
        if rewards[order[0]] > best_reward:
            best_reward = float(rewards[order[0]])
            best_plan = pop[order[0]].copy()
        elite = pop[order[:CEM_ELITE]]
        mean = elite.mean(axis=0)
        sigma = np.maximum(elite.std(axis=0), CEM_MIN_SIGMA)
    return best_plan


def mean_action_plan(params: dict, scenario: Scenario) -> np.ndarray:
    """The deterministic plan: squashed mean of the action head."""
    mean, _, _ = policy.forward(params, observe(scenario))
    return policy.squash(mean)


def evaluate_policy(params: dict, suite, coeffs: RewardCoefficients,
                    n_draws: int = 0, seed: int = 0):
    """Per-scenario metrics and rewards for the mean-action plan.

    When n_draws > 0, also reports the average stochastic-plan reward
    over that many action draws.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = []
    for name, scenario in suite:
        plan = mean_action_plan(params, scenario)
        breakdown = total_reward(scenario, plan, coeffs)
        row = {
            "scenario": name,
            "plan": plan,
            "metrics": plan_metrics(scenario, plan, coeffs),
            "total_reward": breakdown.total,
        }
        if n_draws > 0:
            mean, log_std, _ = policy.forward(params, observe(scenario))
            draws = []
            for _ in range(n_draws):
                _, sampled, _ = policy.sample_action(mean, log_std, rng)
                draws.append(total_reward(scenario, sampled, coeffs).total)
            row["stochastic_mean_reward"] = float(np.mean(draws))
        rows.append(row)
    return rows


def trajectory_plan(trajectory: Trajectory, scenario: Scenario) -> np.ndarray:
    """Project an SFM track onto the node grid (x at each node y) so the
    same reward function can score both methods."""
    y = trajectory.pos[:, 1]
    x = trajectory.pos[:, 0]
    order = np.argsort(y)
    return make_plan(np.interp(NODE_YS, y[order], x[order]))


def compare_sfm(suite, sfm_cfg: SfmConfig, params: dict,
                coeffs: RewardCoefficients):
    """Side-by-side rows for each scenario: the learned planner's plan
    and the social force trajectory, with shared metrics columns."""
    rows = []
    for name, scenario in suite:
        plan = mean_action_plan(params, scenario)
        rows.append({
            "scenario": name, "method": "rl",
            "metrics": plan_metrics(scenario, plan, coeffs),
            "total_reward": total_reward(scenario, plan, coeffs).total,
            "plan": plan, "trajectory": None, "scenario_obj": scenario,
        })
        traj = simulate(scenario, sfm_cfg)
        rows.append({
            "scenario": name, "method": "sfm",
            "metrics": polyline_metrics(traj.pos, scenario, coeffs.side_sign),
            "total_reward": total_reward(scenario, trajectory_plan(traj, scenario),
                                         coeffs).total,
            "plan": None, "trajectory": traj, "scenario_obj": scenario,
        })
    return rows
