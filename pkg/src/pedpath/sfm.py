"""Social force baseline: driving force toward the destination plus
exponential repulsion from the obstacle and the corridor walls.

Parameters follow the standard circular-specification social force
literature (desired speed 1.34 m/s, relaxation time 0.5 s). The danger
level plays no role here, which is exactly the behavioural gap the
learned planner is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import X_MAX, X_MIN, Scenario


class NonConvergence(RuntimeError):
    """The integrator hit max_steps before reaching the destination."""


@dataclass(frozen=True)
class SfmConfig:
    desired_speed: float = 1.34
    relaxation_time: float = 0.5
    obstacle_strength: float = 2.1
    obstacle_range: float = 0.35
    wall_strength: float = 10.0
    wall_range: float = 0.2
    dt: float = 0.05
    max_steps: int = 2000
    arrival_radius: float = 0.3

    def __post_init__(self):
        for name in ("desired_speed", "relaxation_time", "obstacle_strength",
                     "obstacle_range", "wall_strength", "wall_range", "dt",
                     "arrival_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.dt > 0.1:
            raise ValueError("dt must be <= 0.1 for a stable integration")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class Trajectory:
    """Time series of the integrated agent state."""

    t: np.ndarray
    pos: np.ndarray   # (n, 2)
    vel: np.ndarray   # (n, 2)

    def as_rows(self) -> np.ndarray:
        """Columns t, x, y, vx, vy."""
        return np.column_stack([self.t, self.pos, self.vel])


def acceleration(pos: np.ndarray, vel: np.ndarray, scenario: Scenario,
                 cfg: SfmConfig) -> np.ndarray:
    """Total social force per unit mass at the given state."""
    to_dest = scenario.dest - pos
    dist = np.linalg.norm(to_dest)
    e_dest = to_dest / dist if dist > 0 else np.zeros(2)
    acc = (cfg.desired_speed * e_dest - vel) / cfg.relaxation_time

    obs = scenario.obstacle
    if obs is not None:
        away = pos - obs.center
        d = np.linalg.norm(away)
        if d > 0:
            acc = acc + cfg.obstacle_strength * \
                np.exp((obs.radius - d) / cfg.obstacle_range) * (away / d)

    # walls at x = +-5 push inward; contributions cancel exactly at x = 0
    push = cfg.wall_strength * (np.exp(-(pos[0] - X_MIN) / cfg.wall_range)
                                - np.exp(-(X_MAX - pos[0]) / cfg.wall_range))
    acc = acc + np.array([push, 0.0])
    return acc


def sfm_step(pos: np.ndarray, vel: np.ndarray, scenario: Scenario,
             cfg: SfmConfig) -> tuple[np.ndarray, np.ndarray]:
    """One semi-implicit Euler step of size dt."""
    vel = vel + cfg.dt * acceleration(pos, vel, scenario, cfg)
    pos = pos + cfg.dt * vel
    return pos, vel


def simulate(scenario: Scenario, cfg: SfmConfig) -> Trajectory:
    """Integrate from rest at the start until the agent comes within
    arrival_radius of the destination. Raises NonConvergence if
    max_steps elapse first."""
    pos = scenario.start.astype(float)
    vel = np.zeros(2)
    ts, positions, velocities = [0.0], [pos.copy()], [vel.copy()]
    for step in range(1, cfg.max_steps + 1):
        pos, vel = sfm_step(pos, vel, scenario, cfg)
        ts.append(step * cfg.dt)
        positions.append(pos.copy())
        velocities.append(vel.copy())
        if np.linalg.norm(scenario.dest - pos) < cfg.arrival_radius:
            return Trajectory(np.array(ts), np.array(positions), np.array(velocities))
    raise NonConvergence(
        f"agent did not reach the destination within {cfg.max_steps} steps")
