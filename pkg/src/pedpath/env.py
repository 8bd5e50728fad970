"""Corridor environment: geometry constants, scenario randomization,
observation encoding and the success-gated reset chain.

The walking area is a 22 m x 10 m corridor with x in [-5, 5] and
y in [-12, 10]. An agent starts on the y = -12 edge and must reach a
destination on the y = 10 edge. At most one circular obstacle may be
present; its "radius" covers the perceived interference region, not
just a physical footprint, and its danger level scales how strongly
the planned path should keep away from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

X_MIN = -5.0
X_MAX = 5.0
START_Y = -12.0
DEST_Y = 10.0
BOUNDARY_MARGIN = 4.5   # |x| beyond this counts as "too close to the wall"

OBSTACLE_Y_MIN = -10.0
OBSTACLE_Y_MAX = 8.0
RADIUS_MIN = 0.5
RADIUS_MAX = 2.0

# y-coordinates of the 10 path nodes the planner controls
NODE_YS = np.arange(-10.0, 9.0, 2.0)
N_NODES = 10

OBS_DIM = 7


@dataclass(frozen=True)
class Obstacle:
    """Circular interference region with a perceived danger level."""

    cx: float
    cy: float
    radius: float
    danger: float

    def __post_init__(self):
        if not (RADIUS_MIN <= self.radius <= RADIUS_MAX):
            raise ValueError(f"obstacle radius {self.radius} outside [{RADIUS_MIN}, {RADIUS_MAX}]")
        if not (0.0 <= self.danger <= 1.0):
            raise ValueError(f"danger level {self.danger} outside [0, 1]")
        if not (X_MIN <= self.cx <= X_MAX and OBSTACLE_Y_MIN <= self.cy <= OBSTACLE_Y_MAX):
            raise ValueError(f"obstacle center ({self.cx}, {self.cy}) outside corridor band")

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy])


@dataclass(frozen=True)
class Scenario:
    """One planning instance: start and destination edge positions plus
    an optional obstacle. Start y and destination y are fixed by the
    corridor geometry."""

    start_x: float
    dest_x: float
    obstacle: Obstacle | None = None

    def __post_init__(self):
        if not (X_MIN <= self.start_x <= X_MAX):
            raise ValueError(f"start_x {self.start_x} outside [{X_MIN}, {X_MAX}]")
        if not (X_MIN <= self.dest_x <= X_MAX):
            raise ValueError(f"dest_x {self.dest_x} outside [{X_MIN}, {X_MAX}]")

    @property
    def start(self) -> np.ndarray:
        return np.array([self.start_x, START_Y])

    @property
    def dest(self) -> np.ndarray:
        return np.array([self.dest_x, DEST_Y])


@dataclass(frozen=True)
class EnvConfig:
    """Scenario randomization knobs.

    p_obs is the chance that a fresh scenario contains an obstacle;
    retain_limit bounds how many consecutive collided plans keep the
    same scenario alive before a forced reset.
    """

    p_obs: float = 0.5
    retain_limit: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p_obs <= 1.0):
            raise ValueError(f"p_obs {self.p_obs} outside [0, 1]")
        if self.retain_limit < 0:
            raise ValueError("retain_limit must be >= 0")


def new_scenario(rng: np.random.Generator, cfg: EnvConfig) -> Scenario:
    """Draw a random scenario.

    Start and destination x are uniform over the corridor width. With
    probability cfg.p_obs an obstacle appears with uniform radius,
    danger and center. The draw order is fixed so a seeded generator
    reproduces scenarios exactly.
    """
    start_x = rng.uniform(X_MIN, X_MAX)
    dest_x = rng.uniform(X_MIN, X_MAX)
    obstacle = None
    if rng.random() < cfg.p_obs:
        obstacle = Obstacle(
            cx=rng.uniform(X_MIN, X_MAX),
            cy=rng.uniform(OBSTACLE_Y_MIN, OBSTACLE_Y_MAX),
            radius=rng.uniform(RADIUS_MIN, RADIUS_MAX),
            danger=rng.uniform(0.0, 1.0),
        )
    return Scenario(start_x=start_x, dest_x=dest_x, obstacle=obstacle)


def observe(scenario: Scenario) -> np.ndarray:
    """Encode a scenario as the 7-vector the policy consumes.

    Layout: [start_x, dest_x, presence_flag, obs_rel_x, obs_rel_y,
    obs_radius, obs_danger]. Start and destination x are in the
    corridor frame (center line at x = 0); the obstacle position is
    relative to the start. All obstacle entries are exactly zero when
    no obstacle is present, with the flag distinguishing "absent" from
    "at the start position".
    """
    out = np.zeros(OBS_DIM)
    out[0] = scenario.start_x
    out[1] = scenario.dest_x
    obs = scenario.obstacle
    if obs is not None:
        out[2] = 1.0
        out[3] = obs.cx - scenario.start_x
        out[4] = obs.cy - START_Y
        out[5] = obs.radius
        out[6] = obs.danger
    return out


@dataclass
class ResetState:
    """Success-gated reset chain for one environment worker.

    A collided plan keeps the current scenario (up to retain_limit
    consecutive times) so the policy cannot dodge hard scenarios by
    waiting for an easy redraw; a collision-free plan always triggers
    a fresh scenario.
    """

    scenario: Scenario
    retained_iterations: int = 0

    @classmethod
    def initial(cls, rng: np.random.Generator, cfg: EnvConfig) -> "ResetState":
        return cls(scenario=new_scenario(rng, cfg), retained_iterations=0)


def advance_reset(state: ResetState, collided: bool, rng: np.random.Generator,
                  cfg: EnvConfig) -> ResetState:
    """Advance the reset chain after one planning episode."""
    if collided and state.retained_iterations < cfg.retain_limit:
        return ResetState(scenario=state.scenario,
                          retained_iterations=state.retained_iterations + 1)
    return ResetState(scenario=new_scenario(rng, cfg), retained_iterations=0)
