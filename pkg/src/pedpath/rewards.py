"""Comfort-based reward engine for planned corridor paths.

A plan is 10 node x-coordinates on the fixed y-grid {-10, -8, ..., 8}.
Together with the start and destination it defines a 12-point
polyline. Six component rewards score that polyline:

  r1  shortest path  (negative sum of squared segment lengths, plus bias)
  r2  direction changes above 30 degrees
  r3  lateral motion (favour walking parallel to the corridor sides)
  r4  side-keeping   (penalize samples on the wrong side of the center)
  r5  wall proximity (penalize samples with |x| >= 4.5)
  r6  obstacle interference, scaled by danger^2

r1 and r2 work on the 11 segment vectors; r3..r6 work on N points
sampled uniformly in arc length along the polyline. The total is the
kappa-weighted sum of the six components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import NODE_YS, N_NODES, X_MIN, X_MAX, BOUNDARY_MARGIN, Obstacle, Scenario

TURN_LIMIT_DEG = 30.0


@dataclass(frozen=True)
class RewardCoefficients:
    """Weights and shape parameters of the total reward.

    kappa orders the six component weights; bias_b shifts r1 so a
    satisfactory path can score non-negative; sample_count is N, the
    number of arc-length samples; side_sign selects which side of the
    road counts as the "correct" walking side (+1 penalizes x <= 0).
    """

    kappa: tuple[float, float, float, float, float, float] = (0.02, 0.5, 0.2, 0.01, 0.5, 1.0)
    bias_b: float = 44.0
    sample_count: int = 110
    side_sign: int = 1

    def __post_init__(self):
        if len(self.kappa) != 6:
            raise ValueError("kappa must have exactly 6 entries")
        if any(not np.isfinite(k) or k < 0 for k in self.kappa):
            raise ValueError("kappa entries must be finite and non-negative")
        if self.sample_count < 12:
            raise ValueError("sample_count must be >= 12")
        if self.side_sign not in (1, -1):
            raise ValueError("side_sign must be +1 or -1")


@dataclass(frozen=True)
class RewardBreakdown:
    r1: float
    r2: float
    r3: float
    r4: float
    r5: float
    r6: float
    total: float

    def components(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3, self.r4, self.r5, self.r6])


def make_plan(node_x) -> np.ndarray:
    """Coerce 10 values into a valid plan, clamping to the corridor."""
    plan = np.asarray(node_x, dtype=float)
    if plan.shape != (N_NODES,):
        raise ValueError(f"plan must have exactly {N_NODES} entries, got shape {plan.shape}")
    return np.clip(plan, X_MIN, X_MAX)


def straight_line_plan(scenario: Scenario) -> np.ndarray:
    """Node x-coordinates of the straight start-to-destination line."""
    frac = (NODE_YS - scenario.start[1]) / (scenario.dest[1] - scenario.start[1])
    return scenario.start_x + frac * (scenario.dest_x - scenario.start_x)


def polyline_points(scenario: Scenario, plan: np.ndarray) -> np.ndarray:
    """The 12-point polyline start -> 10 nodes -> destination, shape (12, 2)."""
    pts = np.empty((N_NODES + 2, 2))
    pts[0] = scenario.start
    pts[1:-1, 0] = plan
    pts[1:-1, 1] = NODE_YS
    pts[-1] = scenario.dest
    return pts


def build_segments(scenario: Scenario, plan: np.ndarray) -> np.ndarray:
    """The 11 difference vectors along the polyline, shape (11, 2).

    Every segment advances y by exactly +2 by construction.
    """
    return np.diff(polyline_points(scenario, plan), axis=0)


def sample_path(scenario: Scenario, plan: np.ndarray, n: int) -> np.ndarray:
    """Sample the polyline at n points uniform in cumulative arc length.

    Endpoints are included exactly: the first sample is the start, the
    last is the destination.
    """
    if n < 12:
        raise ValueError("need at least 12 samples")
    pts = polyline_points(scenario, plan)
    seglen = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    targets = np.linspace(0.0, cum[-1], n)
    x = np.interp(targets, cum, pts[:, 0])
    y = np.interp(targets, cum, pts[:, 1])
    samples = np.column_stack([x, y])
    samples[0] = pts[0]
    samples[-1] = pts[-1]
    return samples


def heaviside(n) -> np.ndarray:
    """Step function: 0 for negative input, 1 otherwise (theta(0) = 1)."""
    return np.where(np.asarray(n, dtype=float) >= 0.0, 1.0, 0.0)


def turn_angles_deg(segments: np.ndarray) -> np.ndarray:
    """Angles in degrees between consecutive segment vectors."""
    a, b = segments[:-1], segments[1:]
    dots = np.einsum("ij,ij->i", a, b)
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    cosang = np.clip(dots / norms, -1.0, 1.0)
    return np.degrees(np.arccos(cosang))


def direction_change_penalty(angles_deg) -> float:
    """Count of direction changes at or above the 30-degree limit."""
    return float(np.sum(heaviside(np.asarray(angles_deg, dtype=float) - TURN_LIMIT_DEG)))


def r1_shortest(segments: np.ndarray, b: float) -> float:
    return float(-np.sum(segments ** 2) + b)


def r2_direction(segments: np.ndarray) -> float:
    return -direction_change_penalty(turn_angles_deg(segments))


def r3_parallel(samples: np.ndarray) -> float:
    return float(-np.sum(np.abs(np.diff(samples[:, 0]))))


def r4_side(samples: np.ndarray, side_sign: int = 1) -> float:
    return float(-np.sum(heaviside(-side_sign * samples[:, 0])))


def r5_boundary(samples: np.ndarray) -> float:
    return float(-np.sum(heaviside(np.abs(samples[:, 0]) - BOUNDARY_MARGIN)))


def r6_obstacle(samples: np.ndarray, obstacle: Obstacle | None) -> float:
    if obstacle is None:
        return 0.0
    d2 = np.sum((samples - obstacle.center) ** 2, axis=1)
    delta = d2 - obstacle.radius ** 2
    inside = delta < 0.0
    dg2 = obstacle.danger ** 2
    # a point exactly on the circle counts as outside
    return float(np.sum(np.where(inside, delta / obstacle.radius ** 2 * dg2, 0.01 * dg2)))


def total_reward(scenario: Scenario, plan: np.ndarray,
                 coeffs: RewardCoefficients) -> RewardBreakdown:
    """All six components and their kappa-weighted total."""
    segments = build_segments(scenario, plan)
    samples = sample_path(scenario, plan, coeffs.sample_count)
    r = np.array([
        r1_shortest(segments, coeffs.bias_b),
        r2_direction(segments),
        r3_parallel(samples),
        r4_side(samples, coeffs.side_sign),
        r5_boundary(samples),
        r6_obstacle(samples, scenario.obstacle),
    ])
    total = float(np.dot(np.asarray(coeffs.kappa), r))
    return RewardBreakdown(*r, total=total)


def collides(scenario: Scenario, plan: np.ndarray, n: int) -> bool:
    """True iff any arc-length sample lies strictly inside the obstacle."""
    obs = scenario.obstacle
    if obs is None:
        return False
    samples = sample_path(scenario, plan, n)
    d2 = np.sum((samples - obs.center) ** 2, axis=1)
    return bool(np.any(d2 < obs.radius ** 2))


def total_reward_batch(scenario: Scenario, plans: np.ndarray,
                       coeffs: RewardCoefficients) -> np.ndarray:
    """Vectorized totals for a (P, 10) batch of plans on one scenario.

    Same math as total_reward, evaluated population-wide for the
    derivative-free optimizer; tested for agreement with the scalar path.
    """
    plans = np.asarray(plans, dtype=float)
    P = plans.shape[0]
    pts = np.empty((P, N_NODES + 2, 2))
    pts[:, 0] = scenario.start
    pts[:, 1:-1, 0] = plans
    pts[:, 1:-1, 1] = NODE_YS
    pts[:, -1] = scenario.dest

    segs = np.diff(pts, axis=1)                       # (P, 11, 2)
    seglen = np.linalg.norm(segs, axis=2)             # (P, 11)
    cum = np.concatenate([np.zeros((P, 1)), np.cumsum(seglen, axis=1)], axis=1)

    n = coeffs.sample_count
    targets = np.linspace(0.0, 1.0, n)[None, :] * cum[:, -1:]   # (P, n)
    idx = np.clip(np.sum(targets[:, :, None] >= cum[:, None, :], axis=2) - 1, 0, N_NODES)
    frac = (targets - np.take_along_axis(cum, idx, axis=1)) / \
        np.take_along_axis(seglen, idx, axis=1)
    sx = np.take_along_axis(pts[:, :, 0], idx, axis=1) + \
        frac * np.take_along_axis(segs[:, :, 0], idx, axis=1)
    sx[:, 0] = scenario.start_x
    sx[:, -1] = scenario.dest_x

    r = np.empty((P, 6))
    r[:, 0] = -np.sum(segs ** 2, axis=(1, 2)) + coeffs.bias_b

    dots = np.einsum("pij,pij->pi", segs[:, :-1], segs[:, 1:])
    cosang = np.clip(dots / (seglen[:, :-1] * seglen[:, 1:]), -1.0, 1.0)
    ang = np.degrees(np.arccos(cosang))
    r[:, 1] = -np.sum(heaviside(ang - TURN_LIMIT_DEG), axis=1)

    r[:, 2] = -np.sum(np.abs(np.diff(sx, axis=1)), axis=1)
    r[:, 3] = -np.sum(heaviside(-coeffs.side_sign * sx), axis=1)
    r[:, 4] = -np.sum(heaviside(np.abs(sx) - BOUNDARY_MARGIN), axis=1)

    obs = scenario.obstacle
    if obs is None:
        r[:, 5] = 0.0
    else:
        sy = np.take_along_axis(pts[:, :, 1], idx, axis=1) + \
            frac * np.take_along_axis(segs[:, :, 1], idx, axis=1)
        sy[:, 0] = scenario.start[1]
        sy[:, -1] = scenario.dest[1]
        d2 = (sx - obs.cx) ** 2 + (sy - obs.cy) ** 2
        delta = d2 - obs.radius ** 2
        dg2 = obs.danger ** 2
        r[:, 5] = np.sum(np.where(delta < 0.0, delta / obs.radius ** 2 * dg2, 0.01 * dg2),
                         axis=1)

    return r @ np.asarray(coeffs.kappa)
