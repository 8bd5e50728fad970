"""Acceptance gate: the nine go/no-go criteria for this package.

Each test prints a single pass/fail line so the gate can be read off
the pytest log directly. Tolerances and budgets are part of the
contract and must not be loosened.
"""

import numpy as np

from pedpath import policy
from pedpath.cli import main
from pedpath.env import EnvConfig, Obstacle, Scenario, new_scenario, observe
from pedpath.evaluation import (canonical_suite, plan_metrics,
                                reference_optimize)
from pedpath.rewards import (RewardCoefficients, direction_change_penalty,
                             heaviside, r4_side, r5_boundary,
                             straight_line_plan, total_reward)
from pedpath.sfm import SfmConfig, simulate
from pedpath.training import TrainConfig, train

COEFFS = RewardCoefficients()


def report(num, name, ok):
    print(f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} ({name}) failed"


# --- independent brute-force polyline oracle (pure python loops) ----------

def oracle_components(scenario, plan, coeffs):
    pts = [(scenario.start_x, -12.0)]
    for i in range(10):
        pts.append((float(plan[i]), -10.0 + 2.0 * i))
    pts.append((scenario.dest_x, 10.0))

    segs = [(bx - ax, by - ay) for (ax, ay), (bx, by) in zip(pts, pts[1:])]
    r1 = coeffs.bias_b - sum(dx * dx + dy * dy for dx, dy in segs)

    r2 = 0.0
    for (ax, ay), (bx, by) in zip(segs, segs[1:]):
        import math
        cosang = (ax * bx + ay * by) / (math.hypot(ax, ay) * math.hypot(bx, by))
        angle = math.degrees(math.acos(max(-1.0, min(1.0, cosang))))
        if angle - 30.0 >= 0.0:
            r2 -= 1.0

    # arc-length resampling, done longhand
    import math
    cum = [0.0]
    for dx, dy in segs:
        cum.append(cum[-1] + math.hypot(dx, dy))
    samples = []
    n = coeffs.sample_count
    for k in range(n):
        target = cum[-1] * k / (n - 1)
        j = 0
        while j < len(segs) - 1 and cum[j + 1] < target:
            j += 1
        f = (target - cum[j]) / (cum[j + 1] - cum[j])
        ax, ay = pts[j]
        bx, by = pts[j + 1]
        samples.append((ax + f * (bx - ax), ay + f * (by - ay)))
    samples[0], samples[-1] = pts[0], pts[-1]

    r3 = -sum(abs(b[0] - a[0]) for a, b in zip(samples, samples[1:]))
    r4 = -sum(1.0 for x, _ in samples if -coeffs.side_sign * x >= 0.0)
    r5 = -sum(1.0 for x, _ in samples if abs(x) - 4.5 >= 0.0)

    r6 = 0.0
    obs = scenario.obstacle
    if obs is not None:
        for x, y in samples:
            d2 = (x - obs.cx) ** 2 + (y - obs.cy) ** 2
            delta = d2 - obs.radius ** 2
            if delta < 0.0:
                r6 += delta / obs.radius ** 2 * obs.danger ** 2
            else:
                r6 += 0.01 * obs.danger ** 2
    return (r1, r2, r3, r4, r5, r6)


def test_criterion_1_reward_engine_exactness():
    coeffs = RewardCoefficients(bias_b=0.0, sample_count=23)
    scenario = Scenario(0.0, 0.0)
    plan = np.zeros(10)
    engine = total_reward(scenario, plan, coeffs).components()
    brute = np.array(oracle_components(scenario, plan, coeffs))
    want = np.array([-44.0, 0.0, 0.0, -23.0, 0.0, 0.0])
    ok = np.max(np.abs(engine - want)) <= 1e-9 and \
        np.max(np.abs(brute - want)) <= 1e-9
    report(1, "reward-engine exactness", ok)


def test_criterion_2_heaviside_boundaries():
    ok = (heaviside(0.0) == 1.0
          and r4_side(np.array([[0.0, 0.0]])) == -1.0
          and r5_boundary(np.array([[4.5, 0.0]])) == -1.0
          and r5_boundary(np.array([[-4.5, 0.0]])) == -1.0
          and r5_boundary(np.array([[4.4999, 0.0]])) == 0.0
          and direction_change_penalty([30.0]) == 1.0
          and direction_change_penalty([29.999]) == 0.0)
    report(2, "heaviside boundary behavior", ok)


def test_criterion_3_danger_monotonicity():
    base = dict(cx=0.5, cy=-1.0, radius=1.0)
    ok = True
    for seed in range(5):
        clearances = {}
        for danger in (0.1, 1.0):
            scenario = Scenario(0.0, 0.0, Obstacle(danger=danger, **base))
            plan = reference_optimize(scenario, COEFFS, 50_000, seed=seed)
            clearances[danger] = plan_metrics(scenario, plan, COEFFS).min_clearance
        ok = ok and clearances[1.0] > clearances[0.1]
    report(3, "danger monotonicity", ok)


def test_criterion_4_off_path_insensitivity():
    suite = dict(canonical_suite())
    ok = True
    for seed in range(5):
        plan_a = reference_optimize(suite["a"], COEFFS, 50_000, seed=seed)
        plan_b = reference_optimize(suite["b"], COEFFS, 50_000, seed=seed)
        ok = ok and np.max(np.abs(plan_a - plan_b)) < 0.5
    report(4, "off-path insensitivity", ok)


def test_criterion_5_desk_scale_learning():
    env_cfg = EnvConfig(seed=0)
    result = train(TrainConfig(), env_cfg, COEFFS)

    rng = np.random.default_rng(np.random.SeedSequence(12345))
    suite = [new_scenario(rng, env_cfg) for _ in range(64)]
    policy_sum = oracle_sum = 0.0
    for scenario in suite:
        base = total_reward(scenario, straight_line_plan(scenario), COEFFS).total
        ref = reference_optimize(scenario, COEFFS, 20_000, seed=7)
        oracle_sum += total_reward(scenario, ref, COEFFS).total - base
        mean, _, _ = policy.forward(result.params, observe(scenario))
        plan = policy.squash(mean)
        policy_sum += total_reward(scenario, plan, COEFFS).total - base
    ratio = policy_sum / oracle_sum
    print(f"  desk-scale ratio: {ratio:.3f} (threshold 0.80)")
    report(5, "desk-scale learning >= 80% of reference", ratio >= 0.80)


def test_criterion_6_gradient_correctness():
    cfg = policy.LossConfig(clip_epsilon=0.2, value_coef=0.5, entropy_coef=1e-3)
    eps = 1e-5
    worst = 0.0
    for trial in range(20):
        rng = np.random.default_rng(5000 + trial)
        params = policy.init_params(rng, hidden=12)
        obs = rng.normal(0.0, 3.0, (6, policy.OBS_DIM))
        mean, log_std, _ = policy.forward(params, obs)
        raw, _, logp = policy.sample_action(mean, log_std, rng)
        adv = rng.standard_normal(6)
        returns = rng.standard_normal(6)
        _, grads, _ = policy.ppo_loss_and_grads(params, obs, raw, adv, logp,
                                                returns, cfg)
        flat = policy.flatten_params(params)
        gflat = policy.flatten_params(grads)
        for i in rng.choice(flat.size, size=40, replace=False):
            bumped = flat.copy()
            bumped[i] += eps
            hi, _, _ = policy.ppo_loss_and_grads(
                policy.unflatten_params(bumped, params), obs, raw, adv, logp,
                returns, cfg)
            bumped[i] -= 2 * eps
            lo, _, _ = policy.ppo_loss_and_grads(
                policy.unflatten_params(bumped, params), obs, raw, adv, logp,
                returns, cfg)
            fd = (hi - lo) / (2 * eps)
            worst = max(worst, abs(fd - gflat[i]) / max(abs(fd), abs(gflat[i]), 1e-6))
    report(6, f"analytic gradients vs finite differences (max rel {worst:.2e})",
           worst < 1e-4)


def test_criterion_7_ppo_clip_identity():
    cfg = policy.LossConfig(clip_epsilon=0.2, value_coef=0.0, entropy_coef=0.0)
    rng = np.random.default_rng(0)
    params = policy.init_params(rng, hidden=8)
    obs = rng.normal(0.0, 2.0, (1, policy.OBS_DIM))
    mean, log_std, _ = policy.forward(params, obs)
    raw, _, logp = policy.sample_action(mean, log_std, rng)

    ok = True
    for rho in (0.5, 1.0, 2.0):
        for adv in (-1.0, 1.0, 2.5):
            old_logp = logp - np.log(rho)
            loss, _, _ = policy.ppo_loss_and_grads(
                params, obs, raw, np.array([adv]), old_logp,
                np.zeros(1), cfg)
            want = -min(rho * adv,
                        min(max(rho, 1.0 - 0.2), 1.0 + 0.2) * adv)
            ok = ok and abs(loss - want) <= 1e-12
    report(7, "PPO clip identity", ok)


def test_criterion_8_sfm_panel():
    cfg = SfmConfig()
    straight = simulate(Scenario(0.0, 0.0), cfg)
    ok = np.max(np.abs(straight.pos[:, 0])) < 1e-6

    base = dict(cx=0.5, cy=-1.0, radius=1.0)
    low = simulate(Scenario(0.0, 0.0, Obstacle(danger=0.1, **base)), cfg)
    high = simulate(Scenario(0.0, 0.0, Obstacle(danger=1.0, **base)), cfg)

    y, x = low.pos[:, 1], low.pos[:, 0]
    order = np.argsort(y)
    x_at_m8 = np.interp(-8.0, y[order], x[order])
    ok = ok and abs(x_at_m8) < 0.1

    peak_y = low.pos[np.argmax(np.abs(low.pos[:, 0])), 1]
    ok = ok and abs(peak_y - base["cy"]) <= 3.0

    ok = ok and np.array_equal(low.pos, high.pos) and \
        np.array_equal(low.vel, high.vel)
    report(8, "SFM qualitative panel", ok)


def test_criterion_9_cli_determinism(tmp_path):
    overrides = ["--set", "train.total_steps=100", "--set",
                 "train.buffer_size=100", "--set", "train.batch_size=50",
                 "--set", "train.hidden_size=16", "--seed", "3"]
    collected = {}
    for tag in ("one", "two"):
        root = tmp_path / tag
        assert main(["train", "--out", str(root / "t"), *overrides]) == 0
        ckpt = str(root / "t" / "checkpoint.bin")
        assert main(["oracle", "--out", str(root / "o"),
                     "--budget", "10000", "--seed", "3"]) == 0
        assert main(["compare", "--out", str(root / "c"),
                     "--checkpoint", ckpt, "--seed", "3"]) == 0
        collected[tag] = {
            rel: (root / rel).read_bytes()
            for rel in ("t/checkpoint.bin", "t/curve.csv",
                        "o/oracle_plans.csv", "c/compare.csv",
                        "c/compare_d.svg")
        }
    report(9, "train/oracle/compare byte-determinism",
           collected["one"] == collected["two"])
