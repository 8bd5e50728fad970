"""Policy network tests: forward contract, log-densities, analytic
gradients against central finite differences, and checkpoint I/O."""

import numpy as np
import pytest

from pedpath import policy
from pedpath.policy import (ACT_DIM, OBS_DIM, LossConfig, entropy,
                            flatten_params, forward, init_params,
                            load_checkpoint, log_prob_of, params_hash,
                            ppo_loss_and_grads, sample_action, save_checkpoint,
                            squash, unflatten_params)


def make_batch(rng, n, hidden=16):
    params = init_params(rng, hidden=hidden)
    obs = rng.normal(0.0, 3.0, (n, OBS_DIM))
    mean, log_std, _ = forward(params, obs)
    raw, _, logp = sample_action(mean, log_std, rng)
    adv = rng.standard_normal(n)
    returns = rng.standard_normal(n)
    return params, obs, raw, adv, logp, returns


def loss_only(params, obs, raw, adv, old_logp, returns, cfg):
    loss, _, _ = ppo_loss_and_grads(params, obs, raw, adv, old_logp, returns, cfg)
    return loss


def test_forward_shapes_and_batch_consistency():
    rng = np.random.default_rng(0)
    params = init_params(rng, hidden=8)
    obs = rng.standard_normal((5, OBS_DIM))
    mean, log_std, value = forward(params, obs)
    assert mean.shape == (5, ACT_DIM)
    assert log_std.shape == (ACT_DIM,)
    assert value.shape == (5,)
    m1, _, v1 = forward(params, obs[2])
    np.testing.assert_allclose(m1, mean[2], atol=1e-12)
    assert v1 == pytest.approx(value[2], abs=1e-12)


def test_fresh_params_emit_near_straight_line_plans():
    rng = np.random.default_rng(3)
    params = init_params(rng)
    for start, dest in [(0.0, 0.0), (-3.0, 2.0), (4.0, -4.0)]:
        obs = np.array([start, dest, 0.0, 0.0, 0.0, 0.0, 0.0])
        mean, _, _ = forward(params, obs)
        plan = squash(mean)
        frac = (np.arange(-10.0, 9.0, 2.0) + 12.0) / 22.0
        straight = start + frac * (dest - start)
        assert np.max(np.abs(plan - straight)) < 0.8


def test_squash_bounds():
    raw = np.array([-100.0, -1.0, 0.0, 1.0, 100.0])
    out = squash(raw)
    assert np.all(np.abs(out) <= 5.0)
    assert out[2] == 0.0


def test_log_prob_matches_direct_formula():
    rng = np.random.default_rng(1)
    mean = rng.standard_normal(ACT_DIM)
    log_std = rng.uniform(-2.0, 0.0, ACT_DIM)
    raw, plan, logp = sample_action(mean, log_std, rng)
    z = (raw - mean) / np.exp(log_std)
    gauss = -0.5 * np.sum(z ** 2) - np.sum(log_std) \
        - 0.5 * ACT_DIM * np.log(2.0 * np.pi)
    corr = np.sum(np.log(1.0 - np.tanh(raw) ** 2)) + ACT_DIM * np.log(5.0)
    assert logp == pytest.approx(gauss - corr, abs=1e-9)
    np.testing.assert_allclose(plan, 5.0 * np.tanh(raw), atol=1e-12)


def test_entropy_formula():
    log_std = np.full(ACT_DIM, -1.0)
    want = ACT_DIM * (-1.0 + 0.5 * (1.0 + np.log(2.0 * np.pi)))
    assert entropy(log_std) == pytest.approx(want, abs=1e-12)


def test_gradients_match_finite_differences():
    cfg = LossConfig(clip_epsilon=0.2, value_coef=0.5, entropy_coef=1e-3)
    eps = 1e-5
    worst = 0.0
    for trial in range(20):
        rng = np.random.default_rng(1000 + trial)
        params, obs, raw, adv, logp, returns = make_batch(rng, 8)
        _, grads, _ = ppo_loss_and_grads(params, obs, raw, adv, logp, returns, cfg)
        flat = flatten_params(params)
        gflat = flatten_params(grads)
        check = rng.choice(flat.size, size=60, replace=False)
        for i in check:
            bumped = flat.copy()
            bumped[i] += eps
            hi = loss_only(unflatten_params(bumped, params), obs, raw, adv,
                           logp, returns, cfg)
            bumped[i] -= 2 * eps
            lo = loss_only(unflatten_params(bumped, params), obs, raw, adv,
                           logp, returns, cfg)
            fd = (hi - lo) / (2 * eps)
            denom = max(abs(fd), abs(gflat[i]), 1e-6)
            worst = max(worst, abs(fd - gflat[i]) / denom)
    assert worst < 1e-4, f"max relative gradient error {worst}"


def test_clipped_rows_block_policy_gradient():
    cfg = LossConfig(clip_epsilon=0.2, value_coef=0.0, entropy_coef=0.0)
    rng = np.random.default_rng(77)
    params, obs, raw, adv, logp, returns = make_batch(rng, 6)
    # force every row far outside the trust region with positive advantage
    adv = np.ones(6)
    old_logp = logp - np.log(10.0)    # rho = 10 on every row
    _, grads, stats = ppo_loss_and_grads(params, obs, raw, adv, old_logp,
                                         returns, cfg)
    assert stats["clip_fraction"] == 1.0
    np.testing.assert_allclose(grads["Wm"], 0.0, atol=1e-12)
    np.testing.assert_allclose(grads["Ws"], 0.0, atol=1e-12)


def test_zero_advantage_leaves_mean_head_untouched():
    cfg = LossConfig(clip_epsilon=0.2, value_coef=0.5, entropy_coef=0.0)
    rng = np.random.default_rng(12)
    params, obs, raw, adv, logp, returns = make_batch(rng, 10)
    adv = np.zeros(10)
    _, grads, _ = ppo_loss_and_grads(params, obs, raw, adv, logp, returns, cfg)
    np.testing.assert_allclose(grads["Wm"], 0.0, atol=1e-12)
    np.testing.assert_allclose(grads["bm"], 0.0, atol=1e-12)
    np.testing.assert_allclose(grads["Ws"], 0.0, atol=1e-12)
    # the value loss still trains the trunk
    assert np.any(grads["Wv"] != 0.0)


def test_empty_batch_rejected():
    cfg = LossConfig()
    rng = np.random.default_rng(2)
    params = init_params(rng, hidden=8)
    empty = np.empty((0, OBS_DIM))
    with pytest.raises(ValueError):
        ppo_loss_and_grads(params, empty, np.empty((0, ACT_DIM)),
                           np.empty(0), np.empty(0), np.empty(0), cfg)


def test_flatten_roundtrip():
    rng = np.random.default_rng(4)
    params = init_params(rng, hidden=12)
    flat = flatten_params(params)
    back = unflatten_params(flat, params)
    for key in params:
        np.testing.assert_array_equal(params[key], back[key])


def test_checkpoint_roundtrip_and_hash(tmp_path):
    rng = np.random.default_rng(5)
    params = init_params(rng, hidden=24)
    path = tmp_path / "model.bin"
    save_checkpoint(path, params, config_hash="abc123")
    loaded, tag = load_checkpoint(path)
    assert tag == "abc123"
    for key in params:
        np.testing.assert_array_equal(params[key], loaded[key])
    assert params_hash(params) == params_hash(loaded)


def test_checkpoint_bytes_deterministic(tmp_path):
    rng = np.random.default_rng(6)
    params = init_params(rng, hidden=8)
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save_checkpoint(p1, params)
    save_checkpoint(p2, params)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_corruption_detected(tmp_path):
    rng = np.random.default_rng(7)
    params = init_params(rng, hidden=8)
    path = tmp_path / "model.bin"
    save_checkpoint(path, params)

    data = path.read_bytes()
    truncated = tmp_path / "t.bin"
    truncated.write_bytes(data[:-16])
    with pytest.raises(ValueError):
        load_checkpoint(truncated)

    garbage = tmp_path / "g.bin"
    garbage.write_bytes(b"not a checkpoint\n" + b"\x00" * 64)
    with pytest.raises(ValueError):
        load_checkpoint(garbage)
