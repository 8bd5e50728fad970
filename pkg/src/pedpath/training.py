"""PPO training loop for one-step planning episodes.

Each episode is: observe a scenario, emit a full 10-node plan, receive
one cumulative reward, then advance the success-gated reset chain.
Rollouts come from a pool of environment chains with independent
seeded random streams; updates use the clipped surrogate with Adam.
Because episodes are one step, the return is the reward and the
advantage is simply reward minus the value estimate (normalized per
buffer).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import policy
from .env import EnvConfig, ResetState, advance_reset, observe
from .policy import LossConfig
from .rewards import RewardCoefficients, collides, total_reward


class NonFiniteLossError(RuntimeError):
    """Raised when the training loss diverges to NaN or infinity."""


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 256
    buffer_size: int = 2560
    learning_rate: float = 1e-3
    total_steps: int = 200_000
    n_envs: int = 10
    clip_epsilon: float = 0.2
    epochs_per_buffer: int = 40
    value_coef: float = 0.5
    entropy_coef: float = 1e-3
    hidden_size: int = 64
    anneal_lr: bool = True
    log_std_init: float = -1.5
    log_std_final: float = -4.0
    log_std_anneal_frac: float = 1.0
    max_grad_norm: float = 0.0
    target_kl: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.buffer_size % self.batch_size != 0:
            raise ValueError("buffer_size must be a multiple of batch_size")
        if not (0.0 < self.clip_epsilon < 1.0):
            raise ValueError("clip_epsilon must be in (0, 1)")
        if self.buffer_size % self.n_envs != 0:
            raise ValueError("buffer_size must be a multiple of n_envs")
        if self.log_std_final > self.log_std_init:
            raise ValueError("log_std_final must not exceed log_std_init")
        if not (0.0 < self.log_std_anneal_frac <= 1.0):
            raise ValueError("log_std_anneal_frac must be in (0, 1]")


def clip_grad_norm(grads: dict, max_norm: float) -> dict:
    """Scale the whole gradient dict so its global L2 norm is at most
    max_norm (no-op when max_norm <= 0)."""
    if max_norm <= 0:
        return grads
    total = np.sqrt(sum(float(np.sum(g ** 2)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        grads = {k: g * scale for k, g in grads.items()}
    return grads


class Adam:
    """Adaptive moment estimation over a dict of parameter arrays."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g ** 2
            params[k] = params[k] - self.lr * (self.m[k] / b1c) / \
                (np.sqrt(self.v[k] / b2c) + self.eps)
        return params


@dataclass
class Buffer:
    obs: np.ndarray
    raw: np.ndarray
    rewards: np.ndarray
    old_log_prob: np.ndarray
    old_value: np.ndarray


class EnvPool:
    """n_envs success-gated reset chains with independent rng streams."""

    def __init__(self, env_cfg: EnvConfig, n_envs: int, seed_seq: np.random.SeedSequence):
        self.env_cfg = env_cfg
        self.rngs = [np.random.Generator(np.random.PCG64(s))
                     for s in seed_seq.spawn(n_envs)]
        self.states = [ResetState.initial(rng, env_cfg) for rng in self.rngs]

    def scenarios(self):
        return [s.scenario for s in self.states]

    def advance(self, i: int, collided: bool):
        self.states[i] = advance_reset(self.states[i], collided, self.rngs[i], self.env_cfg)


def collect_buffer(params, pool: EnvPool, coeffs: RewardCoefficients,
                   buffer_size: int, action_rng: np.random.Generator) -> Buffer:
    """Fill a rollout buffer of one-step episodes.

    Environments are stepped in rounds, one episode each per round, in
    fixed pool order so the result is deterministic given the seeds.
    """
    n_envs = len(pool.states)
    obs_buf = np.empty((buffer_size, policy.OBS_DIM))
    raw_buf = np.empty((buffer_size, policy.ACT_DIM))
    rew_buf = np.empty(buffer_size)
    lp_buf = np.empty(buffer_size)
    val_buf = np.empty(buffer_size)

    for round_start in range(0, buffer_size, n_envs):
        scenarios = pool.scenarios()
        obs = np.stack([observe(s) for s in scenarios])
        mean, log_std, value = policy.forward(params, obs)
        raw, plans, log_prob = policy.sample_action(mean, log_std, action_rng)
        for i, scenario in enumerate(scenarios):
            j = round_start + i
            plan = plans[i]
            obs_buf[j] = obs[i]
            raw_buf[j] = raw[i]
            rew_buf[j] = total_reward(scenario, plan, coeffs).total
            lp_buf[j] = log_prob[i]
            val_buf[j] = value[i]
            pool.advance(i, collides(scenario, plan, coeffs.sample_count))
    return Buffer(obs_buf, raw_buf, rew_buf, lp_buf, val_buf)


def compute_advantages(buffer: Buffer) -> tuple[np.ndarray, np.ndarray]:
    """One-step episodes: return = reward, advantage = reward - value,
    normalized to zero mean / unit variance per buffer."""
    returns = buffer.rewards.copy()
    adv = buffer.rewards - buffer.old_value
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return adv, returns


@dataclass
class TrainResult:
    params: dict
    curve: list = field(default_factory=list)  # rows: (step, mean_reward, loss, clip_fraction)


def train(cfg: TrainConfig, env_cfg: EnvConfig, coeffs: RewardCoefficients,
          progress=None) -> TrainResult:
    """Run PPO until total_steps episodes have been sampled.

    Deterministic given cfg.seed (plus env_cfg.seed for the scenario
    streams). Raises NonFiniteLossError if the loss diverges.
    """
    root = np.random.SeedSequence([cfg.seed, env_cfg.seed])
    init_seq, env_seq, act_seq, shuffle_seq = root.spawn(4)
    init_rng = np.random.Generator(np.random.PCG64(init_seq))
    action_rng = np.random.Generator(np.random.PCG64(act_seq))
    shuffle_rng = np.random.Generator(np.random.PCG64(shuffle_seq))

    params = policy.init_params(init_rng, hidden=cfg.hidden_size)
    pool = EnvPool(env_cfg, cfg.n_envs, env_seq)
    optimizer = Adam(params, cfg.learning_rate)
    loss_cfg = LossConfig(cfg.clip_epsilon, cfg.value_coef, cfg.entropy_coef)

    result = TrainResult(params=params)
    episodes = 0
    while episodes < cfg.total_steps:
        buf_size = min(cfg.buffer_size, cfg.total_steps - episodes)
        buf_size -= buf_size % cfg.n_envs
        if buf_size < cfg.n_envs:
            break
        # exploration noise follows a fixed linear schedule rather than a
        # learned log-std: large early noise finds the dodge structure,
        # small late noise lets the mean settle on the fine reward margins
        prog = min(1.0, episodes / cfg.total_steps / cfg.log_std_anneal_frac)
        params["log_std"][:] = cfg.log_std_init + \
            (cfg.log_std_final - cfg.log_std_init) * prog
        buffer = collect_buffer(params, pool, coeffs, buf_size, action_rng)
        adv, returns = compute_advantages(buffer)
        if cfg.anneal_lr:
            optimizer.lr = cfg.learning_rate * (1.0 - episodes / cfg.total_steps)
        episodes += buf_size

        last_loss = np.nan
        clip_fracs = []
        stop = False
        for _ in range(cfg.epochs_per_buffer):
            if stop:
                break
            perm = shuffle_rng.permutation(buf_size)
            if buf_size < cfg.batch_size:
                # tail buffer smaller than one minibatch: single update
                batches = [perm]
            else:
                batches = [perm[start:start + cfg.batch_size]
                           for start in range(0, buf_size - cfg.batch_size + 1,
                                              cfg.batch_size)]
            for idx in batches:
                loss, grads, stats = policy.ppo_loss_and_grads(
                    params, buffer.obs[idx], buffer.raw[idx], adv[idx],
                    buffer.old_log_prob[idx], returns[idx], loss_cfg)
                if not np.isfinite(loss):
                    raise NonFiniteLossError(
                        f"loss became non-finite at episode {episodes}")
                del grads["log_std"]  # scheduled, not learned
                grads = clip_grad_norm(grads, cfg.max_grad_norm)
                params = optimizer.step(params, grads)
                last_loss = loss
                clip_fracs.append(stats["clip_fraction"])
                if cfg.target_kl > 0 and stats["approx_kl"] > cfg.target_kl:
                    # policy drifted far enough from the sampling policy:
                    # stop reusing this buffer
                    stop = True
                    break

        row = (episodes, float(buffer.rewards.mean()), float(last_loss),
               float(np.mean(clip_fracs)) if clip_fracs else 0.0)
        result.curve.append(row)
        if progress is not None:
            progress(row)

    result.params = params
    return result


def write_curve_csv(path, curve) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "mean_reward", "loss", "clip_fraction"])
        for step, mean_reward, loss, clip_fraction in curve:
            writer.writerow([step, repr(mean_reward), repr(loss), repr(clip_fraction)])
