"""Stochastic planning policy: a small tanh MLP with a Gaussian action
head, a scalar value head, and hand-derived reverse-mode gradients.

The network maps the 7-entry observation to 10 action means; a
state-independent log-std vector parameterizes exploration noise. Raw
Gaussian draws are squashed through 5 * tanh so every plan lands inside
the corridor, with the usual change-of-variables correction applied to
the log-density.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .env import DEST_Y, NODE_YS, OBS_DIM, START_Y
from .env import N_NODES as ACT_DIM

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
ACTION_SCALE = 5.0

# fixed per-entry input scaling so observation magnitudes (corridor
# half-width 5, obstacle offsets up to 10/22) land in the tanh-friendly
# unit range
OBS_SCALE = np.array([5.0, 5.0, 1.0, 10.0, 22.0, 2.0, 1.0])

LOG_2PI = float(np.log(2.0 * np.pi))

PARAM_KEYS = ("W1", "b1", "W2", "b2", "Wm", "bm", "Ws", "Wv", "bv", "log_std")

CHECKPOINT_MAGIC = "pedpath-checkpoint-v1"


def _orthogonal(rng: np.random.Generator, rows: int, cols: int, gain: float) -> np.ndarray:
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def _straight_line_skip() -> np.ndarray:
    """Skip weights that make the freshly initialized mean head emit
    (approximately) the straight start-to-destination interpolation, so
    training only has to learn the residual around it."""
    frac = (NODE_YS - START_Y) / (DEST_Y - START_Y)
    ws = np.zeros((OBS_DIM, ACT_DIM))
    ws[0] = 1.0 - frac  # start_x weight (inputs arrive pre-scaled by 1/5)
    ws[1] = frac        # dest_x weight
    return ws


def init_params(rng: np.random.Generator, hidden: int = 64) -> dict[str, np.ndarray]:
    """Orthogonally initialized parameters; small mean head, log_std -0.5."""
    return {
        "W1": _orthogonal(rng, OBS_DIM, hidden, 1.0),
        "b1": np.zeros(hidden),
        "W2": _orthogonal(rng, hidden, hidden, 1.0),
        "b2": np.zeros(hidden),
        "Wm": _orthogonal(rng, hidden, ACT_DIM, 0.01),
        "bm": np.zeros(ACT_DIM),
        "Ws": _straight_line_skip(),
        "Wv": _orthogonal(rng, hidden, 1, 1.0),
        "bv": np.zeros(1),
        "log_std": np.full(ACT_DIM, -0.5),
    }


def clamped_log_std(params: dict[str, np.ndarray]) -> np.ndarray:
    return np.clip(params["log_std"], LOG_STD_MIN, LOG_STD_MAX)


def forward(params: dict[str, np.ndarray], obs: np.ndarray):
    """Evaluate the network.

    obs may be a single observation (7,) or a batch (B, 7). Returns
    (mean, log_std, value) with matching leading dimensions.
    """
    obs = np.asarray(obs, dtype=float)
    single = obs.ndim == 1
    x = (obs[None, :] if single else obs) / OBS_SCALE
    h1 = np.tanh(x @ params["W1"] + params["b1"])
    h2 = np.tanh(h1 @ params["W2"] + params["b2"])
    mean = h2 @ params["Wm"] + params["bm"] + x @ params["Ws"]
    value = (h2 @ params["Wv"] + params["bv"])[:, 0]
    log_std = clamped_log_std(params)
    if single:
        return mean[0], log_std, value[0]
    return mean, log_std, value


def squash(raw: np.ndarray) -> np.ndarray:
    """Map raw Gaussian draws into the corridor: 5 * tanh(raw)."""
    return ACTION_SCALE * np.tanh(raw)


def log_prob_of(raw: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Log-density of the squashed action identified by its raw draw.

    Gaussian log-density of raw, minus the tanh-squash Jacobian term
    sum log(1 - tanh(raw)^2) and the constant scale term 10 * log 5.
    Works on single vectors or batches along the last axis.
    """
    z = (raw - mean) / np.exp(log_std)
    gauss = -0.5 * np.sum(z ** 2, axis=-1) - np.sum(log_std) - 0.5 * ACT_DIM * LOG_2PI
    correction = np.sum(np.log1p(-np.tanh(raw) ** 2), axis=-1) + ACT_DIM * np.log(ACTION_SCALE)
    return gauss - correction


def sample_action(mean: np.ndarray, log_std: np.ndarray, rng: np.random.Generator):
    """Draw raw actions and return (raw, plan, log_prob).

    mean may be (10,) or (B, 10); draws are elementwise Gaussian.
    """
    raw = mean + np.exp(log_std) * rng.standard_normal(np.shape(mean))
    return raw, squash(raw), log_prob_of(raw, mean, log_std)


def entropy(log_std: np.ndarray) -> float:
    """Differential entropy of the (pre-squash) Gaussian head."""
    return float(np.sum(log_std) + 0.5 * ACT_DIM * (1.0 + LOG_2PI))


@dataclass(frozen=True)
class LossConfig:
    clip_epsilon: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 1e-3


def ppo_loss_and_grads(params: dict[str, np.ndarray],
                       obs: np.ndarray, raw: np.ndarray,
                       advantages: np.ndarray, old_log_prob: np.ndarray,
                       returns: np.ndarray, cfg: LossConfig):
    """Clipped-surrogate PPO loss with exact analytic gradients.

    loss = -mean(min(rho * A, clip(rho, 1 - eps, 1 + eps) * A))
           + value_coef * mean((V - R)^2) - entropy_coef * entropy

    Returns (loss, grads, stats) where grads matches the params layout
    and stats carries the clip fraction for telemetry.
    """
    B = obs.shape[0]
    if B == 0:
        raise ValueError("empty batch")

    x = np.asarray(obs, dtype=float) / OBS_SCALE
    z1 = x @ params["W1"] + params["b1"]
    h1 = np.tanh(z1)
    z2 = h1 @ params["W2"] + params["b2"]
    h2 = np.tanh(z2)
    mean = h2 @ params["Wm"] + params["bm"] + x @ params["Ws"]
    value = (h2 @ params["Wv"] + params["bv"])[:, 0]
    log_std = clamped_log_std(params)
    std = np.exp(log_std)

    log_prob = log_prob_of(raw, mean, log_std)
    rho = np.exp(log_prob - old_log_prob)
    eps = cfg.clip_epsilon
    surr_unclipped = rho * advantages
    surr_clipped = np.clip(rho, 1.0 - eps, 1.0 + eps) * advantages
    surrogate = np.minimum(surr_unclipped, surr_clipped)

    value_err = value - returns
    ent = entropy(log_std)
    loss = float(-np.mean(surrogate) + cfg.value_coef * np.mean(value_err ** 2)
                 - cfg.entropy_coef * ent)

    # gradient flows through rho only where clipping is inactive for the
    # min branch: zero when (A > 0 and rho > 1 + eps) or (A < 0 and rho < 1 - eps)
    blocked = ((advantages > 0) & (rho > 1.0 + eps)) | \
              ((advantages < 0) & (rho < 1.0 - eps))
    dloss_dlogp = np.where(blocked, 0.0, -advantages * rho) / B

    z = (raw - mean) / std
    dlogp_dmean = z / std                                  # (B, ACT_DIM)
    dmean = dloss_dlogp[:, None] * dlogp_dmean
    # d logp / d log_std = z^2 - 1 per entry (through the clamp where active)
    clamp_open = (params["log_std"] > LOG_STD_MIN) & (params["log_std"] < LOG_STD_MAX)
    g_log_std = np.sum(dloss_dlogp[:, None] * (z ** 2 - 1.0), axis=0)
    g_log_std -= cfg.entropy_coef
    g_log_std = np.where(clamp_open, g_log_std, 0.0)

    dvalue = 2.0 * cfg.value_coef * value_err / B          # (B,)

    dh2 = dmean @ params["Wm"].T + dvalue[:, None] * params["Wv"].T
    dz2 = dh2 * (1.0 - h2 ** 2)
    dh1 = dz2 @ params["W2"].T
    dz1 = dh1 * (1.0 - h1 ** 2)

    grads = {
        "W1": x.T @ dz1,
        "b1": dz1.sum(axis=0),
        "W2": h1.T @ dz2,
        "b2": dz2.sum(axis=0),
        "Wm": h2.T @ dmean,
        "bm": dmean.sum(axis=0),
        "Ws": x.T @ dmean,
        "Wv": h2.T @ dvalue[:, None],
        "bv": np.array([dvalue.sum()]),
        "log_std": g_log_std,
    }
    stats = {
        "clip_fraction": float(np.mean(np.abs(rho - 1.0) > eps)),
        "mean_ratio": float(np.mean(rho)),
        "approx_kl": float(np.mean(old_log_prob - log_prob)),
    }
    return loss, grads, stats


def flatten_params(params: dict[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([params[k].ravel() for k in PARAM_KEYS])


def unflatten_params(flat: np.ndarray, template: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out, i = {}, 0
    for k in PARAM_KEYS:
        n = template[k].size
        out[k] = flat[i:i + n].reshape(template[k].shape).copy()
        i += n
    return out


def save_checkpoint(path, params: dict[str, np.ndarray], config_hash: str = "") -> None:
    """Write the versioned checkpoint: one JSON header line describing
    shapes, then all arrays as row-major little-endian float64 bytes.
    Deterministic byte-for-byte and round-trips exactly."""
    header = {
        "magic": CHECKPOINT_MAGIC,
        "config_hash": config_hash,
        "arrays": [{"name": k, "shape": list(params[k].shape)} for k in PARAM_KEYS],
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for k in PARAM_KEYS:
            f.write(np.ascontiguousarray(params[k], dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], str]:
    """Read a checkpoint back; raises ValueError on a corrupt file."""
    with open(path, "rb") as f:
        header_line = f.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as e:
            raise ValueError(f"corrupt checkpoint header: {e}") from e
        if header.get("magic") != CHECKPOINT_MAGIC:
            raise ValueError("not a pedpath checkpoint")
        params = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            n = int(np.prod(shape)) if shape else 1
            buf = f.read(8 * n)
            if len(buf) != 8 * n:
                raise ValueError("truncated checkpoint payload")
            params[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    missing = set(PARAM_KEYS) - set(params)
    if missing:
        raise ValueError(f"checkpoint missing arrays: {sorted(missing)}")
    return params, header.get("config_hash", "")


def params_hash(params: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    for k in PARAM_KEYS:
        h.update(np.ascontiguousarray(params[k], dtype="<f8").tobytes())
    return h.hexdigest()[:12]
