"""Stochastic action policy and its REINFORCE training loop.

The network is a two-layer net over state features: a tanh hidden layer,
an action-conditioned output (hidden state dotted with a projection of
each candidate's [relation ; tail] embedding), and a scalar baseline head
on the same hidden layer. Updates ascend the usual score-function
surrogate sum_t log pi(a_t|s_t) * (G_t - b(s_t)) plus an entropy bonus,
while the baseline head is regressed onto the return by squared error.
Rewards are terminal-only, so with the default gamma of 1 the return at
every step equals the episode reward.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .embeddings import EmbeddingTable
from .environment import Path, PathEnv, RewardSpec, reward
from .errors import CheckpointMismatchError, ConfigError, DataError, DivergenceError
from .kg import KnowledgeGraph
from .optim import make_optimizer
from .schema import SELF_LOOP, EntityRef

POL_MAGIC = "UPGPR-POL v1"


@dataclass(frozen=True)
class AgentConfig:
    max_hops_eval: int = 3
    train_extra_hop: bool = True
    epochs: int = 50
    learning_rate: float = 1e-3
    episodes_per_learner: int = 2
    entropy_weight: float = 0.01
    gamma: float = 1.0
    hidden: int = 512
    history: int = 1
    batch_episodes: int = 512
    max_actions: int = 250
    seed: int = 0
    optimizer: str = "adam"

    def validate(self) -> None:
        if self.max_hops_eval not in (3, 4, 5):
            raise ConfigError("max_hops_eval must be 3, 4 or 5")
        if self.epochs < 0 or self.learning_rate < 0:
            raise ConfigError("epochs and learning_rate must be non-negative")
        positive = (
            self.episodes_per_learner, self.hidden, self.batch_episodes, self.max_actions,
        )
        if any(v <= 0 for v in positive):
            raise ConfigError("episode, width and batch settings must be positive")
        if self.history < 0 or self.entropy_weight < 0:
            raise ConfigError("history and entropy_weight must be non-negative")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("gamma must lie in (0, 1]")

    def hop_budget(self) -> int:
        return self.max_hops_eval + (1 if self.train_extra_hop else 0)


def feature_size(d: int, history: int) -> int:
    return 3 * d + history * 2 * d


def init_policy(d: int, cfg: AgentConfig) -> dict[str, np.ndarray]:
    """Parameter pytree; shapes follow the embedding dimension and config."""
    cfg.validate()
    rng = np.random.default_rng([cfg.seed, 0])
    f = feature_size(d, cfg.history)
    w = cfg.hidden
    return {
        "w1": rng.normal(0.0, 1.0 / np.sqrt(f), size=(w, f)),
        "b1": np.zeros(w),
        "proj": rng.normal(0.0, 0.1 / np.sqrt(w), size=(w, 2 * d)),
        "v_w": np.zeros(w),
        "v_b": np.zeros(1),
    }


def state_features(state, table: EmbeddingTable, history: int) -> np.ndarray:
    """[v_start ; v_current ; v_start - v_current ; last H hops (rel, entity)].

    Missing history slots and self-loop hops contribute zero vectors.
    """
    d = table.d
    x = np.zeros(feature_size(d, history))
    v_start = table.vector(state.start)
    v_current = table.vector(state.current)
    x[:d] = v_start
    x[d : 2 * d] = v_current
    x[2 * d : 3 * d] = v_start - v_current
    for j in range(min(history, len(state.history))):
        rel, ent = state.history[j]
        if rel == SELF_LOOP:
            continue
        base = 3 * d + j * 2 * d
        x[base : base + d] = table.feature_relation_vector(rel)
        x[base + d : base + 2 * d] = table.vector(ent)
    return x


def policy_forward(
    params: dict[str, np.ndarray], features: np.ndarray, action_matrix: np.ndarray
):
    """Distribution over the candidate actions, plus hidden state and baseline.

    Returns (probs, log_probs, hidden, baseline); probs is a masked softmax
    over exactly the candidates in `action_matrix` rows.
    """
    h = np.tanh(params["w1"] @ features + params["b1"])
    logits = action_matrix @ (params["proj"].T @ h)
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    z = exp.sum()
    probs = exp / z
    log_probs = shifted - np.log(z)
    baseline = float(params["v_w"] @ h + params["v_b"][0])
    return probs, log_probs, h, baseline


@dataclass
class EpisodeStep:
    features: np.ndarray
    action_matrix: np.ndarray
    chosen: int


@dataclass
class Episode:
    learner: EntityRef
    path: Path
    steps: list[EpisodeStep]
    log_probs: list[float]
    reward: float
    entropy: float  # mean over steps, for logging


def sample_episode(
    learner: EntityRef,
    env: PathEnv,
    params: dict[str, np.ndarray],
    spec: RewardSpec,
    hop_budget: int,
    rng: np.random.Generator,
) -> Episode:
    """Roll the full hop budget, sampling each action from the policy."""
    state = env.initial_state(learner, hop_budget)
    steps: list[EpisodeStep] = []
    log_probs: list[float] = []
    hops = []
    entropy_sum = 0.0
    for _ in range(hop_budget):
        aset = env.action_set(state.current)
        x = state_features(state, env.embeddings, env.history_len)
        probs, logp, _h, _b = policy_forward(params, x, aset.matrix)
        k = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        k = min(k, len(probs) - 1)
        steps.append(EpisodeStep(x, aset.matrix, k))
        log_probs.append(float(logp[k]))
        entropy_sum -= float(np.sum(probs * logp))
        action = aset.actions[k]
        hops.append(action)
        state = env.step(state, action)
    path = Path(learner, tuple(hops))
    return Episode(
        learner=learner,
        path=path,
        steps=steps,
        log_probs=log_probs,
        reward=reward(path, spec),
        entropy=entropy_sum / hop_budget,
    )


def step_returns(episode: Episode, gamma: float) -> list[float]:
    t_final = len(episode.steps) - 1
    return [gamma ** (t_final - t) * episode.reward for t in range(len(episode.steps))]


def compute_advantages(
    params: dict[str, np.ndarray], episodes: list[Episode], gamma: float
) -> list[list[float]]:
    """Return-minus-baseline per step, evaluated at the given parameters."""
    out = []
    for ep in episodes:
        returns = step_returns(ep, gamma)
        advs = []
        for t, step in enumerate(ep.steps):
            _p, _lp, _h, b = policy_forward(params, step.features, step.action_matrix)
            advs.append(returns[t] - b)
        out.append(advs)
    return out


def batch_surrogate(
    params: dict[str, np.ndarray],
    episodes: list[Episode],
    advantages: list[list[float]],
    entropy_weight: float,
    gamma: float,
) -> float:
    """Objective ascended by one update, with advantages held constant.

    sum_t [log pi(a_t|s_t) * adv_t + beta * H(pi(.|s_t))] - 0.5 * sum_t (b_t - G_t)^2
    """
    total = 0.0
    for ep, advs in zip(episodes, advantages):
        returns = step_returns(ep, gamma)
        for t, step in enumerate(ep.steps):
            probs, logp, _h, b = policy_forward(params, step.features, step.action_matrix)
            entropy = -float(np.sum(probs * logp))
            total += advs[t] * float(logp[step.chosen]) + entropy_weight * entropy
            total -= 0.5 * (b - returns[t]) ** 2
    return total


def batch_gradients(
    params: dict[str, np.ndarray],
    episodes: list[Episode],
    advantages: list[list[float]],
    entropy_weight: float,
    gamma: float,
) -> dict[str, np.ndarray]:
    """Analytic gradient of `batch_surrogate` w.r.t. every parameter."""
    grads = {key: np.zeros_like(arr) for key, arr in params.items()}
    for ep, advs in zip(episodes, advantages):
        returns = step_returns(ep, gamma)
        for t, step in enumerate(ep.steps):
            x, A, k = step.features, step.action_matrix, step.chosen
            probs, logp, h, b = policy_forward(params, x, A)
            entropy = -float(np.sum(probs * logp))
            dlogits = -advs[t] * probs
            dlogits[k] += advs[t]
            dlogits += entropy_weight * (-probs * (logp + entropy))
            dbase = -(b - returns[t])
            atd = A.T @ dlogits  # (2d,)
            dh = params["proj"] @ atd + dbase * params["v_w"]
            dh_pre = dh * (1.0 - h * h)
            grads["w1"] += np.outer(dh_pre, x)
            grads["b1"] += dh_pre
            grads["proj"] += np.outer(h, atd)
            grads["v_w"] += dbase * h
            grads["v_b"][0] += dbase
    return grads


def reinforce_update(
    episodes: list[Episode],
    params: dict[str, np.ndarray],
    opt,
    cfg: AgentConfig,
) -> tuple[dict[str, np.ndarray], dict[str, float]]:
    """One ascent step on a batch of episodes; returns (params, statistics)."""
    if not episodes:
        raise ValueError("empty episode batch")
    advantages = compute_advantages(params, episodes, cfg.gamma)
    grads = batch_gradients(params, episodes, advantages, cfg.entropy_weight, cfg.gamma)
    for key, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite policy gradient in {key!r}")
    descent = {key: -g for key, g in grads.items()}
    new_params = opt.step(params, descent)
    stats = {
        "mean_reward": float(np.mean([ep.reward for ep in episodes])),
        "mean_entropy": float(np.mean([ep.entropy for ep in episodes])),
    }
    return new_params, stats


@dataclass
class TrainingLog:
    epochs: list[int] = field(default_factory=list)
    mean_reward: list[float] = field(default_factory=list)
    mean_entropy: list[float] = field(default_factory=list)

    def append(self, epoch: int, mean_reward: float, mean_entropy: float) -> None:
        self.epochs.append(epoch)
        self.mean_reward.append(mean_reward)
        self.mean_entropy.append(mean_entropy)

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,mean_reward,mean_entropy\n")
            for e, r, h in zip(self.epochs, self.mean_reward, self.mean_entropy):
                fh.write(f"{e},{r:.6f},{h:.6f}\n")


def train_agent(
    kg_train: KnowledgeGraph,
    embeddings: EmbeddingTable,
    cfg: AgentConfig,
    spec: RewardSpec,
) -> tuple[dict[str, np.ndarray], TrainingLog]:
    """Epochs x learners x episodes REINFORCE loop, deterministic per seed."""
    cfg.validate()
    params = init_policy(embeddings.d, cfg)
    env = PathEnv(kg_train, embeddings, cfg.max_actions, cfg.history)
    opt = make_optimizer(cfg.optimizer, cfg.learning_rate)
    budget = cfg.hop_budget()
    log = TrainingLog()
    learners = kg_train.learners()
    for epoch in range(1, cfg.epochs + 1):
        buffer: list[Episode] = []
        rewards: list[float] = []
        entropies: list[float] = []
        for learner in learners:
            for j in range(cfg.episodes_per_learner):
                rng = np.random.default_rng([cfg.seed, epoch, learner.index, j])
                ep = sample_episode(learner, env, params, spec, budget, rng)
                buffer.append(ep)
                rewards.append(ep.reward)
                entropies.append(ep.entropy)
                if len(buffer) >= cfg.batch_episodes:
                    params, _ = reinforce_update(buffer, params, opt, cfg)
                    buffer = []
        if buffer:
            params, _ = reinforce_update(buffer, params, opt, cfg)
        log.append(epoch, float(np.mean(rewards)), float(np.mean(entropies)))
    return params, log


# -- checkpoint I/O ------------------------------------------------------


def save_policy(params: dict[str, np.ndarray], path: str, cfg: AgentConfig, d: int) -> None:
    """Binary checkpoint: magic, config echo (incl. d), f32 tensors."""
    echo = {"agent": asdict(cfg), "d": d}
    with open(path, "wb") as fh:
        fh.write((POL_MAGIC + "\n").encode())
        fh.write((json.dumps(echo, sort_keys=True) + "\n").encode())
        fh.write(struct.pack("<I", len(params)))
        for name in sorted(params):
            arr = params[name]
            enc = name.encode()
            fh.write(struct.pack("<HB", len(enc), arr.ndim))
            fh.write(enc)
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f4").tobytes())


def load_policy(path: str) -> tuple[dict[str, np.ndarray], AgentConfig, int]:
    with open(path, "rb") as fh:
        magic = fh.readline().decode().rstrip("\n")
        if magic != POL_MAGIC:
            raise DataError(f"{path}: not a {POL_MAGIC} file")
        try:
            echo = json.loads(fh.readline().decode())
            cfg = AgentConfig(**echo["agent"])
            d = int(echo["d"])
            (count,) = struct.unpack("<I", fh.read(4))
            params = {}
            for _ in range(count):
                name_len, ndim = struct.unpack("<HB", fh.read(3))
                name = fh.read(name_len).decode()
                shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
                n = int(np.prod(shape)) if shape else 1
                data = np.frombuffer(fh.read(n * 4), dtype="<f4")
                params[name] = data.reshape(shape).astype(np.float64)
        except (struct.error, ValueError, TypeError, KeyError) as exc:
            raise DataError(f"{path}: corrupt policy checkpoint") from exc
    expected = init_policy(d, cfg)
    for name, arr in expected.items():
        if name not in params or params[name].shape != arr.shape:
            raise CheckpointMismatchError(
                f"{path}: tensor {name!r} missing or shaped unlike the echoed config"
            )
    return params, cfg, d
