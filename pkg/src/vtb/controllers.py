"""Baseline and learning controllers driving environments through step().

The learning controller is a cross-entropy method over the parameters of a
linear-tanh policy: sample a population from a diagonal Gaussian, score
each candidate by mean episode reward, refit the Gaussian to the elites,
iterate. It is gradient-free and fully seed-deterministic; every stream
(parameter sampling, candidate episodes, evaluations) derives from the
config seed.

Training always runs behind observation- and action-normalization
wrappers. Normalization statistics adapt during the first iteration and
are then frozen so later candidates are scored under one fixed input
scaling; the frozen statistics ship inside the saved policy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .envcore import SpaceSpec
from .seeds import mix_seed, rng_from
from .wrappers import NormalizeAction, NormalizeObservation


class StaticController:
    """Always command the same setpoint pair (defaults 20/23)."""

    def __init__(self, heating: float = 20.0, cooling: float = 23.0):
        self.action = np.array([heating, cooling])

    def act(self, obs) -> np.ndarray:
        return self.action


class RbcIncremental:
    """Nudge both setpoints by one degree against comfort-range excursions.

    Input is the mean of the zone air temperatures; output is a delta pair
    for the incremental-action wrapper: too hot -> (-1, -1), too cold ->
    (+1, +1), otherwise hold.
    """

    def __init__(self, comfort_range: tuple[float, float], zone_temp_indices):
        self.low, self.high = comfort_range
        self.idx = list(zone_temp_indices)
        if not self.idx:
            raise ValueError("need at least one zone temperature index")

    def act(self, obs) -> np.ndarray:
        mean_temp = float(np.mean(np.asarray(obs)[self.idx]))
        if mean_temp > self.high:
            return np.array([-1.0, -1.0])
        if mean_temp < self.low:
            return np.array([1.0, 1.0])
        return np.array([0.0, 0.0])


class RandomController:
    """Uniform samples from the action space; seeded and deterministic."""

    def __init__(self, space: SpaceSpec, seed: int):
        self.space = space
        self._rng = rng_from(seed)

    def act(self, obs):
        if self.space.kind == "discrete":
            return int(self._rng.integers(self.space.count))
        low = self.space.lows()
        high = self.space.highs()
        return low + self._rng.random(len(low)) * (high - low)


@dataclass
class LinearPolicy:
    """tanh(W obs + b) affinely mapped onto the action bounds."""

    weights: np.ndarray        # (act_dim, obs_dim)
    bias: np.ndarray           # (act_dim,)
    action_low: np.ndarray     # (act_dim,)
    action_high: np.ndarray    # (act_dim,)
    obs_names: tuple[str, ...] = ()
    norm_stats: dict | None = None   # observation normalization snapshot

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        self.action_low = np.asarray(self.action_low, dtype=np.float64)
        self.action_high = np.asarray(self.action_high, dtype=np.float64)
        if not (
            np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))
        ):
            raise ValueError("policy parameters must be finite")
        self._mid = 0.5 * (self.action_low + self.action_high)
        self._half = 0.5 * (self.action_high - self.action_low)

    @property
    def n_params(self) -> int:
        return self.weights.size + self.bias.size


def policy_act(policy: LinearPolicy, obs) -> np.ndarray:
    """Squash W obs + b to [-1, 1] and map onto the action bounds."""
    x = np.asarray(obs, dtype=np.float64).reshape(-1)
    squashed = np.tanh(policy.weights @ x + policy.bias)
    return policy._mid + squashed * policy._half


class PolicyController:
    def __init__(self, policy: LinearPolicy):
        self.policy = policy

    def act(self, obs) -> np.ndarray:
        return policy_act(self.policy, obs)


def save_policy(policy: LinearPolicy, path: str | Path) -> None:
    doc = {
        "weights": policy.weights.tolist(),
        "bias": policy.bias.tolist(),
        "action_low": policy.action_low.tolist(),
        "action_high": policy.action_high.tolist(),
        "obs_names": list(policy.obs_names),
        "norm_stats": policy.norm_stats,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_policy(path: str | Path) -> LinearPolicy:
    doc = json.loads(Path(path).read_text())
    return LinearPolicy(
        weights=np.asarray(doc["weights"]),
        bias=np.asarray(doc["bias"]),
        action_low=np.asarray(doc["action_low"]),
        action_high=np.asarray(doc["action_high"]),
        obs_names=tuple(doc.get("obs_names", ())),
        norm_stats=doc.get("norm_stats"),
    )


@dataclass
class CemConfig:
    population: int = 32
    elite_frac: float = 0.2
    iterations: int = 50
    init_std: float = 0.5
    episodes_per_candidate: int = 1
    eval_every: int = 5     # intermediate evaluation cadence; 0 disables
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 0.0 < self.elite_frac <= 1.0:
            raise ValueError("elite_frac must be in (0, 1]")
        if self.iterations < 1 or self.episodes_per_candidate < 1:
            raise ValueError("iterations and episodes_per_candidate must be >= 1")
        if self.init_std <= 0:
            raise ValueError("init_std must be > 0")

    @property
    def n_elite(self) -> int:
        return max(1, int(self.population * self.elite_frac))


@dataclass
class TrainingCurve:
    """Per-iteration population statistics plus intermediate evaluations."""

    iteration: list[int] = field(default_factory=list)
    mean_reward: list[float] = field(default_factory=list)
    max_reward: list[float] = field(default_factory=list)
    elite_mean_reward: list[float] = field(default_factory=list)
    eval_reward: list[float] = field(default_factory=list)  # nan when skipped

    def append(self, it, mean, best, elite, ev):
        self.iteration.append(it)
        self.mean_reward.append(mean)
        self.max_reward.append(best)
        self.elite_mean_reward.append(elite)
        self.eval_reward.append(ev)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            fh.write("iteration,mean_reward,max_reward,elite_mean_reward,eval_reward\n")
            for row in zip(
                self.iteration,
                self.mean_reward,
                self.max_reward,
                self.elite_mean_reward,
                self.eval_reward,
            ):
                fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _unflatten(theta: np.ndarray, obs_dim: int, act_dim: int, obs_names, stats) -> LinearPolicy:
    w = theta[: act_dim * obs_dim].reshape(act_dim, obs_dim)
    b = theta[act_dim * obs_dim:]
    return LinearPolicy(
        weights=w,
        bias=b,
        action_low=np.full(act_dim, -1.0),
        action_high=np.full(act_dim, 1.0),
        obs_names=obs_names,
        norm_stats=stats,
    )


def cem_update(
    thetas: np.ndarray, rewards: np.ndarray, n_elite: int
) -> tuple[np.ndarray, np.ndarray]:
    """Refit the sampling distribution to the elite candidates.

    With n_elite equal to the population size this reduces to the plain
    population moments. Ties keep candidate order (stable sort).
    """
    order = np.argsort(-rewards, kind="stable")
    elite = thetas[order[:n_elite]]
    return elite.mean(axis=0), np.maximum(elite.std(axis=0), 1e-6)


def _run_episode(env, policy: LinearPolicy, seed: int) -> float:
    obs, _ = env.reset(seed=seed)
    total = 0.0
    while True:
        res = env.step(policy_act(policy, obs))
        total += res.reward
        obs = res.observation
        if res.truncated:
            return total / env.episode_steps


def cem_train(env, config: CemConfig) -> tuple[LinearPolicy, TrainingCurve]:
    """Cross-entropy search over linear-tanh policy parameters.

    ``env`` is wrapped with NormalizeObservation and NormalizeAction; the
    candidates therefore act on normalized observations and emit [-1, 1]
    actions. Returns the best candidate seen (by its evaluated mean episode
    reward) together with the training curve. Deterministic given
    ``config.seed``.
    """
    norm_obs = NormalizeObservation(env)
    wrapped = NormalizeAction(norm_obs)
    obs_spec, act_spec = wrapped.describe_spaces()
    obs_dim = len(obs_spec.dims)
    act_dim = len(act_spec.dims)
    n_params = act_dim * obs_dim + act_dim

    param_rng = rng_from(mix_seed(config.seed, 0x5EED))
    mean = np.zeros(n_params)
    std = np.full(n_params, config.init_std)

    curve = TrainingCurve()
    best_theta = mean.copy()
    best_reward = -np.inf

    episode = 0
    for iteration in range(1, config.iterations + 1):
        thetas = mean + std * param_rng.standard_normal((config.population, n_params))
        rewards = np.empty(config.population)
        for j in range(config.population):
            policy = _unflatten(thetas[j], obs_dim, act_dim, obs_spec.names, None)
            acc = 0.0
            for _ in range(config.episodes_per_candidate):
                episode += 1
                acc += _run_episode(wrapped, policy, seed=mix_seed(config.seed, episode))
            rewards[j] = acc / config.episodes_per_candidate
            if rewards[j] > best_reward:
                best_reward = rewards[j]
                best_theta = thetas[j].copy()
        order = np.argsort(-rewards, kind="stable")
        mean, std = cem_update(thetas, rewards, config.n_elite)
        if iteration == 1:
            # One adaptation pass is enough to scale the inputs; freezing
            # afterwards keeps candidate scores comparable across iterations.
            norm_obs.freeze()

        ev = float("nan")
        if config.eval_every > 0 and iteration % config.eval_every == 0:
            was_frozen = norm_obs.frozen
            norm_obs.freeze()
            mean_policy = _unflatten(mean, obs_dim, act_dim, obs_spec.names, None)
            acc = 0.0
            for e in range(config.episodes_per_candidate):
                acc += _run_episode(
                    wrapped, mean_policy, seed=mix_seed(config.seed, 0xE7A1 + iteration * 131 + e)
                )
            ev = acc / config.episodes_per_candidate
            if not was_frozen:
                norm_obs.unfreeze()
        curve.append(
            iteration,
            float(rewards.mean()),
            float(rewards.max()),
            float(rewards[order[: config.n_elite]].mean()),
            ev,
        )

    stats = norm_obs.stats.to_dict()
    policy = _unflatten(best_theta, obs_dim, act_dim, obs_spec.names, stats)
    return policy, curve
