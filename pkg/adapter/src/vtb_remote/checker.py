"""Compliance checks for the standard agent-environment API.

Covers the contract DRL libraries rely on: space containment, reset/step
signatures and value types, and determinism under an explicit seed.
Raises ComplianceError on the first violated check.
"""

from __future__ import annotations

import numpy as np

from .client import RemoteEnv
from .spaces import Box, Discrete


class ComplianceError(AssertionError):
    pass


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ComplianceError(message)


def check_remote_env(env: RemoteEnv, steps: int = 10, seed: int = 123) -> None:
    _require(
        isinstance(env.observation_space, Box),
        "observation space must be a Box",
    )
    _require(
        isinstance(env.action_space, (Box, Discrete)) or env.action_space is None,
        "action space must be Box, Discrete or None",
    )

    obs, info = env.reset(seed=seed)
    _require(isinstance(obs, np.ndarray), "reset observation must be an ndarray")
    _require(obs.dtype == np.float64, "observation dtype must be float64")
    _require(obs.shape == env.observation_space.shape, "observation shape mismatch")
    _require(env.observation_space.contains(obs), "reset observation outside the space")
    _require(isinstance(info, dict), "reset info must be a dict")

    if env.action_space is not None:
        env.action_space.seed(seed)
    for i in range(steps):
        action = env.action_space.sample() if env.action_space is not None else None
        _require(
            env.action_space is None or env.action_space.contains(action),
            "sampled action outside its own space",
        )
        result = env.step(action)
        _require(len(result) == 5, "step must return a 5-tuple")
        obs, reward, terminated, truncated, info = result
        _require(isinstance(obs, np.ndarray), "step observation must be an ndarray")
        _require(env.observation_space.contains(obs), f"step {i} observation outside the space")
        _require(isinstance(reward, float), "reward must be a float")
        _require(isinstance(terminated, bool) and isinstance(truncated, bool),
                 "terminated/truncated must be bools")
        _require(terminated is False, "no terminal fault states are modeled")
        _require(isinstance(info, dict), "step info must be a dict")

    # Determinism under seed: same seed, same actions, same trajectory.
    if env.action_space is not None:
        env.action_space.seed(seed)
        actions = [env.action_space.sample() for _ in range(steps)]
    else:
        actions = [None] * steps
    first_obs, _ = env.reset(seed=seed)
    run1 = [env.step(a) for a in actions]
    second_obs, _ = env.reset(seed=seed)
    _require(np.array_equal(first_obs, second_obs), "reset not deterministic under seed")
    run2 = [env.step(a) for a in actions]
    for i, (r1, r2) in enumerate(zip(run1, run2)):
        _require(np.array_equal(r1[0], r2[0]), f"step {i} observation differs between seeded runs")
        _require(r1[1] == r2[1], f"step {i} reward differs between seeded runs")
        _require(r1[3] == r2[3], f"step {i} truncated flag differs between seeded runs")
