"""Composable processing layers around an environment.

Wrappers share the environment's call surface (reset/step/describe_spaces/
close) and can be nested; each layer transforms observations, actions or
side effects without touching the wrapped environment's internals. Chains
preserve determinism, episode length and the truncated flag.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .envcore import BoxDim, DEFAULT_SCHEDULE, Environment, SpaceSpec, StepResult, default_setpoint_grid


class WrapperError(Exception):
    pass


class IndexOutOfRange(WrapperError):
    pass


class IoError(WrapperError):
    pass


class Wrapper:
    """Base layer: delegates everything to the wrapped environment."""

    def __init__(self, env):
        self._env = env

    def __getattr__(self, name):
        # Fall through to the wrapped environment for base attributes such
        # as workdir, episode_dir or model.
        return getattr(self._env, name)

    @property
    def unwrapped(self) -> Environment:
        inner = self._env
        while isinstance(inner, Wrapper):
            inner = inner._env
        return inner

    def reset(self, seed: int | None = None):
        return self._env.reset(seed=seed)

    def step(self, action=None) -> StepResult:
        return self._env.step(action)

    def describe_spaces(self):
        return self._env.describe_spaces()

    def close(self):
        self._env.close()


class RunningStats:
    """Per-dimension Welford mean/variance tracker with a clip bound."""

    def __init__(self, dim: int, clip: float = 10.0):
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)
        self.clip = clip
        self._scale: np.ndarray | None = None  # 1/max(std, 1e-8), lazily cached

    def update(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)
        self._scale = None

    def std(self) -> np.ndarray:
        if self.count == 0:
            return np.ones_like(self.mean)
        return np.sqrt(self.m2 / self.count)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        if self._scale is None:
            self._scale = 1.0 / np.maximum(self.std(), 1e-8)
        z = (x - self.mean) * self._scale
        return np.minimum(np.maximum(z, -self.clip), self.clip)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean.tolist(),
            "m2": self.m2.tolist(),
            "clip": self.clip,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunningStats":
        stats = cls(len(doc["mean"]), clip=doc.get("clip", 10.0))
        stats.count = int(doc["count"])
        stats.mean = np.asarray(doc["mean"], dtype=np.float64)
        stats.m2 = np.asarray(doc["m2"], dtype=np.float64)
        return stats


class NormalizeObservation(Wrapper):
    """Emit (x - mean) / max(std, 1e-8), clipped, with online Welford stats.

    Stats update on every observation unless frozen; freeze for evaluation
    so identical raw observations map to identical outputs. Stats can be
    persisted and restored for reuse across runs.
    """

    def __init__(self, env, clip: float = 10.0, stats: RunningStats | None = None):
        super().__init__(env)
        obs_spec, _ = env.describe_spaces()
        self._dim = len(obs_spec.dims)
        self.stats = stats if stats is not None else RunningStats(self._dim, clip)
        if len(self.stats.mean) != self._dim:
            raise WrapperError("stats dimension does not match the observation spec")
        self.frozen = False
        self._spec = SpaceSpec(
            "box",
            tuple(BoxDim(d.name, -self.stats.clip, self.stats.clip) for d in obs_spec.dims),
        )

    def freeze(self) -> None:
        self.frozen = True

    def unfreeze(self) -> None:
        self.frozen = False

    def save_stats(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.stats.to_dict()))

    def load_stats(self, path: str | Path) -> None:
        doc = json.loads(Path(path).read_text())
        stats = RunningStats.from_dict(doc)
        if len(stats.mean) != self._dim:
            raise WrapperError("stats dimension does not match the observation spec")
        self.stats = stats

    def _transform(self, obs: np.ndarray) -> np.ndarray:
        if not self.frozen:
            self.stats.update(obs)
        return self.stats.normalize(obs)

    def reset(self, seed: int | None = None):
        obs, info = self._env.reset(seed=seed)
        return self._transform(obs), info

    def step(self, action=None) -> StepResult:
        res = self._env.step(action)
        res.observation = self._transform(res.observation)
        return res

    def describe_spaces(self):
        _, act = self._env.describe_spaces()
        return self._spec, act


class NormalizeAction(Wrapper):
    """Outer action space is [-1, 1] per dimension, mapped affinely."""

    def __init__(self, env):
        super().__init__(env)
        _, act_spec = env.describe_spaces()
        if act_spec is None or act_spec.kind != "box":
            raise WrapperError("NormalizeAction requires a continuous action space")
        self._low = act_spec.lows()
        self._high = act_spec.highs()
        self._half_span = 0.5 * (self._high - self._low)
        self._spec = SpaceSpec(
            "box", tuple(BoxDim(d.name, -1.0, 1.0) for d in act_spec.dims)
        )

    def map_action(self, action) -> np.ndarray:
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        return self._low + (a + 1.0) * self._half_span

    def invert_action(self, inner_action) -> np.ndarray:
        x = np.asarray(inner_action, dtype=np.float64).reshape(-1)
        return 2.0 * (x - self._low) / (self._high - self._low) - 1.0

    def step(self, action=None) -> StepResult:
        return self._env.step(self.map_action(action))

    def describe_spaces(self):
        obs, _ = self._env.describe_spaces()
        return obs, self._spec


class DiscretizeAction(Wrapper):
    """Expose a discrete index space over a table of continuous actions."""

    def __init__(self, env, table: Sequence[Sequence[float]] | None = None):
        super().__init__(env)
        _, act_spec = env.describe_spaces()
        if act_spec is None or act_spec.kind != "box":
            raise WrapperError("DiscretizeAction requires a continuous action space")
        if table is None:
            table = default_setpoint_grid(
                (act_spec.dims[0].low, act_spec.dims[0].high),
                (act_spec.dims[1].low, act_spec.dims[1].high),
            )
        self._table = tuple(tuple(float(v) for v in entry) for entry in table)
        self._spec = SpaceSpec("discrete", act_spec.dims, table=self._table)

    def step(self, action=None) -> StepResult:
        idx = int(action)
        if idx != action or not 0 <= idx < len(self._table):
            raise IndexOutOfRange(f"index {action!r} outside [0, {len(self._table)})")
        return self._env.step(self._table[idx])

    def describe_spaces(self):
        obs, _ = self._env.describe_spaces()
        return obs, self._spec


class IncrementalAction(Wrapper):
    """Drive setpoints by per-step deltas instead of absolute commands.

    Outer actions are delta vectors snapped to the allowed per-step changes
    (default -1/0/+1 degC per setpoint); the maintained setpoints are
    clamped to bounds and restored to the defaults on reset.
    """

    def __init__(
        self,
        env,
        deltas: Sequence[float] = (-1.0, 0.0, 1.0),
        bounds: Sequence[tuple[float, float]] | None = None,
        start: tuple[float, float] = DEFAULT_SCHEDULE,
    ):
        super().__init__(env)
        _, act_spec = env.describe_spaces()
        if act_spec is None or act_spec.kind != "box":
            raise WrapperError("IncrementalAction requires a continuous action space")
        if bounds is None:
            bounds = [(d.low, d.high) for d in act_spec.dims]
        self._bounds = [(float(lo), float(hi)) for lo, hi in bounds]
        self._deltas = np.asarray(sorted(deltas), dtype=np.float64)
        self._start = (float(start[0]), float(start[1]))
        self._current = list(self._start)
        lo, hi = float(self._deltas[0]), float(self._deltas[-1])
        self._spec = SpaceSpec(
            "box",
            tuple(BoxDim(f"delta_{d.name}", lo, hi) for d in act_spec.dims),
        )

    @property
    def setpoints(self) -> tuple[float, float]:
        return tuple(self._current)

    def _snap(self, value: float) -> float:
        return float(self._deltas[np.argmin(np.abs(self._deltas - value))])

    def reset(self, seed: int | None = None):
        self._current = list(self._start)
        return self._env.reset(seed=seed)

    def step(self, action=None) -> StepResult:
        arr = np.asarray(action, dtype=np.float64).reshape(-1)
        for i, (lo, hi) in enumerate(self._bounds):
            self._current[i] = min(max(self._current[i] + self._snap(arr[i]), lo), hi)
        return self._env.step(tuple(self._current))

    def describe_spaces(self):
        obs, _ = self._env.describe_spaces()
        return obs, self._spec


class StackObservations(Wrapper):
    """Concatenate the last k observations, oldest first.

    After reset the first observation is replicated k times.
    """

    def __init__(self, env, k: int):
        super().__init__(env)
        if k < 1:
            raise WrapperError("k must be >= 1")
        self.k = k
        self._buffer: list[np.ndarray] = []
        obs_spec, _ = env.describe_spaces()
        dims = []
        for lag in range(k - 1, -1, -1):
            for d in obs_spec.dims:
                name = d.name if k == 1 else f"{d.name}_lag{lag}"
                dims.append(BoxDim(name, d.low, d.high))
        self._spec = SpaceSpec("box", tuple(dims))

    def _stacked(self) -> np.ndarray:
        return np.concatenate(self._buffer)

    def reset(self, seed: int | None = None):
        obs, info = self._env.reset(seed=seed)
        self._buffer = [obs] * self.k
        return self._stacked(), info

    def step(self, action=None) -> StepResult:
        res = self._env.step(action)
        self._buffer = self._buffer[1:] + [res.observation]
        res.observation = self._stacked()
        return res

    def describe_spaces(self):
        _, act = self._env.describe_spaces()
        return self._spec, act


class CsvLogger(Wrapper):
    """Append one row per step; buffered, flushed on truncation and close.

    With ``path=None`` rows land in ``<episode dir>/monitor.csv`` of the
    wrapped environment; an explicit path logs the current episode to that
    file instead. Writability is checked at wrap time so misconfigured
    paths fail fast rather than mid-run. Observation values are logged as
    seen by this layer (wrap the base environment to log raw values).
    """

    def __init__(self, env, path: str | Path | None = None):
        super().__init__(env)
        self._path = Path(path) if path is not None else None
        if self._path is not None:
            try:
                with self._path.open("a"):
                    pass
            except OSError as exc:
                raise IoError(f"cannot write {self._path}: {exc}") from None
        else:
            workdir = getattr(env, "workdir", None)
            if workdir is None:
                raise IoError("wrapped environment has no working directory")
            probe = Path(workdir) / ".monitor-probe"
            try:
                probe.touch()
                probe.unlink()
            except OSError as exc:
                raise IoError(f"cannot write under {workdir}: {exc}") from None
        self._rows: list[str] = []
        self._header: str | None = None
        self._target: Path | None = self._path

    def _format_row(self, res: StepResult) -> str:
        info = res.info
        obs = res.observation
        act = info["applied_action"]
        cells = [str(info["timestep"]), str(info["month"]), str(info["day"]), str(info["hour"])]
        cells += [repr(float(v)) for v in obs]
        cells += [repr(float(act[0])), repr(float(act[1]))]
        cells += [
            repr(float(res.reward)),
            repr(float(info["energy_term"])),
            repr(float(info["comfort_term"])),
            repr(float(info["power_W"])),
            repr(float(info["violation_C"])),
            "1" if res.truncated else "0",
        ]
        return ",".join(cells)

    def _build_header(self) -> str:
        obs_spec, _ = self.describe_spaces()
        cols = ["step", "month", "day", "hour"]
        cols += [d.name for d in obs_spec.dims]
        cols += ["act_heating_setpoint", "act_cooling_setpoint"]
        cols += ["reward", "energy_term", "comfort_term", "power_W", "violation_C", "truncated"]
        return ",".join(cols)

    def flush(self) -> None:
        if not self._rows or self._target is None:
            return
        with self._target.open("w") as fh:
            fh.write((self._header or self._build_header()) + "\n")
            fh.write("\n".join(self._rows) + "\n")
        self._rows = []

    @property
    def last_monitor_path(self) -> Path | None:
        return self._target

    def reset(self, seed: int | None = None):
        self.flush()  # persist a partial episode rather than dropping it
        out = self._env.reset(seed=seed)
        if self._path is None:
            self._target = Path(self.unwrapped.episode_dir) / "monitor.csv"
        self._header = self._build_header()
        self._rows = []
        return out

    def step(self, action=None) -> StepResult:
        res = self._env.step(action)
        self._rows.append(self._format_row(res))
        if res.truncated:
            self.flush()
        return res

    def close(self):
        self.flush()
        self._env.close()
