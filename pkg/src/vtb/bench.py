"""Seeded experiment runner, metrics, savings comparisons, and grid sweeps.

An experiment runs one controller on one environment for a number of
episodes with per-episode derived seeds, logging a monitor.csv per episode
(inside the environment's working directory) and a progress.csv of
per-episode metrics. A sweep runs the Cartesian product of parameter grids
as independent experiments, optionally across worker processes, and ranks
the combinations by aggregate mean reward; outputs are ordered by
combination index so reruns are bitwise identical.

Time-violation percentage and mean violation degrees are both reported in
every table: short but deep excursions and long shallow ones rank very
differently under the two metrics, so neither stands alone.
"""

from __future__ import annotations

import csv
import itertools
import json
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from . import presets
from .controllers import (
    CemConfig,
    LinearPolicy,
    PolicyController,
    RandomController,
    RbcIncremental,
    StaticController,
    cem_train,
    load_policy,
    save_policy,
)
from .envcore import EnvConfig, make_env
from .seeds import mix_seed
from .weather import OUParams
from .wrappers import CsvLogger, IncrementalAction, NormalizeAction, NormalizeObservation, RunningStats


class BenchError(Exception):
    pass


class EmptyLog(BenchError):
    pass


class OutputDirExists(BenchError):
    pass


class DivisionByZeroRef(BenchError):
    pass


@dataclass
class EpisodeLog:
    """Per-step records of one episode (just the columns metrics need)."""

    month: np.ndarray
    reward: np.ndarray
    power_W: np.ndarray
    violation_C: np.ndarray

    def __len__(self) -> int:
        return len(self.reward)

    @classmethod
    def from_monitor_csv(cls, path: Union[str, Path]) -> "EpisodeLog":
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            # duplicate column names possible (observed time variables);
            # take the first occurrence of each
            col = {name: header.index(name) for name in header}
            months, rewards, powers, violations = [], [], [], []
            for row in reader:
                months.append(int(row[col["month"]]))
                rewards.append(float(row[col["reward"]]))
                powers.append(float(row[col["power_W"]]))
                violations.append(float(row[col["violation_C"]]))
        return cls(
            np.asarray(months),
            np.asarray(rewards),
            np.asarray(powers),
            np.asarray(violations),
        )


@dataclass
class Metrics:
    mean_reward: float
    mean_power_W: float
    comfort_time_violation_pct: float
    mean_temp_violation_C: float
    monthly_mean_power_W: tuple[float, ...]
    monthly_comfort_violation_C: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "mean_reward": self.mean_reward,
            "mean_power_W": self.mean_power_W,
            "comfort_time_violation_pct": self.comfort_time_violation_pct,
            "mean_temp_violation_C": self.mean_temp_violation_C,
            "monthly_mean_power_W": list(self.monthly_mean_power_W),
            "monthly_comfort_violation_C": list(self.monthly_comfort_violation_C),
        }


def compute_metrics(log: EpisodeLog) -> Metrics:
    """Aggregate one episode log (Table-style column semantics).

    Months absent from the log report 0.0 in the monthly arrays.
    """
    n = len(log)
    if n == 0:
        raise EmptyLog("episode log has no steps")
    monthly_power = [0.0] * 12
    monthly_violation = [0.0] * 12
    for m in range(1, 13):
        mask = log.month == m
        if mask.any():
            monthly_power[m - 1] = float(log.power_W[mask].mean())
            monthly_violation[m - 1] = float(log.violation_C[mask].mean())
    return Metrics(
        mean_reward=float(log.reward.mean()),
        mean_power_W=float(log.power_W.mean()),
        comfort_time_violation_pct=100.0 * float((log.violation_C > 0).sum()) / n,
        mean_temp_violation_C=float(log.violation_C.mean()),
        monthly_mean_power_W=tuple(monthly_power),
        monthly_comfort_violation_C=tuple(monthly_violation),
    )


def aggregate_metrics(per_episode: Sequence[Metrics]) -> Metrics:
    """Mean of per-episode metrics, element-wise for the monthly arrays."""
    if not per_episode:
        raise EmptyLog("no episodes to aggregate")
    k = len(per_episode)
    return Metrics(
        mean_reward=sum(m.mean_reward for m in per_episode) / k,
        mean_power_W=sum(m.mean_power_W for m in per_episode) / k,
        comfort_time_violation_pct=sum(m.comfort_time_violation_pct for m in per_episode) / k,
        mean_temp_violation_C=sum(m.mean_temp_violation_C for m in per_episode) / k,
        monthly_mean_power_W=tuple(
            sum(m.monthly_mean_power_W[i] for m in per_episode) / k for i in range(12)
        ),
        monthly_comfort_violation_C=tuple(
            sum(m.monthly_comfort_violation_C[i] for m in per_episode) / k for i in range(12)
        ),
    )


@dataclass
class ExperimentConfig:
    """One controller on one environment for a number of episodes.

    ``env`` is a preset name or an EnvConfig. ``controller`` is a spec
    dict: kind static|rbc|random|cem|policy plus kind-specific keys
    (heating/cooling, comfort_range, path, CemConfig fields, and for cem an
    optional ``train`` dict of EnvConfig overrides applied to a copy of the
    experiment environment for training).
    """

    env: Union[str, EnvConfig]
    controller: Mapping
    episodes: int = 1
    seed: int = 0
    out_dir: Union[str, Path] = "experiment-out"
    overwrite: bool = False

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if "kind" not in self.controller:
            raise ValueError("controller spec needs a 'kind'")


@dataclass
class ExperimentResult:
    per_episode: list[Metrics]
    aggregate: Metrics
    log_paths: list[Path]
    progress_path: Path
    out_dir: Path
    training_curve_path: Path | None = None


def _resolve_env_config(env: Union[str, EnvConfig]) -> EnvConfig:
    if isinstance(env, EnvConfig):
        return replace(env)
    return presets.preset_config(env)


def _apply_env_overrides(cfg: EnvConfig, overrides: Mapping) -> EnvConfig:
    cfg = replace(cfg)
    for key, value in overrides.items():
        if key == "weather_variability" and isinstance(value, (list, tuple)):
            value = OUParams(*value)
        if not hasattr(cfg, key):
            raise ValueError(f"unknown EnvConfig field: {key}")
        setattr(cfg, key, tuple(value) if isinstance(value, list) else value)
    return cfg


def _zone_temp_indices(env) -> list[int]:
    names = env.describe_spaces()[0].names
    idx = [i for i, n in enumerate(names) if n.startswith("air_temperature_")]
    if not idx:
        raise BenchError("controller needs zone temperatures in the observation")
    return idx


def _build_stack(base_env, spec: Mapping, seed: int, out_dir: Path):
    """Wrap the logged environment for the controller kind; returns
    (env, controller, extra artifact paths)."""
    kind = spec["kind"]
    env = CsvLogger(base_env)
    extras: dict = {}
    if kind == "static":
        controller = StaticController(
            heating=float(spec.get("heating", 20.0)),
            cooling=float(spec.get("cooling", 23.0)),
        )
    elif kind == "rbc":
        comfort = tuple(spec.get("comfort_range", (18.0, 27.0)))
        env = IncrementalAction(env)
        controller = RbcIncremental(comfort, _zone_temp_indices(env))
    elif kind == "random":
        controller = RandomController(
            env.describe_spaces()[1], seed=mix_seed(seed, 0xA11)
        )
    elif kind == "policy":
        policy = load_policy(spec["path"])
        env = _wrap_for_policy(env, policy)
        controller = PolicyController(policy)
    elif kind == "cem":
        policy, curve_path, policy_path = _train_cem_for_experiment(spec, seed, out_dir)
        extras["training_curve_path"] = curve_path
        extras["policy_path"] = policy_path
        env = _wrap_for_policy(env, policy)
        controller = PolicyController(policy)
    else:
        raise ValueError(f"unknown controller kind: {kind}")
    return env, controller, extras


def _wrap_for_policy(env, policy: LinearPolicy):
    norm = NormalizeObservation(env)
    if policy.norm_stats is not None:
        norm.stats = RunningStats.from_dict(policy.norm_stats)
    norm.freeze()
    return NormalizeAction(norm)


def _cem_config_from_spec(spec: Mapping, seed: int) -> CemConfig:
    keys = (
        "population",
        "elite_frac",
        "iterations",
        "init_std",
        "episodes_per_candidate",
        "eval_every",
    )
    kwargs = {k: spec[k] for k in keys if k in spec}
    kwargs["seed"] = int(spec.get("seed", mix_seed(seed, 0xCE)))
    return CemConfig(**kwargs)


def _train_cem_for_experiment(spec: Mapping, seed: int, out_dir: Path):
    base_cfg = _resolve_env_config(spec["train_env"]) if "train_env" in spec else None
    if base_cfg is None:
        raise ValueError("cem controller spec needs 'train_env' "
                         "(set it to the experiment env or an override)")
    if "train" in spec:
        base_cfg = _apply_env_overrides(base_cfg, spec["train"])
    train_root = out_dir / "train"
    train_root.mkdir(parents=True, exist_ok=True)
    env = make_env(base_cfg, output_root=train_root)
    try:
        policy, curve = cem_train(env, _cem_config_from_spec(spec, seed))
    finally:
        env.close()
    curve_path = out_dir / "training_curve.csv"
    curve.to_csv(curve_path)
    policy_path = out_dir / "policy.json"
    save_policy(policy, policy_path)
    return policy, curve_path, policy_path


PROGRESS_HEADER = (
    "episode,mean_reward,mean_power_W,comfort_time_violation_pct,mean_temp_violation_C"
)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured controller and write progress.csv + metrics.json."""
    out_dir = Path(config.out_dir)
    if out_dir.exists():
        if not config.overwrite:
            raise OutputDirExists(str(out_dir))
        shutil.rmtree(out_dir)
    out_dir.mkdir(parents=True)

    controller_spec = dict(config.controller)
    if controller_spec.get("kind") == "cem" and "train_env" not in controller_spec:
        controller_spec["train_env"] = _resolve_env_config(config.env)

    base_env = make_env(_resolve_env_config(config.env), output_root=out_dir)
    env, controller, extras = _build_stack(base_env, controller_spec, config.seed, out_dir)

    per_episode: list[Metrics] = []
    log_paths: list[Path] = []
    try:
        for ep in range(config.episodes):
            obs, _ = env.reset(seed=config.seed) if ep == 0 else env.reset()
            months, rewards, powers, violations = [], [], [], []
            while True:
                res = env.step(controller.act(obs))
                obs = res.observation
                months.append(res.info["month"])
                rewards.append(res.reward)
                powers.append(res.info["power_W"])
                violations.append(res.info["violation_C"])
                if res.truncated:
                    break
            log = EpisodeLog(
                np.asarray(months),
                np.asarray(rewards),
                np.asarray(powers),
                np.asarray(violations),
            )
            per_episode.append(compute_metrics(log))
            log_paths.append(Path(base_env.episode_dir) / "monitor.csv")
    finally:
        env.close()

    aggregate = aggregate_metrics(per_episode)
    progress_path = out_dir / "progress.csv"
    with progress_path.open("w") as fh:
        fh.write(PROGRESS_HEADER + "\n")
        for i, m in enumerate(per_episode, start=1):
            fh.write(
                f"{i},{m.mean_reward!r},{m.mean_power_W!r},"
                f"{m.comfort_time_violation_pct!r},{m.mean_temp_violation_C!r}\n"
            )
    (out_dir / "metrics.json").write_text(
        json.dumps(
            {
                "aggregate": aggregate.to_dict(),
                "per_episode": [m.to_dict() for m in per_episode],
            },
            indent=1,
        )
    )
    return ExperimentResult(
        per_episode=per_episode,
        aggregate=aggregate,
        log_paths=log_paths,
        progress_path=progress_path,
        out_dir=out_dir,
        training_curve_path=extras.get("training_curve_path"),
    )


def compare(reference: Metrics, candidates: Sequence[Metrics], labels: Sequence[str] | None = None):
    """Total and monthly power savings (%) plus comfort deltas per candidate.

    savings% = 100 * (ref - cand) / ref. A zero reference month raises
    DivisionByZeroRef.
    """
    labels = list(labels) if labels is not None else [
        f"candidate-{i + 1}" for i in range(len(candidates))
    ]
    if reference.mean_power_W == 0:
        raise DivisionByZeroRef("reference mean power is zero")
    rows = []
    for label, cand in zip(labels, candidates):
        monthly = []
        for m in range(12):
            ref_p = reference.monthly_mean_power_W[m]
            if ref_p == 0:
                raise DivisionByZeroRef(f"reference power for month {m + 1} is zero")
            monthly.append(100.0 * (ref_p - cand.monthly_mean_power_W[m]) / ref_p)
        rows.append(
            {
                "label": label,
                "total_power_savings_pct": 100.0
                * (reference.mean_power_W - cand.mean_power_W)
                / reference.mean_power_W,
                "monthly_power_savings_pct": monthly,
                "comfort_time_violation_delta_pct": cand.comfort_time_violation_pct
                - reference.comfort_time_violation_pct,
                "mean_temp_violation_delta_C": cand.mean_temp_violation_C
                - reference.mean_temp_violation_C,
            }
        )
    return rows


def write_compare_csv(rows, path: Union[str, Path]) -> None:
    with Path(path).open("w") as fh:
        month_cols = ",".join(f"savings_m{m:02d}_pct" for m in range(1, 13))
        fh.write(
            "label,total_power_savings_pct,"
            + month_cols
            + ",comfort_time_violation_delta_pct,mean_temp_violation_delta_C\n"
        )
        for row in rows:
            cells = [row["label"], repr(row["total_power_savings_pct"])]
            cells += [repr(v) for v in row["monthly_power_savings_pct"]]
            cells += [
                repr(row["comfort_time_violation_delta_pct"]),
                repr(row["mean_temp_violation_delta_C"]),
            ]
            fh.write(",".join(cells) + "\n")


@dataclass
class SweepConfig:
    """Cartesian product of named parameter grids over a base experiment.

    Grid keys address the experiment: ``controller.<field>`` mutates the
    controller spec, ``env.<field>`` mutates the environment config,
    ``episodes``/``seed`` the experiment itself.
    """

    base: ExperimentConfig
    grids: Mapping[str, Sequence]
    parallelism: int = 1

    def __post_init__(self):
        if not self.grids or any(len(v) == 0 for v in self.grids.values()):
            raise ValueError("grids must be non-empty")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


def _combo_config(base: ExperimentConfig, keys, values, index: int, out_root: Path) -> ExperimentConfig:
    cfg = replace(base)
    cfg.controller = dict(base.controller)
    env_overrides = {}
    for key, value in zip(keys, values):
        if key.startswith("controller."):
            cfg.controller[key.split(".", 1)[1]] = value
        elif key.startswith("env."):
            env_overrides[key.split(".", 1)[1]] = value
        elif key in ("episodes", "seed"):
            setattr(cfg, key, value)
        else:
            raise ValueError(f"unknown sweep key: {key}")
    if env_overrides:
        cfg.env = _apply_env_overrides(_resolve_env_config(cfg.env), env_overrides)
    cfg.seed = mix_seed(base.seed, index) if "seed" not in keys else cfg.seed
    cfg.out_dir = out_root / f"combo-{index:03d}"
    cfg.overwrite = True
    return cfg


def _run_combo(args):
    index, cfg = args
    result = run_experiment(cfg)
    return index, result.aggregate


def grid_sweep(config: SweepConfig, out_dir: Union[str, Path] = None):
    """Run every grid combination; rank by aggregate mean reward.

    Returns (ranked rows, results csv path, failures). Partial results are
    persisted with a failures manifest when combinations error out.
    """
    out_root = Path(out_dir) if out_dir is not None else Path(config.base.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    keys = list(config.grids.keys())
    combos = list(itertools.product(*(config.grids[k] for k in keys)))
    jobs = [
        (i, _combo_config(config.base, keys, values, i, out_root))
        for i, values in enumerate(combos)
    ]

    results: dict[int, Metrics] = {}
    failures: list[tuple[int, str]] = []
    if config.parallelism == 1:
        for job in jobs:
            try:
                idx, metrics = _run_combo(job)
                results[idx] = metrics
            except Exception as exc:  # noqa: BLE001 - recorded in the manifest
                failures.append((job[0], f"{type(exc).__name__}: {exc}"))
    else:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            futures = {pool.submit(_run_combo, job): job[0] for job in jobs}
            for future, idx in futures.items():
                try:
                    i, metrics = future.result()
                    results[i] = metrics
                except Exception as exc:  # noqa: BLE001
                    failures.append((idx, f"{type(exc).__name__}: {exc}"))
    failures.sort()

    rows = []
    for i, values in enumerate(combos):
        if i not in results:
            continue
        m = results[i]
        row = {"combination": i}
        row.update({k: v for k, v in zip(keys, values)})
        row.update(
            {
                "mean_reward": m.mean_reward,
                "mean_power_W": m.mean_power_W,
                "comfort_time_violation_pct": m.comfort_time_violation_pct,
                "mean_temp_violation_C": m.mean_temp_violation_C,
            }
        )
        rows.append(row)
    rows.sort(key=lambda r: (-r["mean_reward"], r["combination"]))

    results_path = out_root / "sweep_results.csv"
    metric_cols = [
        "mean_reward",
        "mean_power_W",
        "comfort_time_violation_pct",
        "mean_temp_violation_C",
    ]
    with results_path.open("w") as fh:
        fh.write(",".join(["combination"] + keys + metric_cols) + "\n")
        for row in rows:
            cells = [str(row["combination"])]
            cells += [str(row[k]) for k in keys]
            cells += [repr(row[c]) for c in metric_cols]
            fh.write(",".join(cells) + "\n")

    if failures:
        with (out_root / "failures.csv").open("w") as fh:
            fh.write("combination,error\n")
            for idx, msg in failures:
                fh.write(f"{idx},{json.dumps(msg)}\n")

    return rows, results_path, failures
