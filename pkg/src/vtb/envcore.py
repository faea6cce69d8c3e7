"""Episode state machine: construction, reset, step, spaces, teardown.

An :class:`Environment` couples one building model to an annual weather
series and exposes the usual agent loop: ``reset`` starts an episode
(weather selection, optional drybulb perturbation, 24 h unlogged warm-up
under the default schedule), ``step`` applies a setpoint command for one
control interval and returns the observation, reward and bookkeeping info.

Determinism contract: (config, seed, action sequence) fully determines every
observation, reward and info value. Each reset derives an episode seed
``mix_seed(base_seed, k)`` where ``k`` restarts at 1 whenever an explicit
seed is passed; the episode seed drives weather-file selection and the
perturbation noise stream.
"""

from __future__ import annotations

import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from . import rewards as rw
from .seeds import mix_seed, rng_from
from .thermal import BuildingModel, load_building
from .weather import (
    CAL_DAY,
    CAL_HOUR,
    CAL_MONTH,
    HOURS_PER_YEAR,
    SECONDS_PER_YEAR,
    OUParams,
    WeatherSeries,
    apply_ou_noise,
    hour_of_year,
    parse_weather_csv,
)

DEFAULT_SCHEDULE = (20.0, 23.0)
DEFAULT_ACTION_BOUNDS = ((15.0, 22.0), (22.0, 30.0))
SENSOR_BOUND = 5e6


class EnvError(Exception):
    pass


class InvalidSpace(EnvError):
    pass


class NotReset(EnvError):
    pass


class DiscreteIndexOutOfRange(EnvError):
    pass


@dataclass(frozen=True)
class BoxDim:
    name: str
    low: float
    high: float


@dataclass(frozen=True)
class SpaceSpec:
    """Declared bounds and ordering of a continuous box or a discrete table.

    Discrete spaces keep the continuous dims of the underlying action vector
    and a table mapping each index to one such vector.
    """

    kind: str  # "box" | "discrete"
    dims: tuple[BoxDim, ...]
    table: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("box", "discrete"):
            raise InvalidSpace(f"unknown space kind: {self.kind}")
        for d in self.dims:
            if not d.low <= d.high:
                raise InvalidSpace(f"dimension {d.name}: lower {d.low} > upper {d.high}")
        if self.kind == "discrete":
            if not self.table:
                raise InvalidSpace("discrete space requires a non-empty table")
            for i, entry in enumerate(self.table):
                if len(entry) != len(self.dims):
                    raise InvalidSpace(f"table entry {i} has wrong arity")
                for v, d in zip(entry, self.dims):
                    if not d.low <= v <= d.high:
                        raise InvalidSpace(
                            f"table entry {i} value {v} outside [{d.low}, {d.high}] for {d.name}"
                        )
        elif self.table is not None:
            raise InvalidSpace("box space must not carry a table")

    @property
    def count(self) -> int:
        if self.kind != "discrete":
            raise InvalidSpace("count is defined for discrete spaces only")
        return len(self.table)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    def lows(self) -> np.ndarray:
        return np.array([d.low for d in self.dims])

    def highs(self) -> np.ndarray:
        return np.array([d.high for d in self.dims])

    def clamp(self, vector) -> np.ndarray:
        arr = np.asarray(vector, dtype=np.float64).reshape(-1)
        if arr.shape[0] != len(self.dims):
            raise InvalidSpace(
                f"expected {len(self.dims)} action values, got {arr.shape[0]}"
            )
        return np.clip(arr, self.lows(), self.highs())

    def contains(self, vector) -> bool:
        arr = np.asarray(vector, dtype=np.float64).reshape(-1)
        if arr.shape[0] != len(self.dims):
            return False
        return bool(np.all(arr >= self.lows()) and np.all(arr <= self.highs()))


def setpoint_box(
    heat_bounds: tuple[float, float] = DEFAULT_ACTION_BOUNDS[0],
    cool_bounds: tuple[float, float] = DEFAULT_ACTION_BOUNDS[1],
) -> SpaceSpec:
    """Continuous action space over (heating, cooling) setpoints."""
    return SpaceSpec(
        "box",
        (
            BoxDim("heating_setpoint", *heat_bounds),
            BoxDim("cooling_setpoint", *cool_bounds),
        ),
    )


def default_setpoint_grid(
    heat_bounds: tuple[float, float] = DEFAULT_ACTION_BOUNDS[0],
    cool_bounds: tuple[float, float] = DEFAULT_ACTION_BOUNDS[1],
) -> tuple[tuple[float, float], ...]:
    """Integer setpoint grid, row-major with heating as the major axis.

    Index 0 maps to (heat low, cool low); the default bounds give an
    8 x 9 = 72 entry table.
    """
    heats = range(int(heat_bounds[0]), int(heat_bounds[1]) + 1)
    cools = range(int(cool_bounds[0]), int(cool_bounds[1]) + 1)
    return tuple((float(h), float(c)) for h in heats for c in cools)


def setpoint_discrete(
    heat_bounds: tuple[float, float] = DEFAULT_ACTION_BOUNDS[0],
    cool_bounds: tuple[float, float] = DEFAULT_ACTION_BOUNDS[1],
) -> SpaceSpec:
    """Discrete action space over the integer setpoint grid."""
    return SpaceSpec(
        "discrete",
        (
            BoxDim("heating_setpoint", *heat_bounds),
            BoxDim("cooling_setpoint", *cool_bounds),
        ),
        table=default_setpoint_grid(heat_bounds, cool_bounds),
    )


@dataclass
class EnvConfig:
    """Construction surface of an environment.

    ``action_space=None`` selects the built-in default controller path:
    actions are ignored and the default schedule (heating 20, cooling 23)
    drives the plant. ``variables=None`` observes the full sensor catalog
    of the building. ``run_period`` is (start month, start day, end month,
    end day), inclusive; ``substep_s`` is the internal integration substep.
    """

    building_file: Union[str, Path]
    weather_files: tuple[Union[str, Path], ...]
    action_space: SpaceSpec | None = None
    time_variables: tuple[str, ...] = ("month", "day", "hour")
    variables: tuple[str, ...] | None = None
    weather_variability: OUParams | None = None
    reward: rw.RewardSpec | rw.RewardFn = field(default_factory=rw.LinearRewardSpec)
    max_ep_data_store_num: int = 10
    env_name: str = "eplus-env-v1"
    timesteps_per_hour: int = 4
    run_period: tuple[int, int, int, int] = (1, 1, 12, 31)
    substep_s: float = 60.0

    def __post_init__(self):
        if isinstance(self.weather_files, (str, Path)):
            self.weather_files = (self.weather_files,)
        else:
            self.weather_files = tuple(self.weather_files)
        if not self.weather_files:
            raise ValueError("at least one weather file required")
        if self.timesteps_per_hour <= 0 or 60 % self.timesteps_per_hour != 0:
            raise ValueError("timesteps_per_hour must divide 60 evenly")
        if self.max_ep_data_store_num < 1:
            raise ValueError("max_ep_data_store_num must be >= 1")
        if self.substep_s <= 0:
            raise ValueError("substep_s must be > 0")
        for tv in self.time_variables:
            if tv not in ("month", "day", "hour"):
                raise ValueError(f"unknown time variable: {tv}")


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool   # always False: no terminal fault states are modeled
    truncated: bool    # True exactly at the final step of the episode
    info: dict


_WEATHER_SENSORS = (
    "outdoor_temperature",
    "outdoor_humidity",
    "wind_speed",
    "wind_direction",
    "diffuse_solar_radiation",
    "direct_solar_radiation",
)
_TIME_ORDER = ("month", "day", "hour")


class Environment:
    """One building + weather episode loop. Single caller; no locking."""

    def __init__(self, config: EnvConfig, output_root: Union[str, Path, None] = None):
        self.config = config
        self.model: BuildingModel = load_building(config.building_file)
        self._series_pool: list[WeatherSeries] = [
            parse_weather_csv(p) for p in config.weather_files
        ]

        # Run-period timing.
        m1, d1, m2, d2 = config.run_period
        self._start_hour = hour_of_year(m1, d1, 0)
        self._end_hour = hour_of_year(m2, d2, 23) + 1
        if self._end_hour <= self._start_hour:
            raise ValueError("run_period must end after it starts")
        self.interval_s = 3600 // config.timesteps_per_hour
        self.episode_steps = (self._end_hour - self._start_hour) * config.timesteps_per_hour
        self._n_sub = max(1, -(-self.interval_s // int(config.substep_s)))
        self._dt = self.interval_s / self._n_sub
        bound = self.model.stability_bound()
        if self._dt > bound:
            raise ValueError(
                f"substep {self._dt} s exceeds the model stability bound {bound:.1f} s"
            )

        self._validate_action_space(config.action_space)
        self.observation_spec = self._build_observation_spec()
        self.action_spec = config.action_space

        # Working directory <env_name>-res<N>.
        root = Path(output_root) if output_root is not None else Path.cwd()
        n = 1
        while True:
            candidate = root / f"{config.env_name}-res{n}"
            try:
                candidate.mkdir(parents=True, exist_ok=False)
                break
            except FileExistsError:
                n += 1
        self.workdir = candidate

        self._base_seed = 0
        self._seed_episode = 0
        self._storage_episode = 0
        self._episode_dirs: list[Path] = []
        self._ready = False
        self._closed = False
        # Comfort range provider for the violation reported in info; custom
        # reward callables fall back to the default ranges.
        self._range_spec = (
            config.reward
            if isinstance(config.reward, rw.LinearRewardSpec)
            else rw.LinearRewardSpec()
        )
        # Plain LinearRewardSpec gets an inlined evaluation in the step loop
        # (same arithmetic as rewards.linear_reward; cross-checked in tests).
        self._plain_linear_reward = type(config.reward) is rw.LinearRewardSpec
        if self.action_spec is not None and self.action_spec.kind == "box":
            self._act_bounds = (
                self.action_spec.dims[0].low,
                self.action_spec.dims[0].high,
                self.action_spec.dims[1].low,
                self.action_spec.dims[1].high,
            )
        else:
            self._act_bounds = None

    # -- space helpers ---------------------------------------------------

    def _validate_action_space(self, spec: SpaceSpec | None) -> None:
        if spec is None:
            return
        if len(spec.dims) != 2:
            raise InvalidSpace("action space must have (heating, cooling) dims")
        deadband = self.model.hvac.deadband
        if spec.kind == "box":
            heat_low = spec.dims[0].low
            cool_high = spec.dims[1].high
            if heat_low + deadband > cool_high:
                raise InvalidSpace(
                    "no admissible command: heating lower bound + deadband "
                    "exceeds cooling upper bound"
                )
        else:
            for i, (h, c) in enumerate(spec.table):
                if h + deadband > c:
                    raise InvalidSpace(
                        f"discrete table entry {i} violates the {deadband} K deadband"
                    )

    def _build_observation_spec(self) -> SpaceSpec:
        catalog = list(_WEATHER_SENSORS)
        catalog += ["htg_setpoint", "clg_setpoint"]
        catalog += [f"air_temperature_{name}" for name in self.model.zone_names]
        catalog += ["HVAC_electricity_demand_rate"]
        if self.config.variables is None:
            selected = catalog
            self._sensor_select = None
        else:
            unknown = [v for v in self.config.variables if v not in catalog]
            if unknown:
                raise InvalidSpace(f"unknown variables: {unknown}")
            selected = [name for name in catalog if name in self.config.variables]
            self._sensor_select = [catalog.index(name) for name in selected]
        dims = [BoxDim(name, -SENSOR_BOUND, SENSOR_BOUND) for name in selected]
        time_bounds = {"month": (1, 12), "day": (1, 31), "hour": (0, 23)}
        self._time_vars = tuple(t for t in _TIME_ORDER if t in self.config.time_variables)
        for tv in self._time_vars:
            lo, hi = time_bounds[tv]
            dims.append(BoxDim(tv, lo, hi))
        return SpaceSpec("box", tuple(dims))

    def describe_spaces(self) -> tuple[SpaceSpec, SpaceSpec | None]:
        """Immutable copies of the observation and action specs."""
        return self.observation_spec, self.action_spec

    # -- episode control -------------------------------------------------

    @property
    def episode_dir(self) -> Path | None:
        return self._episode_dirs[-1] if self._episode_dirs else None

    def reset(self, seed: int | None = None) -> tuple[np.ndarray, dict]:
        if self._closed:
            raise NotReset("environment is closed")
        if seed is not None:
            self._base_seed = int(seed)
            self._seed_episode = 1
        else:
            self._seed_episode += 1
        ep_seed = mix_seed(self._base_seed, self._seed_episode)

        rng = rng_from(ep_seed)
        widx = int(rng.integers(len(self._series_pool)))
        series = self._series_pool[widx]
        if self.config.weather_variability is not None:
            series = apply_ou_noise(
                series, self.config.weather_variability, seed=mix_seed(ep_seed, 1)
            )
        self._series = series
        self._weather_index = widx
        # Plain-list column caches: scalar indexing is much cheaper than
        # numpy element access in the substep loop.
        self._col_db = series.drybulb.tolist()
        self._col_dn = series.direct_normal_rad.tolist()
        self._col_dh = series.diffuse_horiz_rad.tolist()
        self._col_rh = series.rel_humidity.tolist()
        self._col_ws = series.wind_speed.tolist()
        self._col_wd = series.wind_dir.tolist()

        self._storage_episode += 1
        ep_dir = self.workdir / f"episode-{self._storage_episode}"
        ep_dir.mkdir(parents=True, exist_ok=True)
        self._episode_dirs.append(ep_dir)
        while len(self._episode_dirs) > self.config.max_ep_data_store_num:
            stale = self._episode_dirs.pop(0)
            shutil.rmtree(stale, ignore_errors=True)

        self.model.reset_temps()
        self._heat_sp, self._cool_sp = DEFAULT_SCHEDULE
        start_sec = self._start_hour * 3600
        # Warm-up: at least 24 simulated hours ending at the run start,
        # wrapping across the year boundary; unlogged and unrewarded.
        warm_steps = max(math.ceil(86400.0 / self._dt), self._n_sub)
        t = start_sec - warm_steps * self._dt
        power_sum = 0.0
        for j in range(warm_steps):
            db, dn, dh = self._drivers((t + j * self._dt) % SECONDS_PER_YEAR)
            _, electric = self.model.advance(db, dn, dh, self._heat_sp, self._cool_sp, self._dt)
            if j >= warm_steps - self._n_sub:
                power_sum += electric * self._dt
        self._last_power = power_sum / (self._n_sub * self._dt)

        self._step_index = 0
        self._ready = True
        date = self._date_at(start_sec)
        obs = self._observe(start_sec, date)
        violation = rw.comfort_violation(
            self.model.zone_temps,
            rw.active_comfort_range(self._range_spec, date),
        )
        return obs, self._base_info(date, violation)

    def step(self, action=None) -> StepResult:
        if not self._ready or self._closed:
            raise NotReset("call reset() before step()")
        if self._step_index >= self.episode_steps:
            raise NotReset("episode finished; call reset()")

        self._apply_action(action)
        t0 = self._start_hour * 3600 + self._step_index * self.interval_s
        power_sum = 0.0
        advance = self.model.advance
        drivers = self._drivers
        dt = self._dt
        heat_sp, cool_sp = self._heat_sp, self._cool_sp
        for j in range(self._n_sub):
            db, dn, dh = drivers((t0 + j * dt) % SECONDS_PER_YEAR)
            _, electric = advance(db, dn, dh, heat_sp, cool_sp, dt)
            power_sum += electric * dt
        power = power_sum / self.interval_s
        self._last_power = power
        self._step_index += 1
        t_end = t0 + self.interval_s
        date = self._date_at(t_end)

        spec = self.config.reward
        if self._plain_linear_reward:
            # inlined rewards.linear_reward (identical arithmetic)
            low, high = rw.active_comfort_range(spec, date)
            violation = 0.0
            for t_zone in self.model.zone_temps:
                if t_zone < low:
                    violation += low - t_zone
                elif t_zone > high:
                    violation += t_zone - high
            energy_term = -(spec.energy_weight * spec.lambda_energy * power)
            comfort_term = -((1.0 - spec.energy_weight) * spec.lambda_temperature * violation)
            total = energy_term + comfort_term
        else:
            out = rw.evaluate(
                rw.RewardInput(
                    zone_temps=self.model.zone_temps,
                    electric_power=power,
                    sim_date=date,
                ),
                spec,
            )
            total = out.total
            energy_term = out.energy_term
            comfort_term = out.comfort_term
            violation = out.violation_degrees

        obs = self._observe(t_end, date)
        truncated = self._step_index == self.episode_steps
        info = self._base_info(date, violation)
        info["energy_term"] = energy_term
        info["comfort_term"] = comfort_term
        return StepResult(obs, total, False, truncated, info)

    def close(self) -> None:
        """Retire the environment; logging wrappers flush before delegating
        here. Idempotent; stepping a closed environment raises NotReset."""
        self._closed = True
        self._ready = False

    # -- internals ---------------------------------------------------------

    def _apply_action(self, action) -> None:
        spec = self.action_spec
        if spec is None:
            self._heat_sp, self._cool_sp = DEFAULT_SCHEDULE
            return
        if spec.kind == "discrete":
            if isinstance(action, (np.ndarray, list, tuple)):
                arr = np.asarray(action).reshape(-1)
                if arr.shape[0] != 1:
                    raise DiscreteIndexOutOfRange(f"expected one index, got {action!r}")
                action = arr[0]
            idx = int(action)
            if idx != action or not 0 <= idx < spec.count:
                raise DiscreteIndexOutOfRange(
                    f"index {action!r} outside [0, {spec.count})"
                )
            heat, cool = spec.table[idx]
        else:
            try:
                heat = float(action[0])
                cool = float(action[1])
            except (TypeError, IndexError, ValueError):
                raise InvalidSpace(f"expected a (heating, cooling) pair, got {action!r}") from None
            h_lo, h_hi, c_lo, c_hi = self._act_bounds
            heat = h_lo if heat < h_lo else (h_hi if heat > h_hi else heat)
            cool = c_lo if cool < c_lo else (c_hi if cool > c_hi else cool)
            deadband = self.model.hvac.deadband
            if heat + deadband > cool:
                # Push cooling up within bounds, then heating down if needed.
                cool = min(heat + deadband, c_hi)
                heat = min(heat, cool - deadband)
        self._heat_sp, self._cool_sp = heat, cool

    def _date_at(self, t_end: int) -> tuple[int, int, int]:
        hidx = min(t_end // 3600, self._end_hour - 1)
        return int(CAL_MONTH[hidx]), int(CAL_DAY[hidx]), int(CAL_HOUR[hidx])

    def _drivers(self, t: float) -> tuple[float, float, float]:
        """Drybulb and solar columns interpolated at t (cached lists)."""
        pos = t / 3600.0
        h = int(pos)
        frac = pos - h
        h %= HOURS_PER_YEAR
        h2 = h + 1
        if h2 == HOURS_PER_YEAR:
            h2 = 0
        db = self._col_db[h]
        dn = self._col_dn[h]
        dh = self._col_dh[h]
        return (
            db + frac * (self._col_db[h2] - db),
            dn + frac * (self._col_dn[h2] - dn),
            dh + frac * (self._col_dh[h2] - dh),
        )

    def _sensors_at(self, t: float) -> tuple[float, float, float, float, float, float]:
        pos = t / 3600.0
        h = int(pos)
        frac = pos - h
        h %= HOURS_PER_YEAR
        h2 = h + 1
        if h2 == HOURS_PER_YEAR:
            h2 = 0
        db = self._col_db[h]
        rh = self._col_rh[h]
        ws = self._col_ws[h]
        dn = self._col_dn[h]
        dh = self._col_dh[h]
        wd_a = self._col_wd[h]
        delta = (self._col_wd[h2] - wd_a + 180.0) % 360.0 - 180.0
        return (
            db + frac * (self._col_db[h2] - db),
            rh + frac * (self._col_rh[h2] - rh),
            ws + frac * (self._col_ws[h2] - ws),
            (wd_a + frac * delta) % 360.0,
            dh + frac * (self._col_dh[h2] - dh),
            dn + frac * (self._col_dn[h2] - dn),
        )

    def _observe(self, t_end: int, date: tuple[int, int, int]) -> np.ndarray:
        sensors = self._sensors_at(t_end % SECONDS_PER_YEAR)
        vals = [
            sensors[0], sensors[1], sensors[2], sensors[3], sensors[4], sensors[5],
            self._heat_sp, self._cool_sp,
            *self.model.zone_temps,
            self._last_power,
        ]
        if self._sensor_select is not None:
            vals = [vals[i] for i in self._sensor_select]
        for tv in self._time_vars:
            if tv == "month":
                vals.append(float(date[0]))
            elif tv == "day":
                vals.append(float(date[1]))
            else:
                vals.append(float(date[2]))
        return np.asarray(vals, dtype=np.float64)

    def _base_info(self, date: tuple[int, int, int], violation: float) -> dict:
        return {
            "timestep": self._step_index,
            "month": date[0],
            "day": date[1],
            "hour": date[2],
            "zone_temperatures": list(self.model.zone_temps),
            "power_W": self._last_power,
            "applied_action": (self._heat_sp, self._cool_sp),
            "weather_index": self._weather_index,
            "energy_term": 0.0,
            "comfort_term": 0.0,
            "violation_C": violation,
        }


def make_env(config: EnvConfig, output_root: Union[str, Path, None] = None) -> Environment:
    """Construct an environment (validates building, weather and spaces)."""
    return Environment(config, output_root=output_root)
