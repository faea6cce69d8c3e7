"""Reward families combining energy use and thermal discomfort.

Every family decomposes into a nonpositive energy term and a nonpositive
comfort term; the total is their sum. The comfort penalty is driven by the
violation magnitude: degrees outside the active comfort range, summed over
zones, and exactly zero anywhere inside the range (boundaries inclusive).
The active range switches between a winter and a summer range based on the
simulation date.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Sequence, Union


class MissingOccupancy(Exception):
    """Schedule-weighted reward evaluated without an occupancy signal."""


@dataclass(frozen=True)
class RewardInput:
    """State snapshot a reward is computed from."""

    zone_temps: Sequence[float]
    electric_power: float               # W, >= 0
    sim_date: tuple[int, int, int]      # (month, day, hour)
    occupancy: float | None = None      # persons; required by schedule rewards

    def __post_init__(self):
        if self.electric_power < 0:
            raise ValueError("electric_power must be >= 0")


@dataclass(frozen=True)
class RewardOutput:
    total: float
    energy_term: float
    comfort_term: float
    violation_degrees: float
    power: float


@dataclass(frozen=True)
class LinearRewardSpec:
    """Weighted linear combination of power and comfort violation."""

    energy_weight: float = 0.5
    lambda_energy: float = 0.00005     # 1/W
    lambda_temperature: float = 1.0    # 1/degC
    range_comfort_winter: tuple[float, float] = (18.0, 27.0)
    range_comfort_summer: tuple[float, float] = (18.0, 27.0)
    summer_start: tuple[int, int] = (6, 1)
    summer_final: tuple[int, int] = (9, 30)

    def __post_init__(self):
        if not 0.0 <= self.energy_weight <= 1.0:
            raise ValueError("energy_weight must be in [0, 1]")
        for rng in (self.range_comfort_winter, self.range_comfort_summer):
            if not rng[0] < rng[1]:
                raise ValueError(f"comfort range must satisfy low < high, got {rng}")


@dataclass(frozen=True)
class ExponentialRewardSpec(LinearRewardSpec):
    """Linear energy term with an exponential discomfort penalty."""

    exponent_scale: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.exponent_scale <= 0:
            raise ValueError("exponent_scale must be > 0")


@dataclass(frozen=True)
class ScheduleRewardSpec(LinearRewardSpec):
    """Linear reward with occupancy-dependent comfort weighting."""

    occupied_weight: float = 1.0
    unoccupied_weight: float = 0.1

    def __post_init__(self):
        super().__post_init__()
        if self.occupied_weight < 0 or self.unoccupied_weight < 0:
            raise ValueError("schedule weights must be >= 0")


RewardSpec = Union[LinearRewardSpec, ExponentialRewardSpec, ScheduleRewardSpec]
RewardFn = Callable[[RewardInput], RewardOutput]


def comfort_violation(
    zone_temps: Sequence[float], comfort_range: tuple[float, float]
) -> float:
    """Degrees outside the range, summed over zones; 0 inside (inclusive)."""
    low, high = comfort_range
    total = 0.0
    for t in zone_temps:
        if t < low:
            total += low - t
        elif t > high:
            total += t - high
    return total


def active_comfort_range(
    spec: LinearRewardSpec, sim_date: tuple[int, int, int]
) -> tuple[float, float]:
    """Summer range inside the summer window (boundaries inclusive)."""
    key = (sim_date[0], sim_date[1])
    if spec.summer_start <= key <= spec.summer_final:
        return spec.range_comfort_summer
    return spec.range_comfort_winter


def _energy_term(inp: RewardInput, spec: LinearRewardSpec) -> float:
    return -(spec.energy_weight * spec.lambda_energy * inp.electric_power)


def linear_reward(inp: RewardInput, spec: LinearRewardSpec | None = None) -> RewardOutput:
    spec = spec if spec is not None else LinearRewardSpec()
    violation = comfort_violation(inp.zone_temps, active_comfort_range(spec, inp.sim_date))
    energy = _energy_term(inp, spec)
    comfort = -((1.0 - spec.energy_weight) * spec.lambda_temperature * violation)
    return RewardOutput(energy + comfort, energy, comfort, violation, inp.electric_power)


def exponential_reward(inp: RewardInput, spec: ExponentialRewardSpec) -> RewardOutput:
    violation = comfort_violation(inp.zone_temps, active_comfort_range(spec, inp.sim_date))
    energy = _energy_term(inp, spec)
    comfort = -(
        (1.0 - spec.energy_weight)
        * spec.lambda_temperature
        * (math.exp(spec.exponent_scale * violation) - 1.0)
    )
    return RewardOutput(energy + comfort, energy, comfort, violation, inp.electric_power)


def schedule_reward(inp: RewardInput, spec: ScheduleRewardSpec) -> RewardOutput:
    """Linear reward with the comfort term scaled by the occupancy weight.

    The occupancy weights deliberately break the usual "comfort term is
    zero iff no violation" link: a zero unoccupied weight silences the
    penalty while ``violation_degrees`` still reports the raw violation.
    """
    if inp.occupancy is None:
        raise MissingOccupancy("schedule reward requires RewardInput.occupancy")
    base = linear_reward(inp, spec)
    weight = spec.occupied_weight if inp.occupancy > 0 else spec.unoccupied_weight
    comfort = base.comfort_term * weight
    return RewardOutput(
        base.energy_term + comfort, base.energy_term, comfort,
        base.violation_degrees, base.power,
    )


def evaluate(inp: RewardInput, reward: RewardSpec | RewardFn) -> RewardOutput:
    """Apply a reward spec or a custom evaluator callable."""
    if isinstance(reward, ExponentialRewardSpec):
        return exponential_reward(inp, reward)
    if isinstance(reward, ScheduleRewardSpec):
        return schedule_reward(inp, reward)
    if isinstance(reward, LinearRewardSpec):
        return linear_reward(inp, reward)
    if callable(reward):
        return reward(inp)
    raise TypeError(f"unsupported reward: {reward!r}")


_KIND_TO_SPEC = {
    "linear": LinearRewardSpec,
    "exponential": ExponentialRewardSpec,
    "schedule": ScheduleRewardSpec,
}


def spec_to_dict(spec: RewardSpec) -> dict:
    """Serialize a reward spec for environment configuration documents."""
    for kind, cls in _KIND_TO_SPEC.items():
        if type(spec) is cls:
            out = {"kind": kind}
            for f in fields(spec):
                value = getattr(spec, f.name)
                out[f.name] = list(value) if isinstance(value, tuple) else value
            return out
    raise TypeError(f"unsupported reward spec: {spec!r}")


def spec_from_dict(doc: dict) -> RewardSpec:
    doc = dict(doc)
    kind = doc.pop("kind", "linear")
    try:
        cls = _KIND_TO_SPEC[kind]
    except KeyError:
        raise ValueError(f"unknown reward kind: {kind}") from None
    kwargs = {}
    for f in fields(cls):
        if f.name in doc:
            value = doc[f.name]
            kwargs[f.name] = tuple(value) if isinstance(value, list) else value
    return cls(**kwargs)
