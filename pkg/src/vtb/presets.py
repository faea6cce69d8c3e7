"""Named environment presets: building x climate x action kind x noise.

Preset names follow ``vtb-<building>-<climate>-<actions>[-stochastic]-v1``,
e.g. ``vtb-datacenter-mixed-continuous-stochastic-v1``. Stochastic variants
resample the drybulb perturbation each episode with per-episode derived
seeds; deterministic variants replay the shipped series verbatim.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Union

from .envcore import EnvConfig, Environment, make_env, setpoint_box, setpoint_discrete
from .rewards import LinearRewardSpec
from .weather import OUParams

BUILDINGS = {
    "datacenter": "datacenter2zone.json",
    "5zone": "fivezone.json",
}

CLIMATES = {
    "hot": "hot_arid.csv",
    "mixed": "mixed_continental.csv",
    "cool": "cool_marine.csv",
}

ACTION_KINDS = ("continuous", "discrete")

# Drybulb perturbation used by every stochastic preset: ~2.3 degC
# stationary spread with strong hour-to-hour persistence.
STOCHASTIC_VARIABILITY = OUParams(sigma=1.0, mu=0.1, tau=0.0)

# Comfort ranges: wide year-round band for the machine hall, narrower
# seasonal bands for the occupied office analogue.
_REWARDS = {
    "datacenter": LinearRewardSpec(),
    "5zone": LinearRewardSpec(
        range_comfort_winter=(20.0, 23.5),
        range_comfort_summer=(23.0, 26.0),
    ),
}


def data_path(kind: str, filename: str) -> Path:
    """Absolute path of a shipped data file (buildings/ or weather/)."""
    return Path(str(resources.files("vtb.data") / kind / filename))


def building_path(key: str) -> Path:
    return data_path("buildings", BUILDINGS[key])


def weather_path(key: str) -> Path:
    return data_path("weather", CLIMATES[key])


def _name(building: str, climate: str, actions: str, stochastic: bool) -> str:
    suffix = "-stochastic" if stochastic else ""
    return f"vtb-{building}-{climate}-{actions}{suffix}-v1"


def list_presets() -> list[str]:
    names = []
    for building in BUILDINGS:
        for climate in CLIMATES:
            for actions in ACTION_KINDS:
                for stochastic in (False, True):
                    names.append(_name(building, climate, actions, stochastic))
    return names


def parse_name(name: str) -> tuple[str, str, str, bool]:
    """Split a preset name into (building, climate, actions, stochastic)."""
    parts = name.split("-")
    stochastic = "stochastic" in parts
    if stochastic:
        parts.remove("stochastic")
    if (
        len(parts) != 5
        or parts[0] != "vtb"
        or parts[4] != "v1"
        or parts[1] not in BUILDINGS
        or parts[2] not in CLIMATES
        or parts[3] not in ACTION_KINDS
    ):
        raise KeyError(f"unknown preset: {name}")
    return parts[1], parts[2], parts[3], stochastic


def preset_config(name: str) -> EnvConfig:
    """A fresh EnvConfig for a preset; callers may modify it before make."""
    building, climate, actions, stochastic = parse_name(name)
    action_space = setpoint_box() if actions == "continuous" else setpoint_discrete()
    return EnvConfig(
        building_file=building_path(building),
        weather_files=(weather_path(climate),),
        action_space=action_space,
        weather_variability=STOCHASTIC_VARIABILITY if stochastic else None,
        reward=_REWARDS[building],
        env_name=name,
    )


def make(name: str, output_root: Union[str, Path, None] = None) -> Environment:
    """Instantiate a preset environment by name."""
    return make_env(preset_config(name), output_root=output_root)
