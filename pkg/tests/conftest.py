import numpy as np
import pytest

from vtb.envcore import EnvConfig, setpoint_box
from vtb.presets import building_path, weather_path
from vtb.thermal import BuildingModel, CouplingConfig, HvacConfig, ZoneConfig
from vtb.weather import HOURS_PER_YEAR, WeatherSeries


def short_env_config(**overrides):
    """Two-day datacenter environment, cheap enough for unit tests."""
    base = dict(
        building_file=building_path("datacenter"),
        weather_files=(weather_path("mixed"),),
        action_space=setpoint_box(),
        env_name="test-env",
        run_period=(1, 1, 1, 2),
        substep_s=300.0,
    )
    base.update(overrides)
    return EnvConfig(**base)


def flat_series(drybulb=12.0, rh=50.0, wind=3.0, wdir=180.0, direct=0.0, diffuse=0.0):
    """Constant-weather series for closed-form checks."""
    n = HOURS_PER_YEAR
    return WeatherSeries(
        "flat",
        np.full(n, float(drybulb)),
        np.full(n, float(rh)),
        np.full(n, float(wind)),
        np.full(n, float(wdir)),
        np.full(n, float(direct)),
        np.full(n, float(diffuse)),
    )


def single_zone_model(
    capacitance=2e5,
    resistance=0.01,
    gain=0.0,
    aperture=0.0,
    max_heat=5000.0,
    max_cool=5000.0,
    fan=100.0,
    deadband=0.0,
    cop=3.0,
    initial=21.0,
):
    """Fast single-zone building (time constant ~ 2000 s)."""
    return BuildingModel(
        zones=[
            ZoneConfig(
                name="zone",
                capacitance=capacitance,
                envelope_resistance=resistance,
                internal_gain=gain,
                solar_aperture=aperture,
            )
        ],
        couplings=[],
        hvac=HvacConfig(
            cop_heat=cop,
            cop_cool=cop,
            max_heat=max_heat,
            max_cool=max_cool,
            fan_power=fan,
            deadband=deadband,
        ),
        initial_temp=initial,
    )


def two_zone_model(gain_a=200.0, gain_b=200.0, coupling=0.02):
    return BuildingModel(
        zones=[
            ZoneConfig("a", 2e5, 0.01, internal_gain=gain_a),
            ZoneConfig("b", 2e5, 0.01, internal_gain=gain_b),
        ],
        couplings=[CouplingConfig("a", "b", coupling)],
        hvac=HvacConfig(3.0, 3.0, 5000.0, 5000.0, 100.0, 0.0),
        initial_temp=21.0,
    )


@pytest.fixture
def tiny_building_doc():
    return {
        "zones": [
            {
                "name": "zone",
                "capacitance_J_per_K": 2e5,
                "envelope_resistance_K_per_W": 0.01,
                "internal_gain_W": 0.0,
                "solar_aperture": 0.0,
            }
        ],
        "couplings": [],
        "hvac": {
            "cop_heat": 3.0,
            "cop_cool": 3.0,
            "max_heat_W": 5000.0,
            "max_cool_W": 5000.0,
            "fan_W": 100.0,
            "deadband_K": 0.0,
        },
        "initial_temp_C": 21.0,
    }
