"""Virtual testbed for building-energy control experiments."""

from .envcore import (
    EnvConfig,
    Environment,
    SpaceSpec,
    StepResult,
    make_env,
    setpoint_box,
    setpoint_discrete,
)
from .presets import list_presets, make, preset_config
from .rewards import (
    ExponentialRewardSpec,
    LinearRewardSpec,
    RewardInput,
    RewardOutput,
    ScheduleRewardSpec,
)
from .thermal import BuildingModel, HvacCommand, load_building, steady_state_temp, thermal_step
from .weather import (
    ClimateSpec,
    OUParams,
    WeatherRecord,
    WeatherSeries,
    apply_ou_noise,
    import_epw,
    parse_weather_csv,
    sample_at,
    synthesize_climate,
)

__version__ = "0.1.0"
