"""Reduced-order RC thermal building backend.

Each zone is a single thermal capacitance coupled to outdoor air through an
envelope resistance, to other zones through coupling resistances, and driven
by constant internal gains plus solar gains. An ideal-load plant holds each
zone between the commanded heating and cooling setpoints: whenever a zone
drifts outside the band the plant injects exactly the power needed to land
on the setpoint at the end of the substep, clamped to the equipment limits.

Integration is explicit Euler with synchronous zone updates. The admissible
substep is bounded by a quarter of the smallest zone time constant; see
:meth:`BuildingModel.stability_bound`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .weather import WeatherRecord


class ThermalError(Exception):
    """Base class for building-model failures."""


class SchemaError(ThermalError):
    def __init__(self, field_name: str, reason: str = ""):
        self.field_name = field_name
        msg = f"invalid building descriptor field '{field_name}'"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class UnknownZoneInCoupling(ThermalError):
    pass


class UnstableTimestep(ThermalError):
    def __init__(self, dt: float, bound: float):
        self.dt = dt
        self.bound = bound
        super().__init__(f"dt {dt} s exceeds stability bound {bound} s")


class SingularSystem(ThermalError):
    pass


@dataclass(frozen=True)
class ZoneConfig:
    name: str
    capacitance: float            # J/K
    envelope_resistance: float    # K/W
    internal_gain: float = 0.0    # W, constant
    solar_aperture: float = 0.0   # effective m2 applied to direct + diffuse

    def __post_init__(self):
        if self.capacitance <= 0:
            raise ValueError(f"zone {self.name}: capacitance must be > 0")
        if self.envelope_resistance <= 0:
            raise ValueError(f"zone {self.name}: envelope_resistance must be > 0")
        if self.internal_gain < 0:
            raise ValueError(f"zone {self.name}: internal_gain must be >= 0")
        if self.solar_aperture < 0:
            raise ValueError(f"zone {self.name}: solar_aperture must be >= 0")


@dataclass(frozen=True)
class CouplingConfig:
    zone_a: str
    zone_b: str
    resistance: float  # K/W

    def __post_init__(self):
        if self.resistance <= 0:
            raise ValueError("coupling resistance must be > 0")
        if self.zone_a == self.zone_b:
            raise ValueError("coupling endpoints must be distinct zones")


@dataclass(frozen=True)
class HvacConfig:
    cop_heat: float
    cop_cool: float
    max_heat: float   # W thermal per zone
    max_cool: float   # W thermal per zone
    fan_power: float  # W electric, constant
    deadband: float   # K, minimum heating-to-cooling setpoint separation

    def __post_init__(self):
        if self.cop_heat <= 0 or self.cop_cool <= 0:
            raise ValueError("COPs must be > 0")
        if self.max_heat < 0 or self.max_cool < 0:
            raise ValueError("plant capacities must be >= 0")
        if self.fan_power < 0:
            raise ValueError("fan_power must be >= 0")
        if self.deadband < 0:
            raise ValueError("deadband must be >= 0")


@dataclass(frozen=True)
class HvacCommand:
    """Setpoint pair applied to all zones simultaneously."""

    heating_setpoint: float
    cooling_setpoint: float


@dataclass(frozen=True)
class HvacResult:
    thermal_power: tuple[float, ...]  # W per zone, signed, + heating
    electric_power: float             # W total facility HVAC demand


class BuildingModel:
    """Zones, couplings and plant, plus the mutable zone temperatures.

    A model instance is owned by exactly one simulation loop; it carries no
    internal synchronization.
    """

    def __init__(
        self,
        zones: list[ZoneConfig],
        couplings: list[CouplingConfig],
        hvac: HvacConfig,
        initial_temp: float = 21.0,
    ):
        if not zones:
            raise ValueError("at least one zone required")
        names = [z.name for z in zones]
        if len(set(names)) != len(names):
            raise ValueError("zone names must be unique")
        index = {name: i for i, name in enumerate(names)}
        for c in couplings:
            if c.zone_a not in index or c.zone_b not in index:
                raise UnknownZoneInCoupling(
                    f"coupling references unknown zone: {c.zone_a}-{c.zone_b}"
                )
        self.zones = list(zones)
        self.couplings = list(couplings)
        self.hvac = hvac
        self.initial_temp = float(initial_temp)
        self.zone_temps: list[float] = [self.initial_temp] * len(zones)

        # Precomputed runtime coefficients for the hot loop.
        self._c_inv = [1.0 / z.capacitance for z in zones]
        self._g_env = [1.0 / z.envelope_resistance for z in zones]
        self._gain = [z.internal_gain for z in zones]
        self._aperture = [z.solar_aperture for z in zones]
        self._neighbors: list[list[tuple[int, float]]] = [[] for _ in zones]
        for c in couplings:
            a, b = index[c.zone_a], index[c.zone_b]
            g = 1.0 / c.resistance
            self._neighbors[a].append((b, g))
            self._neighbors[b].append((a, g))
        self._zone_index = index

    @property
    def zone_names(self) -> list[str]:
        return [z.name for z in self.zones]

    def reset_temps(self) -> None:
        self.zone_temps = [self.initial_temp] * len(self.zones)

    def stability_bound(self) -> float:
        """Largest admissible Euler substep, in seconds.

        min over zones of C_i * R_parallel,i / 4, with R_parallel the
        parallel combination of the envelope and coupling resistances.
        """
        bound = float("inf")
        for i, z in enumerate(self.zones):
            g_total = self._g_env[i] + sum(g for _, g in self._neighbors[i])
            bound = min(bound, z.capacitance / g_total / 4.0)
        return bound

    def advance(
        self,
        t_out: float,
        direct_rad: float,
        diffuse_rad: float,
        heating_setpoint: float,
        cooling_setpoint: float,
        dt: float,
    ) -> tuple[list[float], float]:
        """One Euler substep. Mutates zone_temps; returns (thermal W per zone,
        electric W). Assumes dt was validated against the stability bound."""
        temps = self.zone_temps
        c_inv = self._c_inv
        g_env = self._g_env
        gain = self._gain
        aperture = self._aperture
        neighbors = self._neighbors
        hvac = self.hvac
        solar = direct_rad + diffuse_rad

        new_temps = [0.0] * len(temps)
        thermal = [0.0] * len(temps)
        electric = hvac.fan_power
        for i in range(len(temps)):
            t_i = temps[i]
            flux = (t_out - t_i) * g_env[i] + gain[i] + aperture[i] * solar
            for j, g in neighbors[i]:
                flux += (temps[j] - t_i) * g
            rate = dt * c_inv[i]
            if t_i < heating_setpoint:
                q = (heating_setpoint - t_i) / rate - flux
                if q < 0.0:
                    q = 0.0
                elif q > hvac.max_heat:
                    q = hvac.max_heat
                electric += q / hvac.cop_heat
            elif t_i > cooling_setpoint:
                q = (cooling_setpoint - t_i) / rate - flux
                if q > 0.0:
                    q = 0.0
                elif q < -hvac.max_cool:
                    q = -hvac.max_cool
                electric += -q / hvac.cop_cool
            else:
                q = 0.0
            thermal[i] = q
            new_temps[i] = t_i + rate * (flux + q)
        self.zone_temps = new_temps
        return thermal, electric


def thermal_step(
    model: BuildingModel,
    weather: WeatherRecord,
    cmd: HvacCommand,
    dt: float,
) -> HvacResult:
    """Advance the model one substep under the given weather and setpoints.

    Raises :class:`UnstableTimestep` when dt exceeds the stability bound and
    ``ValueError`` when the command violates the configured deadband.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    bound = model.stability_bound()
    if dt > bound:
        raise UnstableTimestep(dt, bound)
    if cmd.heating_setpoint + model.hvac.deadband > cmd.cooling_setpoint:
        raise ValueError(
            f"heating setpoint {cmd.heating_setpoint} + deadband "
            f"{model.hvac.deadband} exceeds cooling setpoint {cmd.cooling_setpoint}"
        )
    thermal, electric = model.advance(
        weather.drybulb,
        weather.direct_normal_rad,
        weather.diffuse_horiz_rad,
        cmd.heating_setpoint,
        cmd.cooling_setpoint,
        dt,
    )
    return HvacResult(thermal_power=tuple(thermal), electric_power=electric)


def steady_state_temp(
    model: BuildingModel,
    outdoor: float,
    direct_rad: float = 0.0,
    diffuse_rad: float = 0.0,
    hvac_off: bool = True,
) -> np.ndarray:
    """Free-floating steady-state zone temperatures (direct linear solve).

    Solves 0 = (T_out - T_i)/R_env,i + Q_i + sum_j (T_j - T_i)/R_ij with
    Q_i the internal gain plus solar aperture times irradiance. The plant is
    always off in this balance; ``hvac_off`` documents that assumption at
    call sites and must be True.
    """
    if not hvac_off:
        raise ValueError("steady state with an active plant is not linear; "
                         "only hvac_off=True is supported")
    n = len(model.zones)
    a = np.zeros((n, n))
    b = np.zeros(n)
    solar = direct_rad + diffuse_rad
    for i in range(n):
        a[i, i] = model._g_env[i]
        b[i] = outdoor * model._g_env[i] + model._gain[i] + model._aperture[i] * solar
        for j, g in model._neighbors[i]:
            a[i, i] += g
            a[i, j] -= g
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None


_ZONE_KEYS = {
    "name": str,
    "capacitance_J_per_K": (int, float),
    "envelope_resistance_K_per_W": (int, float),
    "internal_gain_W": (int, float),
    "solar_aperture": (int, float),
}
_COUPLING_KEYS = {
    "zone_a": str,
    "zone_b": str,
    "resistance_K_per_W": (int, float),
}
_HVAC_KEYS = {
    "cop_heat": (int, float),
    "cop_cool": (int, float),
    "max_heat_W": (int, float),
    "max_cool_W": (int, float),
    "fan_W": (int, float),
    "deadband_K": (int, float),
}


def _require(obj: dict, keys: dict, context: str) -> dict:
    out = {}
    for key, types in keys.items():
        if key not in obj:
            raise SchemaError(f"{context}.{key}", "missing")
        value = obj[key]
        if not isinstance(value, types) or isinstance(value, bool):
            raise SchemaError(f"{context}.{key}", f"expected {types}, got {type(value).__name__}")
        out[key] = value
    return out


def load_building(source: str | Path | dict) -> BuildingModel:
    """Build a model from a JSON building descriptor (path or parsed dict).

    Descriptor keys not listed in the schema (for example ``description``)
    are ignored so the shipped files can document their parameter choices
    inline.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.is_file():
            raise SchemaError("building_file", f"no such file: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError("building_file", f"invalid JSON: {exc}") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise SchemaError("document", "top level must be an object")
    if "zones" not in doc or not isinstance(doc["zones"], list) or not doc["zones"]:
        raise SchemaError("zones", "must be a non-empty list")

    zones = []
    for i, z in enumerate(doc["zones"]):
        vals = _require(z, _ZONE_KEYS, f"zones[{i}]")
        try:
            zones.append(
                ZoneConfig(
                    name=vals["name"],
                    capacitance=float(vals["capacitance_J_per_K"]),
                    envelope_resistance=float(vals["envelope_resistance_K_per_W"]),
                    internal_gain=float(vals["internal_gain_W"]),
                    solar_aperture=float(vals["solar_aperture"]),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"zones[{i}]", str(exc)) from None

    couplings = []
    for i, c in enumerate(doc.get("couplings", [])):
        vals = _require(c, _COUPLING_KEYS, f"couplings[{i}]")
        try:
            couplings.append(
                CouplingConfig(
                    zone_a=vals["zone_a"],
                    zone_b=vals["zone_b"],
                    resistance=float(vals["resistance_K_per_W"]),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"couplings[{i}]", str(exc)) from None

    if "hvac" not in doc or not isinstance(doc["hvac"], dict):
        raise SchemaError("hvac", "must be an object")
    hv = _require(doc["hvac"], _HVAC_KEYS, "hvac")
    try:
        hvac = HvacConfig(
            cop_heat=float(hv["cop_heat"]),
            cop_cool=float(hv["cop_cool"]),
            max_heat=float(hv["max_heat_W"]),
            max_cool=float(hv["max_cool_W"]),
            fan_power=float(hv["fan_W"]),
            deadband=float(hv["deadband_K"]),
        )
    except ValueError as exc:
        raise SchemaError("hvac", str(exc)) from None

    initial = doc.get("initial_temp_C", 21.0)
    if not isinstance(initial, (int, float)) or isinstance(initial, bool):
        raise SchemaError("initial_temp_C", "must be a number")

    return BuildingModel(zones, couplings, hvac, initial_temp=float(initial))
