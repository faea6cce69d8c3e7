import numpy as np
import pytest

from vtb.presets import building_path
from vtb.thermal import (
    HvacCommand,
    SchemaError,
    UnknownZoneInCoupling,
    UnstableTimestep,
    load_building,
    steady_state_temp,
    thermal_step,
)
from vtb.weather import WeatherRecord

from conftest import single_zone_model, two_zone_model


def rec(drybulb=12.0, direct=0.0, diffuse=0.0):
    return WeatherRecord(1, 1, 0, drybulb, 50.0, 3.0, 180.0, direct, diffuse)


class TestLoadBuilding:
    def test_shipped_datacenter(self):
        model = load_building(building_path("datacenter"))
        assert len(model.zones) == 2
        assert all(z.internal_gain > 0 for z in model.zones)
        assert model.zone_names == ["west_zone", "east_zone"]

    def test_shipped_fivezone(self):
        model = load_building(building_path("5zone"))
        assert len(model.zones) == 5
        perim = [z for z in model.zones if z.name.startswith("perimeter")]
        core = [z for z in model.zones if z.name == "core"]
        assert len(perim) == 4 and len(core) == 1
        assert all(z.solar_aperture > 0 for z in perim)
        assert core[0].solar_aperture == 0.0

    def test_unknown_zone_in_coupling(self, tiny_building_doc):
        doc = dict(tiny_building_doc)
        doc["couplings"] = [
            {"zone_a": "zone", "zone_b": "ghost", "resistance_K_per_W": 0.01}
        ]
        with pytest.raises(UnknownZoneInCoupling):
            load_building(doc)

    def test_single_zone_no_couplings(self, tiny_building_doc):
        model = load_building(tiny_building_doc)
        assert len(model.zones) == 1
        assert model.zone_temps == [21.0]

    def test_missing_field(self, tiny_building_doc):
        doc = dict(tiny_building_doc)
        doc["zones"] = [{"name": "zone"}]
        with pytest.raises(SchemaError):
            load_building(doc)

    def test_bad_value(self, tiny_building_doc):
        doc = dict(tiny_building_doc)
        doc["zones"][0]["capacitance_J_per_K"] = -1.0
        with pytest.raises(SchemaError):
            load_building(doc)
        doc["zones"][0]["capacitance_J_per_K"] = 2e5


class TestThermalStep:
    def test_idle_equilibrium(self):
        model = single_zone_model(initial=21.0)
        out = thermal_step(model, rec(drybulb=21.0), HvacCommand(18.0, 24.0), 60.0)
        assert model.zone_temps[0] == pytest.approx(21.0)
        assert out.electric_power == model.hvac.fan_power
        assert out.thermal_power == (0.0,)

    def test_free_float_converges_monotonically(self):
        model = single_zone_model(initial=21.0)
        cmd = HvacCommand(-50.0, 80.0)  # plant never engages
        temps = [model.zone_temps[0]]
        for _ in range(400):
            thermal_step(model, rec(drybulb=5.0), cmd, 60.0)
            temps.append(model.zone_temps[0])
        diffs = np.diff(np.array(temps))
        assert np.all(diffs <= 0)
        assert abs(temps[-1] - 5.0) < 0.05

    def test_steady_cooling_energy_balance(self):
        # With cooling holding the zone at the setpoint, mean delivered
        # cooling must match internal gain plus envelope influx within 1%.
        # A heavy zone keeps the thermostat chatter small; the delivered
        # power alternates with idle substeps, so the oracle compares the
        # window average.
        gain = 10000.0
        model = single_zone_model(
            capacitance=4e7, resistance=0.002, gain=gain,
            max_cool=60000.0, initial=25.0,
        )
        cmd = HvacCommand(15.0, 22.0)
        t_out = 30.0
        delivered = []
        for i in range(2000):
            out = thermal_step(model, rec(drybulb=t_out), cmd, 60.0)
            if i >= 1600:
                delivered.append(out.thermal_power[0])
        t = model.zone_temps[0]
        # one idle substep drifts 14 kW * 60 s / 4e7 J/K = 0.021 K
        assert t == pytest.approx(22.0, abs=0.03)
        expected = -(gain + (t_out - 22.0) / model.zones[0].envelope_resistance)
        assert np.mean(delivered) == pytest.approx(expected, rel=0.01)

    def test_unstable_timestep_rejected(self):
        model = single_zone_model()  # bound = C*R/4 = 500 s
        with pytest.raises(UnstableTimestep) as exc:
            thermal_step(model, rec(), HvacCommand(18.0, 24.0), 1000.0)
        assert exc.value.bound == pytest.approx(500.0)

    def test_deadband_violation_rejected(self):
        model = single_zone_model(deadband=1.0)
        with pytest.raises(ValueError):
            thermal_step(model, rec(), HvacCommand(22.0, 22.5), 60.0)

    def test_power_clamped_to_maxima(self):
        model = single_zone_model(max_heat=1000.0, initial=0.0)
        out = thermal_step(model, rec(drybulb=0.0), HvacCommand(21.0, 25.0), 60.0)
        assert out.thermal_power[0] == 1000.0
        assert out.electric_power == pytest.approx(
            model.hvac.fan_power + 1000.0 / model.hvac.cop_heat
        )

    def test_fan_only_when_setpoints_satisfied(self):
        model = single_zone_model(initial=21.0)
        cmd = HvacCommand(15.0, 28.0)
        for _ in range(500):
            out = thermal_step(model, rec(drybulb=21.0), cmd, 60.0)
            assert out.electric_power == model.hvac.fan_power

    def test_deterministic(self):
        a = single_zone_model(gain=500.0)
        b = single_zone_model(gain=500.0)
        for _ in range(100):
            ra = thermal_step(a, rec(drybulb=2.0), HvacCommand(20.0, 23.0), 60.0)
            rb = thermal_step(b, rec(drybulb=2.0), HvacCommand(20.0, 23.0), 60.0)
        assert a.zone_temps == b.zone_temps
        assert ra == rb

    def test_convergence_order_in_dt(self):
        # Free-floating 24 h run at constant boundary: halving dt halves the
        # end-state change (explicit Euler is O(dt)). The plant is kept out
        # of the band so the dynamics stay smooth.
        def run(dt):
            model = single_zone_model(capacitance=2e6, gain=800.0, initial=21.0)
            cmd = HvacCommand(-50.0, 90.0)
            steps = int(86400 / dt)
            for _ in range(steps):
                thermal_step(model, rec(drybulb=-3.0), cmd, dt)
            return model.zone_temps[0]

        t1, t2, t4 = run(120.0), run(60.0), run(30.0)
        assert abs(t1 - t2) > 0  # error actually visible at this resolution
        assert abs(t1 - t2) <= 2.0 * abs(t2 - t4) + 1e-6


class TestSteadyState:
    def test_zero_gains_equals_outdoor(self):
        model = two_zone_model(gain_a=0.0, gain_b=0.0)
        temps = steady_state_temp(model, outdoor=7.5)
        assert np.allclose(temps, 7.5)

    def test_single_zone_closed_form(self):
        gain = 1234.0
        model = single_zone_model(gain=gain)
        temps = steady_state_temp(model, outdoor=10.0)
        r = model.zones[0].envelope_resistance
        assert temps[0] == pytest.approx(10.0 + gain * r)

    def test_symmetric_zones_equal(self):
        model = two_zone_model(gain_a=300.0, gain_b=300.0)
        temps = steady_state_temp(model, outdoor=4.0)
        assert temps[0] == pytest.approx(temps[1])

    def test_active_plant_unsupported(self):
        model = single_zone_model()
        with pytest.raises(ValueError):
            steady_state_temp(model, outdoor=10.0, hvac_off=False)

    def test_free_float_distance_decreases(self):
        # Max-norm distance to the steady state shrinks across substeps.
        model = two_zone_model(gain_a=500.0, gain_b=100.0)
        target = steady_state_temp(model, outdoor=2.0)
        cmd = HvacCommand(-50.0, 90.0)
        last = max(abs(np.array(model.zone_temps) - target))
        for _ in range(300):
            thermal_step(model, rec(drybulb=2.0), cmd, 60.0)
            dist = max(abs(np.array(model.zone_temps) - target))
            assert dist <= last + 1e-12
            last = dist

    def test_convergence_to_steady_state_48h(self):
        model = single_zone_model(gain=800.0, initial=35.0)
        target = steady_state_temp(model, outdoor=5.0)
        cmd = HvacCommand(-50.0, 90.0)
        for _ in range(int(48 * 3600 / 60)):
            thermal_step(model, rec(drybulb=5.0), cmd, 60.0)
        assert abs(model.zone_temps[0] - target[0]) < 0.01
