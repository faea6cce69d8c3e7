"""Reduced-order building model: free float, thermostat hold, steady states.

Loads the shipped two-zone machine hall and walks it through a cold day,
first free-floating, then held by the ideal-load plant at the default
schedule.
"""

from vtb.presets import building_path
from vtb.thermal import HvacCommand, load_building, steady_state_temp, thermal_step
from vtb.weather import WeatherRecord

model = load_building(building_path("datacenter"))
print("zones:", ", ".join(model.zone_names))
print(f"stability bound: {model.stability_bound():.0f} s per substep")

outdoor = 0.0
rec = WeatherRecord(1, 15, 0, outdoor, 50.0, 3.0, 180.0, 0.0, 0.0)
targets = steady_state_temp(model, outdoor=outdoor)
print(f"\nfree-float steady state at {outdoor:.0f} C outdoor: "
      + ", ".join(f"{t:.1f} C" for t in targets))

print("\nfree floating from 21 C (plant parked):")
off = HvacCommand(-50.0, 90.0)
for hour in range(0, 25, 6):
    for _ in range(6 * 60 if hour else 0):
        thermal_step(model, rec, off, 60.0)
    temps = ", ".join(f"{t:.2f}" for t in model.zone_temps)
    print(f"  t = {hour:2d} h  zone temps [{temps}] C")

model.reset_temps()
print("\nheld at the default schedule (20 / 23):")
hold = HvacCommand(20.0, 23.0)
total_electric = 0.0
steps = 24 * 60
for _ in range(steps):
    out = thermal_step(model, rec, hold, 60.0)
    total_electric += out.electric_power * 60.0
temps = ", ".join(f"{t:.2f}" for t in model.zone_temps)
print(f"  after 24 h:    zone temps [{temps}] C")
print(f"  mean electric demand {total_electric / (steps * 60.0) / 1000.0:.2f} kW")
