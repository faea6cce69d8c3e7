"""Regenerate the shipped synthetic weather CSVs.

The three climates are desk-scale analogues with annual means and humidity
matching published typical-year statistics for a hot-arid, a mixed
continental, and a cool marine site. Amplitudes, phases and the jitter are
artifact choices. Seeds are fixed so the files are reproducible.

Run from the repository root:  python scripts/build_weather_data.py
"""

from pathlib import Path

from vtb.weather import ClimateSpec, synthesize_climate, write_weather_csv

OUT = Path(__file__).resolve().parents[1] / "src" / "vtb" / "data" / "weather"

CLIMATES = {
    "hot_arid.csv": (
        ClimateSpec(
            annual_mean=21.7,
            annual_amplitude=9.0,
            diurnal_amplitude=8.0,
            humidity_mean=34.9,
            phase_day=200,
        ),
        101,
    ),
    "mixed_continental.csv": (
        ClimateSpec(
            annual_mean=12.6,
            annual_amplitude=11.0,
            diurnal_amplitude=4.0,
            humidity_mean=68.5,
            phase_day=200,
        ),
        102,
    ),
    "cool_marine.csv": (
        ClimateSpec(
            annual_mean=9.3,
            annual_amplitude=6.0,
            diurnal_amplitude=3.0,
            humidity_mean=81.1,
            phase_day=200,
        ),
        103,
    ),
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for filename, (spec, seed) in CLIMATES.items():
        series = synthesize_climate(spec, seed=seed)
        write_weather_csv(series, OUT / filename)
        print(
            f"{filename}: mean {series.mean_annual_temp:.3f} C, "
            f"humidity {series.mean_annual_humidity:.2f} %"
        )


if __name__ == "__main__":
    main()
