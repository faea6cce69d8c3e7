"""Annual weather series: ingestion, synthesis, and stochastic perturbation.

A :class:`WeatherSeries` holds one non-leap year of hourly records (8760
rows). Series can be read from the package CSV schema or from standard EPW
files, synthesized from a compact climate description, and perturbed with a
mean-reverting noise process applied to the drybulb temperature only.

All operations here are pure functions on immutable inputs; results are new
series sharing unchanged column arrays with their source.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .seeds import rng_from

HOURS_PER_YEAR = 8760
SECONDS_PER_YEAR = HOURS_PER_YEAR * 3600

MONTH_LENGTHS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)

CSV_HEADER = (
    "month,day,hour,drybulb_C,rh_pct,wind_speed_ms,wind_dir_deg,"
    "dir_norm_rad_Wm2,diff_horiz_rad_Wm2"
)


def _build_calendar() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    months = np.empty(HOURS_PER_YEAR, dtype=np.int64)
    days = np.empty(HOURS_PER_YEAR, dtype=np.int64)
    hours = np.empty(HOURS_PER_YEAR, dtype=np.int64)
    doys = np.empty(HOURS_PER_YEAR, dtype=np.int64)
    i = 0
    doy = 1
    for m, n_days in enumerate(MONTH_LENGTHS, start=1):
        for d in range(1, n_days + 1):
            for h in range(24):
                months[i] = m
                days[i] = d
                hours[i] = h
                doys[i] = doy
                i += 1
            doy += 1
    return months, days, hours, doys


CAL_MONTH, CAL_DAY, CAL_HOUR, CAL_DOY = _build_calendar()
for _a in (CAL_MONTH, CAL_DAY, CAL_HOUR, CAL_DOY):
    _a.setflags(write=False)


def hour_of_year(month: int, day: int, hour: int = 0) -> int:
    """Index 0..8759 of a calendar position in the non-leap year."""
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range: {month}")
    if not 1 <= day <= MONTH_LENGTHS[month - 1]:
        raise ValueError(f"day out of range for month {month}: {day}")
    if not 0 <= hour <= 23:
        raise ValueError(f"hour out of range: {hour}")
    return (sum(MONTH_LENGTHS[: month - 1]) + day - 1) * 24 + hour


class WeatherError(Exception):
    """Base class for weather ingestion and sampling failures."""


class MissingFile(WeatherError):
    pass


class MalformedRow(WeatherError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class WrongRowCount(WeatherError):
    def __init__(self, found: int, expected: int = HOURS_PER_YEAR):
        self.found = found
        self.expected = expected
        super().__init__(f"expected {expected} data rows, found {found}")


class NotEpw(WeatherError):
    pass


class OutOfRange(WeatherError):
    pass


@dataclass(frozen=True)
class WeatherRecord:
    """One hourly observation."""

    month: int
    day: int
    hour: int
    drybulb: float           # degC
    rel_humidity: float      # %
    wind_speed: float        # m/s
    wind_dir: float          # degrees
    direct_normal_rad: float  # W/m2
    diffuse_horiz_rad: float  # W/m2


@dataclass(frozen=True)
class OUParams:
    """Parameters of the drybulb perturbation process.

    ``sigma`` scales the Gaussian increments (degC per step), ``mu`` is the
    per-step mean-reversion weight, and ``tau`` is a constant per-step drift
    subtracted from the deviation.
    """

    sigma: float
    mu: float
    tau: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must be in [0, 1]")


@dataclass(frozen=True)
class ClimateSpec:
    """Compact description of a synthetic climate.

    ``phase_day`` is the day-of-year of the warmest day.
    """

    annual_mean: float
    annual_amplitude: float
    diurnal_amplitude: float
    humidity_mean: float
    phase_day: int = 200

    def __post_init__(self):
        if self.annual_amplitude < 0 or self.diurnal_amplitude < 0:
            raise ValueError("amplitudes must be >= 0")
        if not 0.0 <= self.humidity_mean <= 100.0:
            raise ValueError("humidity_mean must be in [0, 100]")


def _freeze_column(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (HOURS_PER_YEAR,):
        raise WrongRowCount(arr.shape[0] if arr.ndim == 1 else -1)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


class WeatherSeries:
    """One year of hourly weather, stored column-wise.

    Column arrays are read-only; derive modified series through
    :func:`apply_ou_noise` or by constructing a new instance.
    """

    def __init__(
        self,
        location_name: str,
        drybulb: np.ndarray,
        rel_humidity: np.ndarray,
        wind_speed: np.ndarray,
        wind_dir: np.ndarray,
        direct_normal_rad: np.ndarray,
        diffuse_horiz_rad: np.ndarray,
    ):
        self.location_name = location_name
        self.drybulb = _freeze_column(drybulb)
        self.rel_humidity = _freeze_column(rel_humidity)
        self.wind_speed = _freeze_column(wind_speed)
        self.wind_dir = _freeze_column(wind_dir)
        self.direct_normal_rad = _freeze_column(direct_normal_rad)
        self.diffuse_horiz_rad = _freeze_column(diffuse_horiz_rad)
        if np.any((self.rel_humidity < 0) | (self.rel_humidity > 100)):
            raise ValueError("rel_humidity outside [0, 100]")
        if np.any(self.wind_speed < 0):
            raise ValueError("wind_speed must be >= 0")
        if np.any(self.direct_normal_rad < 0) or np.any(self.diffuse_horiz_rad < 0):
            raise ValueError("radiation fields must be >= 0")
        self.mean_annual_temp = float(np.mean(self.drybulb))
        self.mean_annual_humidity = float(np.mean(self.rel_humidity))

    def __len__(self) -> int:
        return HOURS_PER_YEAR

    def record(self, i: int) -> WeatherRecord:
        return WeatherRecord(
            month=int(CAL_MONTH[i]),
            day=int(CAL_DAY[i]),
            hour=int(CAL_HOUR[i]),
            drybulb=float(self.drybulb[i]),
            rel_humidity=float(self.rel_humidity[i]),
            wind_speed=float(self.wind_speed[i]),
            wind_dir=float(self.wind_dir[i]),
            direct_normal_rad=float(self.direct_normal_rad[i]),
            diffuse_horiz_rad=float(self.diffuse_horiz_rad[i]),
        )

    @property
    def records(self) -> list[WeatherRecord]:
        return [self.record(i) for i in range(HOURS_PER_YEAR)]

    def with_drybulb(self, drybulb: np.ndarray) -> "WeatherSeries":
        """New series sharing every column except drybulb."""
        out = object.__new__(WeatherSeries)
        out.location_name = self.location_name
        out.drybulb = _freeze_column(drybulb)
        out.rel_humidity = self.rel_humidity
        out.wind_speed = self.wind_speed
        out.wind_dir = self.wind_dir
        out.direct_normal_rad = self.direct_normal_rad
        out.diffuse_horiz_rad = self.diffuse_horiz_rad
        out.mean_annual_temp = float(np.mean(out.drybulb))
        out.mean_annual_humidity = self.mean_annual_humidity
        return out

    def drivers_at(self, sim_time: float) -> tuple[float, float, float]:
        """Fast path used by the simulation loop.

        Returns (drybulb, direct_normal_rad, diffuse_horiz_rad) linearly
        interpolated at ``sim_time`` seconds from Jan 1 00:00. Wraps across
        the year end.
        """
        pos = sim_time / 3600.0
        h = int(pos)
        frac = pos - h
        h %= HOURS_PER_YEAR
        h2 = h + 1
        if h2 == HOURS_PER_YEAR:
            h2 = 0
        db = self.drybulb
        dn = self.direct_normal_rad
        dh = self.diffuse_horiz_rad
        return (
            db[h] + frac * (db[h2] - db[h]),
            dn[h] + frac * (dn[h2] - dn[h]),
            dh[h] + frac * (dh[h2] - dh[h]),
        )


def _circular_interp(a: float, b: float, frac: float) -> float:
    d = (b - a + 180.0) % 360.0 - 180.0
    return (a + frac * d) % 360.0


def sample_at(series: WeatherSeries, sim_time: float) -> WeatherRecord:
    """Interpolated record at ``sim_time`` seconds from Jan 1 00:00.

    Continuous fields are interpolated linearly between the bracketing
    hourly records (wrapping across the year end); wind direction is
    interpolated on the circle; calendar fields come from the floor hour.
    """
    if not 0 <= sim_time < SECONDS_PER_YEAR:
        raise OutOfRange(f"sim_time {sim_time} outside [0, {SECONDS_PER_YEAR})")
    pos = sim_time / 3600.0
    h = int(pos)
    frac = pos - h
    h2 = (h + 1) % HOURS_PER_YEAR

    def lin(arr: np.ndarray) -> float:
        return float(arr[h] + frac * (arr[h2] - arr[h]))

    return WeatherRecord(
        month=int(CAL_MONTH[h]),
        day=int(CAL_DAY[h]),
        hour=int(CAL_HOUR[h]),
        drybulb=lin(series.drybulb),
        rel_humidity=lin(series.rel_humidity),
        wind_speed=lin(series.wind_speed),
        wind_dir=_circular_interp(
            float(series.wind_dir[h]), float(series.wind_dir[h2]), frac
        ),
        direct_normal_rad=lin(series.direct_normal_rad),
        diffuse_horiz_rad=lin(series.diffuse_horiz_rad),
    )


def parse_weather_csv(path: str | Path) -> WeatherSeries:
    """Read the 9-column hourly weather CSV (see :data:`CSV_HEADER`)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    cols = [np.empty(HOURS_PER_YEAR) for _ in range(6)]
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise WrongRowCount(0) from None
        if [c.strip() for c in header] != CSV_HEADER.split(","):
            raise MalformedRow(1, f"header must be exactly '{CSV_HEADER}'")
        n = 0
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if n >= HOURS_PER_YEAR:
                n += 1
                continue
            if len(row) != 9:
                raise MalformedRow(line_no, f"expected 9 fields, got {len(row)}")
            try:
                m, d, h = int(row[0]), int(row[1]), int(row[2])
                vals = [float(v) for v in row[3:]]
            except ValueError as exc:
                raise MalformedRow(line_no, str(exc)) from None
            if m != CAL_MONTH[n] or d != CAL_DAY[n] or h != CAL_HOUR[n]:
                raise MalformedRow(
                    line_no,
                    f"calendar ({m},{d},{h}) out of order; expected "
                    f"({CAL_MONTH[n]},{CAL_DAY[n]},{CAL_HOUR[n]})",
                )
            if not 0.0 <= vals[1] <= 100.0:
                raise MalformedRow(line_no, f"rh_pct {vals[1]} outside [0, 100]")
            if vals[2] < 0:
                raise MalformedRow(line_no, "wind_speed_ms must be >= 0")
            if vals[4] < 0 or vals[5] < 0:
                raise MalformedRow(line_no, "radiation fields must be >= 0")
            for j in range(6):
                cols[j][n] = vals[j]
            n += 1
    if n != HOURS_PER_YEAR:
        raise WrongRowCount(n)
    return WeatherSeries(path.stem, *cols)


def write_weather_csv(series: WeatherSeries, path: str | Path) -> None:
    """Write a series in the package CSV schema (round-trips exactly)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(HOURS_PER_YEAR):
            fh.write(
                f"{CAL_MONTH[i]},{CAL_DAY[i]},{CAL_HOUR[i]},"
                f"{float(series.drybulb[i])!r},{float(series.rel_humidity[i])!r},"
                f"{float(series.wind_speed[i])!r},{float(series.wind_dir[i])!r},"
                f"{float(series.direct_normal_rad[i])!r},"
                f"{float(series.diffuse_horiz_rad[i])!r}\n"
            )


# EPW data-row field positions (0-based) per the published field order.
_EPW_DRYBULB = 6
_EPW_RH = 8
_EPW_DIRECT_NORMAL = 14
_EPW_DIFFUSE_HORIZ = 15
_EPW_WIND_DIR = 20
_EPW_WIND_SPEED = 21
_EPW_HEADER_LINES = 8


def import_epw(path: str | Path) -> WeatherSeries:
    """Extract the supported fields from a standard EPW text file.

    Only drybulb, relative humidity, wind speed/direction and the two solar
    radiation columns are kept. Units are validated by range checks rather
    than trusting the header (this also rejects EPW missing-value marks
    such as 99.9 / 999 / 9999).
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first.upper().startswith("LOCATION"):
            raise NotEpw(f"{path}: first line does not begin with LOCATION")
        loc_fields = first.strip().split(",")
        location = ", ".join(f for f in loc_fields[1:4] if f) or path.stem
        for _ in range(_EPW_HEADER_LINES - 1):
            fh.readline()
        cols = [np.empty(HOURS_PER_YEAR) for _ in range(6)]
        n = 0
        for line_no, line in enumerate(fh, start=_EPW_HEADER_LINES + 1):
            line = line.strip()
            if not line:
                continue
            if n >= HOURS_PER_YEAR:
                n += 1
                continue
            row = line.split(",")
            if len(row) <= _EPW_WIND_SPEED:
                raise MalformedRow(line_no, f"expected EPW data row, got {len(row)} fields")
            try:
                drybulb = float(row[_EPW_DRYBULB])
                rh = float(row[_EPW_RH])
                direct = float(row[_EPW_DIRECT_NORMAL])
                diffuse = float(row[_EPW_DIFFUSE_HORIZ])
                wdir = float(row[_EPW_WIND_DIR])
                wspd = float(row[_EPW_WIND_SPEED])
            except ValueError as exc:
                raise MalformedRow(line_no, str(exc)) from None
            if not -70.0 <= drybulb <= 70.0:
                raise MalformedRow(line_no, f"drybulb {drybulb} outside plausible degC range")
            if not 0.0 <= rh <= 100.0:
                raise MalformedRow(line_no, f"relative humidity {rh} outside [0, 100]")
            if not 0.0 <= wspd <= 60.0:
                raise MalformedRow(line_no, f"wind speed {wspd} outside plausible m/s range")
            if not 0.0 <= wdir <= 360.0:
                raise MalformedRow(line_no, f"wind direction {wdir} outside [0, 360]")
            if not 0.0 <= direct <= 1500.0 or not 0.0 <= diffuse <= 1500.0:
                raise MalformedRow(line_no, "radiation outside plausible W/m2 range")
            cols[0][n] = drybulb
            cols[1][n] = rh
            cols[2][n] = wspd
            cols[3][n] = wdir % 360.0
            cols[4][n] = direct
            cols[5][n] = diffuse
            n += 1
    if n != HOURS_PER_YEAR:
        raise WrongRowCount(n)
    return WeatherSeries(location, *cols)


def synthesize_climate(spec: ClimateSpec, seed: int) -> WeatherSeries:
    """Generate a plausible annual series from a compact climate description.

    Drybulb follows annual and diurnal cosines around the annual mean (the
    diurnal peak is pinned at 15:00) plus small seeded jitter; humidity,
    wind and solar columns are simple diurnal/seasonal shapes with jitter.
    The resulting mean annual temperature stays within 0.1 degC of
    ``spec.annual_mean``.
    """
    rng = rng_from(seed)
    doy = CAL_DOY.astype(np.float64)
    hour = CAL_HOUR.astype(np.float64)
    annual = np.cos(2.0 * np.pi * (doy - spec.phase_day) / 365.0)
    diurnal = np.cos(2.0 * np.pi * (hour - 15.0) / 24.0)

    drybulb = (
        spec.annual_mean
        + spec.annual_amplitude * annual
        + spec.diurnal_amplitude * diurnal
        + 0.25 * rng.standard_normal(HOURS_PER_YEAR)
    )
    rel_humidity = np.clip(
        spec.humidity_mean
        - 8.0 * diurnal
        + 3.0 * rng.standard_normal(HOURS_PER_YEAR),
        0.0,
        100.0,
    )
    wind_speed = np.maximum(
        3.0 + 1.2 * rng.standard_normal(HOURS_PER_YEAR), 0.0
    )
    wind_dir = (225.0 + 60.0 * rng.standard_normal(HOURS_PER_YEAR)) % 360.0
    # Solar: zero at night, half-sine over 06:00-18:00, seasonal scaling,
    # multiplicative clearness jitter.
    elevation = np.maximum(np.sin(np.pi * (hour - 6.0) / 12.0), 0.0)
    elevation[(hour < 6.0) | (hour > 18.0)] = 0.0
    season = 1.0 + 0.35 * annual
    clearness = np.clip(
        0.75 + 0.2 * rng.standard_normal(HOURS_PER_YEAR), 0.05, 1.0
    )
    direct = 850.0 * elevation * season * clearness
    diffuse = 120.0 * elevation * season + 40.0 * elevation * (1.0 - clearness)

    name = f"synthetic-{spec.annual_mean:g}C"
    return WeatherSeries(
        name, drybulb, rel_humidity, wind_speed, wind_dir, direct, diffuse
    )


def ou_deviation(params: OUParams, n: int, seed: int) -> np.ndarray:
    """Mean-reverting deviation process d with d[0] = 0.

    d[t+1] = (1 - mu) * d[t] - tau + sigma * xi[t], xi ~ N(0, 1) per step.
    """
    d = np.zeros(n)
    if n <= 1:
        return d
    if params.sigma == 0.0:
        noise = np.zeros(n - 1)
    else:
        noise = params.sigma * rng_from(seed).standard_normal(n - 1)
    e = noise - params.tau
    # d[1:] solves the AR(1) recurrence; lfilter evaluates it exactly.
    d[1:] = lfilter([1.0], [1.0, -(1.0 - params.mu)], e)
    return d


def apply_ou_noise(base: WeatherSeries, params: OUParams, seed: int) -> WeatherSeries:
    """Perturb the drybulb column with the mean-reverting deviation process.

    Only drybulb changes; all other columns are shared with ``base``. With
    sigma = tau = 0 the deviation is identically zero and the base drybulb
    array is reused as-is, so all-zero parameters are a bitwise identity.
    """
    if params.sigma == 0.0 and params.tau == 0.0:
        return base.with_drybulb(base.drybulb)
    d = ou_deviation(params, HOURS_PER_YEAR, seed)
    return base.with_drybulb(base.drybulb + d)
