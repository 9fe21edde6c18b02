"""
Weather Service - CSV ingestion and synthetic cloudy/sunny days

File format (one header line, hourly rows):
    timestamp,gh,dh,tdb,w,wind_speed,wind_dir
timestamp is ISO 8601 local civil time; gh/dh in W/m2, tdb in degC, w in
kg/kg, wind_speed in m/s, wind_dir in degrees clockwise from north.
"""
import logging
import math
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Union

import pandas as pd

from app.core.exceptions import ConfigurationError, WeatherLoadError
from app.models.weather import WEATHER_COLUMNS, WeatherSeries

logger = logging.getLogger(__name__)

DAY_KINDS = ("cloudy", "sunny")
SYNTHETIC_START = datetime(2024, 1, 15)

# Day profiles: peak global horizontal (W/m2) and diffuse fraction
DAY_PROFILES = {
    "sunny": (1000.0, 0.15),
    "cloudy": (300.0, 0.9),
}
MEAN_DRY_BULB = 26.0
DRY_BULB_AMPLITUDE = 4.0
SYNTHETIC_HUMIDITY = 0.016
SYNTHETIC_WIND_SPEED = 3.0
SYNTHETIC_WIND_DIR = 120.0


def load_weather(path: Union[str, Path]) -> WeatherSeries:
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise WeatherLoadError(f"Weather file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise WeatherLoadError(f"Cannot parse weather file {path}: {e}")
    return weather_from_frame(frame)


def weather_from_frame(frame: pd.DataFrame) -> WeatherSeries:
    """
    Validate raw rows into a series

    Row numbers in errors count the header as row 1, as seen in an editor.
    """
    missing = [c for c in WEATHER_COLUMNS if c not in frame.columns]
    if missing:
        raise WeatherLoadError(f"Missing column(s): {', '.join(missing)}", row=1)
    frame = frame[WEATHER_COLUMNS].reset_index(drop=True)

    timestamps = pd.to_datetime(frame["timestamp"], errors="coerce")
    for position in range(len(frame)):
        row = position + 2
        if pd.isna(timestamps.iloc[position]):
            raise WeatherLoadError(f"Invalid timestamp '{frame['timestamp'].iloc[position]}'", row=row)
    for column in WEATHER_COLUMNS[1:]:
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = values.isna()
        if bad.any():
            raise WeatherLoadError(f"Non-numeric value in column '{column}'", row=int(bad.to_numpy().argmax()) + 2)
        frame[column] = values.astype(float)

    steps = timestamps.diff().iloc[1:]
    for position, step in zip(range(1, len(frame)), steps):
        row = position + 2
        if step <= pd.Timedelta(0):
            raise WeatherLoadError(f"Timestamps are not strictly increasing ({timestamps.iloc[position]})", row=row)
        if step != pd.Timedelta(hours=1):
            raise WeatherLoadError(
                f"Gap in hourly series between {timestamps.iloc[position - 1]} and {timestamps.iloc[position]}",
                row=row,
            )

    negative = (frame["gh"] < 0) | (frame["dh"] < 0)
    if negative.any():
        raise WeatherLoadError("Negative irradiance", row=int(negative.to_numpy().argmax()) + 2)
    excess = frame["dh"] > frame["gh"]
    for position in frame.index[excess]:
        logger.warning(
            f"Weather row {position + 2}: diffuse {frame.at[position, 'dh']} exceeds global "
            f"{frame.at[position, 'gh']}, clamped"
        )
    frame.loc[excess, "dh"] = frame.loc[excess, "gh"]

    frame["timestamp"] = timestamps
    return WeatherSeries(frame.set_index("timestamp"))


def synthetic_day(kind: str, date: datetime) -> pd.DataFrame:
    if kind not in DAY_PROFILES:
        raise ConfigurationError(f"Unknown synthetic day '{kind}' (expected one of: {', '.join(DAY_KINDS)})")
    peak, diffuse_fraction = DAY_PROFILES[kind]
    rows = []
    midnight = datetime(date.year, date.month, date.day)
    for hour in range(24):
        gh = peak * math.sin(math.pi * (hour - 6) / 12.0) if 6 < hour < 18 else 0.0
        rows.append({
            "timestamp": midnight + timedelta(hours=hour),
            "gh": gh,
            "dh": diffuse_fraction * gh,
            "tdb": MEAN_DRY_BULB + DRY_BULB_AMPLITUDE * math.sin(2.0 * math.pi * (hour - 9) / 24.0),
            "w": SYNTHETIC_HUMIDITY,
            "wind_speed": SYNTHETIC_WIND_SPEED,
            "wind_dir": SYNTHETIC_WIND_DIR,
        })
    return pd.DataFrame(rows, columns=WEATHER_COLUMNS)


def synthetic_weather(days: Iterable[str] = DAY_KINDS, start: datetime = SYNTHETIC_START) -> WeatherSeries:
    """Consecutive synthetic days, e.g. ("cloudy", "sunny")"""
    frames = [synthetic_day(kind, start + timedelta(days=k)) for k, kind in enumerate(days)]
    if not frames:
        raise ConfigurationError("At least one synthetic day is required")
    return weather_from_frame(pd.concat(frames, ignore_index=True))


def write_weather(series: WeatherSeries, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = series.to_frame()
    frame["timestamp"] = frame["timestamp"].dt.strftime("%Y-%m-%dT%H:%M:%S")
    frame.to_csv(path, index=False, float_format="%.6g")
    logger.info(f"Wrote {len(frame)} weather rows to {path}")
    return path
