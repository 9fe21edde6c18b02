"""
Weather Schemas - hourly records driving a simulation
"""
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterator, List

import pandas as pd

WEATHER_COLUMNS = ["timestamp", "gh", "dh", "tdb", "w", "wind_speed", "wind_dir"]


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: datetime
    gh: float  # W/m2 global horizontal
    dh: float  # W/m2 diffuse horizontal
    tdb: float  # degC
    w: float  # kg/kg
    wind_speed: float  # m/s
    wind_dir: float  # deg clockwise from north


class WeatherSeries:
    """Validated hourly series backed by a DataFrame indexed by timestamp"""

    def __init__(self, frame: pd.DataFrame):
        self.frame = frame

    def __len__(self) -> int:
        return len(self.frame)

    def __iter__(self) -> Iterator[WeatherRecord]:
        for timestamp, row in self.frame.iterrows():
            yield self._record(timestamp, row)

    def __getitem__(self, position: int) -> WeatherRecord:
        return self._record(self.frame.index[position], self.frame.iloc[position])

    @staticmethod
    def _record(timestamp, row) -> WeatherRecord:
        return WeatherRecord(
            timestamp=pd.Timestamp(timestamp).to_pydatetime(),
            gh=float(row["gh"]),
            dh=float(row["dh"]),
            tdb=float(row["tdb"]),
            w=float(row["w"]),
            wind_speed=float(row["wind_speed"]),
            wind_dir=float(row["wind_dir"]),
        )

    @property
    def records(self) -> List[WeatherRecord]:
        return list(self)

    @property
    def start(self) -> datetime:
        return pd.Timestamp(self.frame.index[0]).to_pydatetime()

    @property
    def end(self) -> datetime:
        return pd.Timestamp(self.frame.index[-1]).to_pydatetime()

    def between(self, start: datetime, end: datetime) -> "WeatherSeries":
        """Records with start <= timestamp < end"""
        mask = (self.frame.index >= pd.Timestamp(start)) & (self.frame.index < pd.Timestamp(end))
        return WeatherSeries(self.frame.loc[mask])

    def annual_mean_temperature(self) -> float:
        return float(self.frame["tdb"].mean())

    def covers(self, start: datetime, end: datetime) -> bool:
        if not len(self):
            return False
        return self.start <= start and self.end >= end - timedelta(hours=1)

    def to_frame(self) -> pd.DataFrame:
        return self.frame.reset_index()
