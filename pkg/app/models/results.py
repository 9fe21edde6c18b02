"""
Result Schemas - per-timestep results, timing report and case comparison
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd


def zone_column(zone: str, quantity: str) -> str:
    return f"zone.{zone}.{quantity}"


def link_column(link: str) -> str:
    return f"link.{link}.mdot"


def surface_column(component: str, quantity: str) -> str:
    return f"surface.{component}.{quantity}"


ZONE_QUANTITIES = ("tair", "w", "p_hvac", "clamped")


@dataclass
class SimulationResult:
    """
    One row per recorded timestep

    Columns: timestamp, zone.<name>.tair (degC), zone.<name>.w (kg/kg),
    zone.<name>.p_hvac (W, + heating), zone.<name>.clamped, link.<id>.mdot
    (kg/s, + side_a -> side_b), and with verbose surfaces
    surface.<component>.incident / .absorbed (W).
    """
    label: str
    frame: pd.DataFrame
    zones: List[str]
    links: List[str]

    def __len__(self) -> int:
        return len(self.frame)

    def series(self, zone: str, quantity: str = "tair") -> pd.Series:
        return self.frame[zone_column(zone, quantity)]

    def link(self, link: str) -> pd.Series:
        return self.frame[link_column(link)]


@dataclass
class ZoneTiming:
    name: str
    solve_s: float = 0.0
    solves: int = 0
    iterations: List[int] = field(default_factory=list)

    def iteration_summary(self) -> Dict[str, float]:
        if not self.iterations:
            return {"min": 0, "median": 0, "max": 0}
        values = np.asarray(self.iterations)
        return {"min": int(values.min()), "median": float(np.median(values)), "max": int(values.max())}

    def mode(self) -> int:
        """Most frequent iteration count, smallest on ties"""
        histogram = self.histogram()
        return max(histogram, key=lambda n: (histogram[n], -n)) if histogram else 0

    def histogram(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for value in self.iterations:
            counts[value] = counts.get(value, 0) + 1
        return dict(sorted(counts.items()))


@dataclass
class TimingReport:
    """Wall time of the recorded period and per-zone assemble+solve times"""
    case: str
    wall_s: float = 0.0
    zones: List[ZoneTiming] = field(default_factory=list)
    sweeps: List[int] = field(default_factory=list)

    @property
    def zone_count(self) -> int:
        return len(self.zones)

    @property
    def solve_s(self) -> float:
        return sum(z.solve_s for z in self.zones)

    @property
    def solves(self) -> int:
        return sum(z.solves for z in self.zones)

    def zone(self, name: str) -> ZoneTiming:
        for timing in self.zones:
            if timing.name == name:
                return timing
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "wall_s": self.wall_s,
            "zones": [
                {
                    "name": z.name,
                    "solve_s": z.solve_s,
                    "solves": z.solves,
                    "iterations": z.iteration_summary(),
                }
                for z in self.zones
            ],
        }


@dataclass
class CaseSummary:
    label: str
    models: Dict[str, str]
    max_temperature_error: float
    max_power_error: float
    wall_s: float
    solve_s: float
    time_ratio: float
    solves: int
    solve_ratio: float
    median_iterations: float


@dataclass
class ComparisonReport:
    reference: str
    focus_zones: List[str]
    cases: Dict[str, CaseSummary]
    results: Dict[str, SimulationResult] = field(default_factory=dict)
    timings: Dict[str, TimingReport] = field(default_factory=dict)

    def table(self) -> pd.DataFrame:
        rows = [
            {
                "case": s.label,
                "max |dT| (C)": s.max_temperature_error,
                "max |dP| (kW)": s.max_power_error / 1000.0,
                "time (s)": s.wall_s,
                "solve time (s)": s.solve_s,
                "time ratio": s.time_ratio,
                "solves": s.solves,
                "solve ratio": s.solve_ratio,
                "median iterations": s.median_iterations,
            }
            for s in self.cases.values()
        ]
        return pd.DataFrame(rows).set_index("case")

    def to_text(self) -> str:
        return (
            f"Reference case: {self.reference}  (zones: {', '.join(self.focus_zones)})\n"
            + self.table().to_string(float_format=lambda v: f"{v:.3f}")
        )

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "focus_zones": self.focus_zones,
            "cases": [
                {
                    "label": s.label,
                    "models": s.models,
                    "max_temperature_error": s.max_temperature_error,
                    "max_power_error": s.max_power_error,
                    "wall_s": s.wall_s,
                    "solve_s": s.solve_s,
                    "time_ratio": s.time_ratio,
                    "solves": s.solves,
                    "solve_ratio": s.solve_ratio,
                    "median_iterations": s.median_iterations,
                }
                for s in self.cases.values()
            ],
        }
