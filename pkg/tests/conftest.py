"""
Shared fixtures: bundled case study, small buildings and synthetic weather
"""
import copy
import sys
from datetime import datetime, timedelta
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from app.services.building_loader import case_study_building, parse_building  # noqa: E402
from app.services.weather import synthetic_weather, weather_from_frame  # noqa: E402

CONCRETE = {"thickness": 0.12, "conductivity": 1.75, "density": 2300.0, "specific_heat": 920.0}


def wall(name, area=9.0, tilt=90.0, azimuth=0.0, layer=None, **extra):
    doc = {
        "type": "wall",
        "name": name,
        "area": area,
        "layer": dict(layer or CONCRETE),
        "tilt_deg": tilt,
        "azimuth_deg": azimuth,
    }
    doc.update(extra)
    return doc


def one_zone_document(convection="constant_h", **zone_extra):
    """3 m cube with four facades, a roof and a ground slab"""
    zone = {"name": "room", "volume": 27.0, "convection_model": {"model": convection},
            "initial_temperature": 20.0, "initial_humidity": 0.01}
    zone.update(zone_extra)
    interzones = [
        {"name": f"facade_{label}", "side_a": "room", "side_b": "EXTERIOR",
         "components": [wall(f"wall_{label}", azimuth=azimuth)]}
        for label, azimuth in (("n", 0.0), ("e", 90.0), ("s", 180.0), ("w", 270.0))
    ]
    interzones.append({"name": "roof", "side_a": "room", "side_b": "EXTERIOR",
                       "components": [wall("roof_slab", tilt=0.0)]})
    interzones.append({"name": "ground", "side_a": "room", "side_b": "EXTERIOR",
                       "components": [wall("ground_slab", tilt=180.0, ground_contact=True, absorptance_b=0.0)]})
    return {
        "name": "one_zone",
        "site": {"latitude_deg": -21.5, "longitude_deg": 55.1, "utc_offset_hours": 4.0},
        "zones": [zone],
        "interzones": interzones,
    }


def two_zone_adiabatic_document(temperature=20.0):
    """Two rooms sharing a partition, both on a ground slab; no other exchange"""
    zones = [
        {"name": "left", "volume": 27.0, "initial_temperature": temperature},
        {"name": "right", "volume": 27.0, "initial_temperature": temperature},
    ]
    interzones = [
        {"name": "partition", "side_a": "left", "side_b": "right",
         "components": [wall("partition_wall", azimuth=90.0)]},
        {"name": "left_ground", "side_a": "left", "side_b": "EXTERIOR",
         "components": [wall("left_slab", tilt=180.0, ground_contact=True)]},
        {"name": "right_ground", "side_a": "right", "side_b": "EXTERIOR",
         "components": [wall("right_slab", tilt=180.0, ground_contact=True)]},
    ]
    return {
        "name": "adiabatic",
        "site": {"latitude_deg": -21.5, "longitude_deg": 55.1},
        "zones": zones,
        "interzones": interzones,
    }


def constant_weather(hours=48, tdb=20.0, gh=0.0, dh=0.0, w=0.01, wind_speed=0.0, start=datetime(2024, 1, 15)):
    rows = [
        {"timestamp": start + timedelta(hours=k), "gh": gh, "dh": dh, "tdb": tdb, "w": w,
         "wind_speed": wind_speed, "wind_dir": 0.0}
        for k in range(hours)
    ]
    return weather_from_frame(pd.DataFrame(rows))


@pytest.fixture
def case_study():
    return case_study_building()


@pytest.fixture
def case_study_document():
    return copy.deepcopy(case_study_building().model_dump(mode="json"))


@pytest.fixture
def one_zone():
    return parse_building(one_zone_document())


@pytest.fixture
def two_day_weather():
    return synthetic_weather(["cloudy", "sunny"])


@pytest.fixture
def sunny_weather():
    return synthetic_weather(["sunny"])
