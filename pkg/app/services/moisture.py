"""
Moisture Balance - well-mixed specific humidity of every zone

    rho V dw/dt = sum(mdot_in (w_upstream - w)) + gains - latent_removal

discretized implicitly. Zones exchanging air are solved together so the
moisture carried between them is conserved exactly.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from app.models.building import EXTERIOR, Building, HvacSystem, Zone
from app.services.airflow import ZoneInflows

logger = logging.getLogger(__name__)

MIN_HUMIDITY = 0.0
MAX_HUMIDITY = 0.05
SATURATION_FLOOR = 0.001  # kg/kg, lowest humidity latent removal may reach


def clamp_humidity(value: float, zone: str = "") -> Tuple[float, bool]:
    if MIN_HUMIDITY <= value <= MAX_HUMIDITY:
        return value, False
    clamped = min(max(value, MIN_HUMIDITY), MAX_HUMIDITY)
    logger.warning(f"Humidity in zone '{zone}' clamped from {value:.5f} to {clamped:.5f} kg/kg")
    return clamped, True


def step_humidity(
    zone: Zone,
    humidity: float,
    inflows: Iterable[Tuple[float, float]],
    gain: float,
    latent_removal: float,
    dt: float,
) -> float:
    """
    Implicit single-zone update

    inflows: (mass flow kg/s, upstream humidity kg/kg) pairs. Latent removal
    stops at SATURATION_FLOOR: it never dries the zone below 0.001 kg/kg.
    """
    if dt <= 0.0:
        raise ValueError("timestep must be positive")
    storage = zone.air_mass / dt
    numerator = storage * humidity + gain
    denominator = storage
    for mass_flow, upstream in inflows:
        numerator += mass_flow * upstream
        denominator += mass_flow
    if latent_removal > 0.0:
        headroom = max(numerator / denominator - SATURATION_FLOOR, 0.0) * denominator
        numerator -= min(latent_removal, headroom)
    value, _ = clamp_humidity(numerator / denominator, zone.name)
    return value


@dataclass
class MoistureSolution:
    humidity: Dict[str, float]
    latent_removal: Dict[str, float] = field(default_factory=dict)
    clamped: Dict[str, bool] = field(default_factory=dict)


def latent_controllers(building: Building) -> Dict[str, HvacSystem]:
    """HVAC systems with a humidity setpoint, keyed by controlled zone"""
    return {
        interzone.side_a: component
        for interzone, component in building.components(HvacSystem)
        if component.humidity_setpoint is not None and component.latent_capacity > 0.0
    }


def solve_moisture_balance(
    building: Building,
    humidity: Mapping[str, float],
    inflows: Mapping[str, ZoneInflows],
    outdoor_humidity: float,
    hour: int,
    dt: float,
) -> MoistureSolution:
    """All zones at once; latent removal found by superposition on the same system"""
    if dt <= 0.0:
        raise ValueError("timestep must be positive")
    names = building.zone_names
    index = {name: k for k, name in enumerate(names)}
    n = len(names)

    matrix = np.zeros((n, n))
    rhs = np.zeros(n)
    for zone in building.zones:
        i = index[zone.name]
        storage = zone.air_mass / dt
        matrix[i, i] += storage
        rhs[i] += storage * humidity[zone.name] + zone.moisture_gains[hour % 24]
        zone_in = inflows.get(zone.name, ZoneInflows())
        matrix[i, i] += zone_in.total
        rhs[i] += zone_in.exterior * outdoor_humidity
        for upstream, mass_flow in zone_in.neighbours.items():
            if upstream == EXTERIOR:
                continue
            matrix[i, index[upstream]] -= mass_flow

    free = np.linalg.solve(matrix, rhs) if n else rhs
    removal = np.zeros(n)
    for zone_name, hvac in latent_controllers(building).items():
        if not hvac.schedule[hour % 24]:
            continue
        i = index[zone_name]
        target = max(hvac.humidity_setpoint, SATURATION_FLOOR)
        current = (free - np.linalg.solve(matrix, removal))[i] if removal.any() else free[i]
        if current <= target:
            continue
        unit = np.zeros(n)
        unit[i] = 1.0
        response = np.linalg.solve(matrix, unit)[i]
        removal[i] = min((current - target) / response, hvac.latent_capacity)

    solution = free - np.linalg.solve(matrix, removal) if removal.any() else free
    result = MoistureSolution(humidity={}, latent_removal={}, clamped={})
    for name in names:
        value, clamped = clamp_humidity(float(solution[index[name]]), name)
        result.humidity[name] = value
        result.clamped[name] = clamped
        result.latent_removal[name] = float(removal[index[name]])
    return result
