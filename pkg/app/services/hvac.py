"""
HVAC Control - ideal deadband controller on zone air temperature

The required power is found by superposition on the implicit zone system:
T = x + P * y, with x the free-floating solution and y the response to one
watt injected with the system's convective/radiative split.
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from app.models.building import HvacSystem

if TYPE_CHECKING:
    from app.services.thermal import ZoneSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HvacOutput:
    """Delivered sensible power (W, positive heating) and its split"""
    convective: float = 0.0
    radiative: float = 0.0
    requested: float = 0.0
    clamped: bool = False

    @property
    def total(self) -> float:
        return self.convective + self.radiative


def is_scheduled(hvac: HvacSystem, hour: int) -> bool:
    return bool(hvac.schedule[hour % 24])


def control_target(hvac: HvacSystem, free_floating_air: float) -> Optional[float]:
    """Violated setpoint, or None inside the deadband"""
    if free_floating_air > hvac.setpoint_high:
        return hvac.setpoint_high
    if free_floating_air < hvac.setpoint_low:
        return hvac.setpoint_low
    return None


def _superposition(system: "ZoneSystem", dt: float) -> Tuple[np.ndarray, np.ndarray]:
    from app.services.thermal import solve_linear

    matrix, rhs = system.implicit_operator(dt)
    rhs = rhs - system.vectors.get("B_hvac", 0.0)
    unit = system.hvac_distribution
    if unit is None:
        unit = np.zeros(len(system.labels))
        unit[system.air_index] = 1.0
    solution = solve_linear(matrix, np.column_stack([rhs, unit]), system.labels)
    return solution[:, 0], solution[:, 1]


def required_sensible_power(system: "ZoneSystem", target: float, dt: float) -> float:
    """Power (W) bringing the air node exactly to `target` at the end of the step"""
    free, unit = _superposition(system, dt)
    air = system.air_index
    return float((target - free[air]) / unit[air])


def apply_control(hvac: HvacSystem, required: float, hour: int, free_floating_air: Optional[float] = None) -> HvacOutput:
    """
    Schedule, deadband and capacity limits applied to a required power

    With `free_floating_air` given, no power is delivered inside the deadband.
    In sizing mode the capacity limits are ignored.
    """
    if not is_scheduled(hvac, hour):
        return HvacOutput()
    if free_floating_air is not None and control_target(hvac, free_floating_air) is None:
        return HvacOutput()

    power = required
    clamped = False
    if not hvac.sizing_mode:
        if power > hvac.heating_power_max:
            power, clamped = hvac.heating_power_max, True
        elif power < -hvac.cooling_power_max:
            power, clamped = -hvac.cooling_power_max, True

    radiative = power * hvac.radiative_fraction
    return HvacOutput(
        convective=power - radiative,
        radiative=radiative,
        requested=required,
        clamped=clamped,
    )


def hvac_response(system: "ZoneSystem", hvac: HvacSystem, hour: int, dt: float) -> Tuple[HvacOutput, np.ndarray]:
    """Controlled output and the resulting end-of-step temperatures"""
    free, unit = _superposition(system, dt)
    air = system.air_index
    if not is_scheduled(hvac, hour):
        return HvacOutput(), free

    target = control_target(hvac, free[air])
    if target is None:
        return HvacOutput(), free

    required = float((target - free[air]) / unit[air])
    output = apply_control(hvac, required, hour)
    if output.clamped:
        logger.debug(f"HVAC '{hvac.name}' clamped: requested {required:.1f} W, delivered {output.total:.1f} W")
    return output, free + output.total * unit
