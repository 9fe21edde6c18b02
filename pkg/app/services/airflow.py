"""
Airflow Models - prescribed flow rates and the pressure-node network

fixed_rates: inter-zone flows are read from the FixedFlow components.
pressure_network: one pressure unknown per zone (referenced at z = 0 m),
links obey power laws (or a strip-discretized large opening), and mass
conservation in every zone is solved by damped Newton-Raphson.

Both models end up as directed gross flows (source, target, kg/s) that feed
the zone air heat balance and the moisture balance.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from app.core.exceptions import ConvergenceError, SingularSystemError
from app.models.building import AIR_DENSITY, EXTERIOR, Building, FixedFlow, Opening
from app.core.config import settings

logger = logging.getLogger(__name__)

GRAVITY = 9.81
REGULARIZATION_DP = 0.01  # Pa
LARGE_OPENING_STRIPS = 10
MAX_STEP_HALVINGS = 5
IMBALANCE_THRESHOLD = 1e-6  # kg/s


def air_density(temperature: float) -> float:
    """kg/m3 for a dry-bulb temperature in degC"""
    return 353.0 / (temperature + 273.15)


@dataclass(frozen=True)
class DirectedFlow:
    source: str
    target: str
    mass_flow: float  # kg/s, >= 0


# ============================================================================
# Prescribed flow rates
# ============================================================================

def gross_fixed_flows(building: Building, hour: int) -> List[DirectedFlow]:
    """Scheduled FixedFlow rates, with the return flow of balanced exchanges"""
    flows: List[DirectedFlow] = []
    for interzone, component in building.components(FixedFlow):
        rate = component.mass_flow * component.schedule[hour % 24]
        if rate == 0.0:
            continue
        flows.append(DirectedFlow(interzone.side_a, interzone.side_b, rate))
        if component.balanced:
            flows.append(DirectedFlow(interzone.side_b, interzone.side_a, rate))
    return flows


def fixed_rates(building: Building, hour: int) -> pd.DataFrame:
    """
    Net inter-zone mass flow matrix (kg/s), rows = from, columns = to

    Antisymmetric; the user's rates are taken as-is and an unbalanced zone is
    only reported.
    """
    nodes = building.zone_names + [EXTERIOR]
    matrix = pd.DataFrame(0.0, index=nodes, columns=nodes)
    for flow in gross_fixed_flows(building, hour):
        matrix.loc[flow.source, flow.target] += flow.mass_flow
        matrix.loc[flow.target, flow.source] -= flow.mass_flow

    imbalance = matrix.loc[building.zone_names].sum(axis=1)
    for zone, value in imbalance.items():
        if abs(value) > IMBALANCE_THRESHOLD:
            logger.warning(f"Fixed flows unbalanced in zone '{zone}' at hour {hour}: net outflow {value:.3g} kg/s")
    return matrix


# ============================================================================
# Driving pressures
# ============================================================================

def pressure_coefficient(incidence_deg: float) -> float:
    """Cp linear from 0.75 (windward) to -0.30 (leeward)"""
    theta = abs((incidence_deg + 180.0) % 360.0 - 180.0)
    return 0.75 - 1.05 * theta / 180.0


def wind_pressure(
    wind_speed: float, wind_dir: float, facade_azimuth: float, density: float = AIR_DENSITY
) -> float:
    """Facade wind pressure (Pa); directions in degrees clockwise from north"""
    if wind_speed <= 0.0:
        return 0.0
    return 0.5 * density * pressure_coefficient(wind_dir - facade_azimuth) * wind_speed ** 2


@dataclass(frozen=True)
class AirflowLink:
    """An Opening placed in the network; `height` is absolute (m above z = 0)"""
    id: str
    from_node: str
    to_node: str
    opening: Opening
    height: float

    @property
    def is_large(self) -> bool:
        return self.opening.large_opening is not None


def stack_pressure_difference(
    link: AirflowLink, t_from: float, t_to: float, p_from: float, p_to: float
) -> float:
    """dP across the link at its height, with node pressures referenced at z = 0"""
    z = link.height
    return (p_from - air_density(t_from) * GRAVITY * z) - (p_to - air_density(t_to) * GRAVITY * z)


# ============================================================================
# Link laws
# ============================================================================

@dataclass(frozen=True)
class LinkFlowResult:
    """Signed net flow (+ from -> to) and its directional parts"""
    mass_flow: float
    forward: float
    reverse: float
    derivative: float


def power_law(coefficient: float, exponent: float, delta_p: float) -> Tuple[float, float]:
    """(mdot, dmdot/ddP); linear secant through +-0.01 Pa near zero"""
    magnitude = abs(delta_p)
    if magnitude < REGULARIZATION_DP:
        slope = coefficient * REGULARIZATION_DP ** (exponent - 1.0)
        return slope * delta_p, slope
    flow = math.copysign(coefficient * magnitude ** exponent, delta_p)
    return flow, exponent * coefficient * magnitude ** (exponent - 1.0)


def link_flow(
    link: AirflowLink, delta_p: float, t_from: float = 20.0, t_to: float = 20.0
) -> LinkFlowResult:
    """
    Flow through one link for a pressure difference at its reference height

    Large openings are cut into horizontal strips, each a square-root orifice
    at its own height, so opposed flows can coexist when the densities differ.
    """
    opening = link.opening
    if not link.is_large:
        flow, derivative = power_law(opening.flow_coefficient, opening.flow_exponent, delta_p)
        return LinkFlowResult(flow, max(flow, 0.0), max(-flow, 0.0), derivative)

    large = opening.large_opening
    rho_from, rho_to = air_density(t_from), air_density(t_to)
    strip_height = large.height / LARGE_OPENING_STRIPS
    coefficient = large.discharge_coefficient * large.width * strip_height * math.sqrt(rho_from + rho_to)
    offsets = (np.arange(LARGE_OPENING_STRIPS) + 0.5) * strip_height - large.height / 2.0

    forward = reverse = derivative = 0.0
    for dz in offsets:
        strip_dp = delta_p - (rho_from - rho_to) * GRAVITY * dz
        flow, slope = power_law(coefficient, 0.5, strip_dp)
        derivative += slope
        if flow >= 0.0:
            forward += flow
        else:
            reverse -= flow
    return LinkFlowResult(forward - reverse, forward, reverse, derivative)


# ============================================================================
# Pressure network
# ============================================================================

@dataclass
class AirflowNetwork:
    zones: List[str]
    links: List[AirflowLink]
    facade_azimuths: Dict[str, Optional[float]] = field(default_factory=dict)
    pressures: Dict[str, float] = field(default_factory=dict)
    flows: Dict[str, LinkFlowResult] = field(default_factory=dict)
    iterations: int = 0
    residuals: Dict[str, float] = field(default_factory=dict)

    def directed_flows(self) -> List[DirectedFlow]:
        out: List[DirectedFlow] = []
        for link in self.links:
            result = self.flows.get(link.id)
            if result is None:
                continue
            if result.forward > 0.0:
                out.append(DirectedFlow(link.from_node, link.to_node, result.forward))
            if result.reverse > 0.0:
                out.append(DirectedFlow(link.to_node, link.from_node, result.reverse))
        return out


def build_network(building: Building) -> AirflowNetwork:
    """Links from every Opening; heights measured from the side_a zone floor"""
    reference = {zone.name: zone.reference_height for zone in building.zones}
    links: List[AirflowLink] = []
    azimuths: Dict[str, Optional[float]] = {}
    for interzone, component in building.components(Opening):
        base = reference.get(interzone.side_a, reference.get(interzone.side_b, 0.0))
        links.append(AirflowLink(
            id=component.name,
            from_node=interzone.side_a,
            to_node=interzone.side_b,
            opening=component,
            height=base + component.height,
        ))
        azimuths[component.name] = component.azimuth_deg
    return AirflowNetwork(zones=building.zone_names, links=links, facade_azimuths=azimuths)


def reached_from_exterior(pairs: Iterable[Tuple[str, str]]) -> set:
    """Nodes joined to EXTERIOR through the given undirected pairs, EXTERIOR included"""
    adjacency: Dict[str, set] = {}
    for a, b in pairs:
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)
    seen = {EXTERIOR}
    queue = deque([EXTERIOR])
    while queue:
        for other in adjacency.get(queue.popleft(), ()):
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return seen


def check_connectivity(network: AirflowNetwork):
    seen = reached_from_exterior((link.from_node, link.to_node) for link in network.links)
    isolated = [zone for zone in network.zones if zone not in seen]
    if isolated:
        raise SingularSystemError(
            f"Zone(s) not connected to the exterior by any opening: {', '.join(isolated)}",
            node=isolated[0],
        )


def solve_pressure_network(
    network: AirflowNetwork,
    zone_temperatures: Mapping[str, float],
    outdoor_temperature: float,
    wind_speed: float = 0.0,
    wind_dir: float = 0.0,
    fixed_flows: Iterable[DirectedFlow] = (),
    tolerance: float = settings.AIRFLOW_TOLERANCE,
    max_iterations: int = settings.MAX_AIRFLOW_ITERATIONS,
) -> AirflowNetwork:
    """
    Zone pressures such that the net inflow of every zone is below `tolerance`

    Starts from 0 Pa everywhere; a Newton step is halved (up to 5 times) while
    the residual norm does not decrease.
    """
    check_connectivity(network)
    zones = network.zones
    index = {zone: k for k, zone in enumerate(zones)}
    temperatures = dict(zone_temperatures)
    temperatures[EXTERIOR] = outdoor_temperature

    exterior_pressure = {
        link.id: wind_pressure(wind_speed, wind_dir, network.facade_azimuths[link.id])
        if network.facade_azimuths.get(link.id) is not None else 0.0
        for link in network.links
    }
    sources = np.zeros(len(zones))
    for flow in fixed_flows:
        if flow.source in index:
            sources[index[flow.source]] -= flow.mass_flow
        if flow.target in index:
            sources[index[flow.target]] += flow.mass_flow

    def node_pressure(node: str, link: AirflowLink, pressures: np.ndarray) -> float:
        return exterior_pressure[link.id] if node == EXTERIOR else pressures[index[node]]

    def evaluate(pressures: np.ndarray):
        residual = sources.copy()
        jacobian = np.zeros((len(zones), len(zones)))
        results: Dict[str, LinkFlowResult] = {}
        for link in network.links:
            dp = stack_pressure_difference(
                link,
                temperatures[link.from_node],
                temperatures[link.to_node],
                node_pressure(link.from_node, link, pressures),
                node_pressure(link.to_node, link, pressures),
            )
            result = link_flow(link, dp, temperatures[link.from_node], temperatures[link.to_node])
            results[link.id] = result
            a, b = index.get(link.from_node), index.get(link.to_node)
            d = result.derivative
            if a is not None:
                residual[a] -= result.mass_flow
                jacobian[a, a] -= d
            if b is not None:
                residual[b] += result.mass_flow
                jacobian[b, b] -= d
            if a is not None and b is not None:
                jacobian[a, b] += d
                jacobian[b, a] += d
        return residual, jacobian, results

    pressures = np.zeros(len(zones))
    residual, jacobian, results = evaluate(pressures)
    history = [float(np.max(np.abs(residual)))] if zones else [0.0]
    iteration = 0
    while zones and history[-1] >= tolerance:
        iteration += 1
        if iteration > max_iterations:
            raise ConvergenceError(
                f"Pressure network did not converge in {max_iterations} iterations "
                f"(residual {dict(zip(zones, residual.round(9)))})",
                history,
            )
        try:
            step = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError:
            raise SingularSystemError("Singular airflow Jacobian", node=zones[int(np.argmin(np.abs(np.diag(jacobian))))])

        norm = np.linalg.norm(residual)
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = pressures + step
            new_residual, new_jacobian, new_results = evaluate(candidate)
            if np.linalg.norm(new_residual) < norm:
                break
            step = step / 2.0
        pressures, residual, jacobian, results = candidate, new_residual, new_jacobian, new_results
        history.append(float(np.max(np.abs(residual))))

    network.pressures = {zone: float(pressures[index[zone]]) for zone in zones}
    network.flows = results
    network.iterations = iteration
    network.residuals = {zone: float(residual[index[zone]]) for zone in zones}
    logger.debug(f"Pressure network solved in {iteration} iteration(s)")
    return network


# ============================================================================
# Zone inflows
# ============================================================================

@dataclass
class ZoneInflows:
    exterior: float = 0.0
    neighbours: Dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.exterior + sum(self.neighbours.values())


def zone_inflows(flows: Iterable[DirectedFlow], zones: Iterable[str]) -> Dict[str, ZoneInflows]:
    inflows = {zone: ZoneInflows() for zone in zones}
    for flow in flows:
        target = inflows.get(flow.target)
        if target is None or flow.mass_flow <= 0.0:
            continue
        if flow.source == EXTERIOR:
            target.exterior += flow.mass_flow
        else:
            target.neighbours[flow.source] = target.neighbours.get(flow.source, 0.0) + flow.mass_flow
    return inflows
