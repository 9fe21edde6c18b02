"""
Thermal Network - nodal zone systems C dT/dt = A T + B

Each zone owns a set of temperature nodes (its air node plus the wall nodes
facing it) and a state equation whose A and B are sums of elementary terms,
one per phenomenon:

    A = A_cond + A_cvi_lin + A_cve + A_lwe + A_lwi + A_airflow + A_connex
    B = B_swi + B_swe + B_lwe + B_cve + B_cond + B_int_load + B_hvac
        + B_cvi_nlin + B_airflow + B_connex

Coupling to other zones only happens through A_connex / B_connex, refreshed
by a Gauss-Seidel connection process (`couple_zones`).

Walls use a two-capacitor lumping: R/4 - C/2 - R/2 - C/2 - R/4. An
inter-zone wall is split at its middle resistance: side_a owns face A and
core node 1, side_b owns core node 2 and face B.
"""
import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ConvergenceError, SingularSystemError, SolarDistributionError
from app.models.building import (
    AIR_SPECIFIC_HEAT,
    EXTERIOR,
    Building,
    ConstantConvection,
    Glazing,
    HvacSystem,
    NonlinearConvection,
    PerSurfaceConvection,
    Wall,
    Zone,
)
from app.services import hvac as hvac_control
from app.services.solar import (
    KELVIN,
    SurfaceOrientation,
    TiltedIrradiance,
    linear_radiation_coefficient,
    sky_view_factor,
)

logger = logging.getLogger(__name__)

MATRIX_TERMS = ("A_cond", "A_cvi_lin", "A_cve", "A_lwe", "A_lwi", "A_airflow", "A_connex")
VECTOR_TERMS = (
    "B_swi", "B_swe", "B_lwe", "B_cve", "B_cond", "B_int_load",
    "B_hvac", "B_cvi_nlin", "B_airflow", "B_connex",
)

AIR = "air"
FACE_A, CORE_A, CORE_B, FACE_B = "face_a", "core_a", "core_b", "face_b"

FLOOR_MAX_TILT = math.radians(30.0)
CEILING_MIN_TILT = math.radians(150.0)
LINEARIZATION_FLOOR = 0.05  # K
SOLAR_RESIDUAL = 0.1  # W

NodeKey = Tuple[str, str]


# ============================================================================
# Wall discretization and glazing
# ============================================================================

@dataclass(frozen=True)
class WallNodes:
    """R2C chain: face A -R/4- core 1 -R/2- core 2 -R/4- face B"""
    resistances: Tuple[float, float, float]
    capacities: Tuple[float, float]

    @property
    def total_resistance(self) -> float:
        return sum(self.resistances)

    @property
    def total_capacity(self) -> float:
        return sum(self.capacities)

    @property
    def conductances(self) -> Tuple[float, float, float]:
        return tuple(1.0 / r for r in self.resistances)


def discretize_wall(wall: Wall) -> WallNodes:
    layer = wall.layer
    resistance = layer.thickness / (layer.conductivity * wall.area)
    capacity = layer.density * layer.specific_heat * layer.thickness * wall.area
    return WallNodes(
        resistances=(resistance / 4.0, resistance / 2.0, resistance / 4.0),
        capacities=(capacity / 2.0, capacity / 2.0),
    )


@dataclass(frozen=True)
class WindowGains:
    beam_transmitted: float
    diffuse_transmitted: float


def window_transmission(
    glazing: Glazing, beam_incident: float, diffuse_incident: float, cos_i: float
) -> WindowGains:
    """Transmitted power (W); diffuse transmittance does not depend on incidence"""
    cos_i = min(max(cos_i, 0.0), 1.0)
    tau_beam = glazing.tau_beam_normal * (1.0 - (1.0 - cos_i) ** 4)
    return WindowGains(
        beam_transmitted=max(glazing.area * tau_beam * beam_incident, 0.0),
        diffuse_transmitted=max(glazing.area * glazing.tau_diffuse * diffuse_incident, 0.0),
    )


def distribute_solar_gains(
    areas: Sequence[float],
    absorptances: Sequence[float],
    beam_entering: float,
    diffuse_entering: float,
    floor_indices: Sequence[int],
) -> np.ndarray:
    """
    Shortwave absorbed by each inner surface (W)

    First bounce: beam on the floor surfaces (by area among them, or spread
    like diffuse when the zone has no floor), diffuse by area share. What is
    reflected is redistributed by area share; the series of bounces is summed
    in closed form, so the enclosure is lossless and the residual is zero.
    """
    areas = np.asarray(areas, dtype=float)
    alpha = np.asarray(absorptances, dtype=float)
    if areas.size == 0:
        raise SolarDistributionError("Solar distribution needs at least one surface")

    share = areas / areas.sum()
    incident = diffuse_entering * share
    floors = list(floor_indices)
    if floors:
        floor_area = areas[floors].sum()
        incident[floors] += beam_entering * areas[floors] / floor_area
    else:
        incident += beam_entering * share

    absorbed = alpha * incident
    reflected = float(((1.0 - alpha) * incident).sum())
    if reflected <= 0.0:
        return absorbed

    reflectance = float(((1.0 - alpha) * share).sum())
    if reflectance >= 1.0:
        raise SolarDistributionError(
            "No surface absorbs shortwave radiation (all absorptances are 0): enclosure does not converge"
        )
    absorbed += alpha * share * reflected / (1.0 - reflectance)
    return absorbed


# ============================================================================
# Indoor convection models
# ============================================================================

class SurfaceClass(str, enum.Enum):
    FLOOR_HEAT_UP = "floor_heat_up"
    CEILING_HEAT_DOWN = "ceiling_heat_down"
    VERTICAL = "vertical"


def classify_surface(tilt: float, delta_t: Optional[float] = None) -> SurfaceClass:
    """
    tilt is the inner-face normal; delta_t = T_surface - T_air

    Without delta_t the class follows the surface type. With it, the heat
    flow direction picks the correlation: a warm floor or a cool ceiling is
    buoyant (floor_heat_up), the reverse is stable (ceiling_heat_down).
    """
    if FLOOR_MAX_TILT <= tilt <= CEILING_MIN_TILT:
        return SurfaceClass.VERTICAL
    is_floor = tilt < FLOOR_MAX_TILT
    if delta_t is None:
        return SurfaceClass.FLOOR_HEAT_UP if is_floor else SurfaceClass.CEILING_HEAT_DOWN
    buoyant = delta_t > 0.0 if is_floor else delta_t < 0.0
    return SurfaceClass.FLOOR_HEAT_UP if buoyant else SurfaceClass.CEILING_HEAT_DOWN


def interior_h(model, surface_class: SurfaceClass, delta_t: float) -> float:
    if isinstance(model, ConstantConvection):
        return model.h
    if isinstance(model, PerSurfaceConvection):
        return {
            SurfaceClass.FLOOR_HEAT_UP: model.h_floor_up,
            SurfaceClass.CEILING_HEAT_DOWN: model.h_ceiling_down,
            SurfaceClass.VERTICAL: model.h_vertical,
        }[SurfaceClass(surface_class)]
    law = getattr(model, SurfaceClass(surface_class).value)
    return law.a * abs(delta_t) ** law.p


# ============================================================================
# Zone topology (static) and zone system (per assembly)
# ============================================================================

@dataclass(frozen=True)
class InnerSurface:
    index: int
    component: str
    area: float
    tilt: float
    absorptance: float
    emissivity: float


@dataclass(frozen=True)
class OuterFace:
    index: int
    component: str
    area: float
    orientation: SurfaceOrientation
    absorptance: float
    emissivity: float


@dataclass(frozen=True)
class ConnexLink:
    """Conductance from a local node to a node owned by a neighbouring zone"""
    index: int
    neighbour: str
    neighbour_node: NodeKey
    conductance: float


@dataclass(frozen=True)
class Aperture:
    """Glazing between the zone and the exterior"""
    glazing: Glazing
    orientation: SurfaceOrientation  # outward normal


@dataclass
class ZoneModel:
    """Node layout and time-invariant conductances of one zone"""
    zone: Zone
    node_index: Dict[NodeKey, int]
    labels: List[str]
    capacity: np.ndarray
    a_cond: np.ndarray
    ground_conductance: np.ndarray
    glazing_conductance: float
    a_lwi: np.ndarray
    surfaces: List[InnerSurface]
    outer_faces: List[OuterFace]
    connex: List[ConnexLink]
    apertures: List[Aperture]
    hvac: Optional[HvacSystem]
    hvac_distribution: np.ndarray

    @property
    def name(self) -> str:
        return self.zone.name

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def is_nonlinear(self) -> bool:
        return isinstance(self.zone.convection_model, NonlinearConvection)

    @property
    def floor_positions(self) -> List[int]:
        return [k for k, s in enumerate(self.surfaces) if s.tilt < FLOOR_MAX_TILT]


@dataclass
class ZoneSystem:
    zone: str
    node_index: Dict[NodeKey, int]
    labels: List[str]
    capacity: np.ndarray
    matrices: Dict[str, np.ndarray]
    vectors: Dict[str, np.ndarray]
    temperatures: np.ndarray
    hvac_distribution: Optional[np.ndarray] = None
    air_index: int = 0

    @property
    def C(self) -> np.ndarray:
        return np.diag(self.capacity)

    @property
    def A(self) -> np.ndarray:
        return sum(self.matrices.values(), np.zeros((len(self.labels), len(self.labels))))

    @property
    def B(self) -> np.ndarray:
        return sum(self.vectors.values(), np.zeros(len(self.labels)))

    def implicit_operator(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        """(C/dt - A, C/dt T_old + B)"""
        c_dt = self.capacity / dt
        return np.diag(c_dt) - self.A, c_dt * self.temperatures + self.B

    def residual(self, temperatures: np.ndarray) -> np.ndarray:
        return self.A @ temperatures + self.B


def build_zone_models(building: Building) -> Dict[str, ZoneModel]:
    """Static node layout for every zone, in declaration order"""
    return {zone.name: _build_zone_model(building, zone) for zone in building.zones}


def _build_zone_model(building: Building, zone: Zone) -> ZoneModel:
    keys: List[NodeKey] = [(zone.name, AIR)]
    capacities: List[float] = [zone.effective_air_capacity]
    conductances: List[Tuple[NodeKey, NodeKey, float]] = []
    ground: List[Tuple[NodeKey, float]] = []
    surfaces: List[Tuple[NodeKey, Wall, float, float, float]] = []
    outer: List[Tuple[NodeKey, Wall, SurfaceOrientation, float, float]] = []
    connex: List[Tuple[NodeKey, str, NodeKey, float]] = []
    apertures: List[Aperture] = []
    glazing_ua = 0.0
    hvac: Optional[HvacSystem] = None

    def add(key: NodeKey, capacity: float) -> NodeKey:
        keys.append(key)
        capacities.append(capacity)
        return key

    for interzone in building.interzones:
        if zone.name not in (interzone.side_a, interzone.side_b):
            continue
        on_side_a = interzone.side_a == zone.name
        other = interzone.other_side(zone.name)

        for component in interzone.components:
            if isinstance(component, Wall):
                nodes = discretize_wall(component)
                g_face, g_core, _ = nodes.conductances
                c1, c2 = nodes.capacities
                name = component.name
                # face X has its outward normal pointing into side X
                normal_b = component.orientation
                normal_a = normal_b.flipped()

                if other == EXTERIOR:
                    inner_role, inner_core = (FACE_A, CORE_A) if on_side_a else (FACE_B, CORE_B)
                    outer_role, outer_core = (FACE_B, CORE_B) if on_side_a else (FACE_A, CORE_A)
                    inner_normal, outer_normal = (normal_a, normal_b) if on_side_a else (normal_b, normal_a)
                    alpha_in, alpha_out = (
                        (component.absorptance_a, component.absorptance_b) if on_side_a
                        else (component.absorptance_b, component.absorptance_a)
                    )
                    eps_in, eps_out = (
                        (component.emissivity_a, component.emissivity_b) if on_side_a
                        else (component.emissivity_b, component.emissivity_a)
                    )
                    face_in = add((name, inner_role), 0.0)
                    core_in = add((name, inner_core), c1)
                    core_out = add((name, outer_core), c2)
                    conductances.append((face_in, core_in, g_face))
                    conductances.append((core_in, core_out, g_core))
                    surfaces.append((face_in, component, inner_normal.tilt, alpha_in, eps_in))
                    if component.ground_contact:
                        ground.append((core_out, g_face))
                    else:
                        face_out = add((name, outer_role), 0.0)
                        conductances.append((core_out, face_out, g_face))
                        outer.append((face_out, component, outer_normal, alpha_out, eps_out))
                elif on_side_a:
                    face = add((name, FACE_A), 0.0)
                    core = add((name, CORE_A), c1)
                    conductances.append((face, core, g_face))
                    surfaces.append((face, component, normal_a.tilt,
                                     component.absorptance_a, component.emissivity_a))
                    connex.append((core, other, (name, CORE_B), g_core))
                else:
                    face = add((name, FACE_B), 0.0)
                    core = add((name, CORE_B), c2)
                    conductances.append((face, core, g_face))
                    surfaces.append((face, component, normal_b.tilt,
                                     component.absorptance_b, component.emissivity_b))
                    connex.append((core, other, (name, CORE_A), g_core))

            elif isinstance(component, Glazing):
                ua = component.u_value * component.area
                if other == EXTERIOR:
                    glazing_ua += ua
                    outward = component.orientation if on_side_a else component.orientation.flipped()
                    apertures.append(Aperture(glazing=component, orientation=outward))
                else:
                    connex.append(((zone.name, AIR), other, (other, AIR), ua))

            elif isinstance(component, HvacSystem) and on_side_a:
                hvac = component

    index = {key: k for k, key in enumerate(keys)}
    n = len(keys)

    a_cond = np.zeros((n, n))
    for a, b, g in conductances:
        i, j = index[a], index[b]
        a_cond[i, i] -= g
        a_cond[j, j] -= g
        a_cond[i, j] += g
        a_cond[j, i] += g
    ground_conductance = np.zeros(n)
    for key, g in ground:
        ground_conductance[index[key]] += g

    inner = [
        InnerSurface(index[key], wall.name, wall.area, tilt, alpha, eps)
        for key, wall, tilt, alpha, eps in surfaces
    ]
    faces = [
        OuterFace(index[key], wall.name, wall.area, normal, alpha, eps)
        for key, wall, normal, alpha, eps in outer
    ]
    links = [ConnexLink(index[key], zone_name, node, g) for key, zone_name, node, g in connex]

    distribution = np.zeros(n)
    fraction = hvac.radiative_fraction if hvac is not None else 0.0
    distribution[0] = 1.0 - fraction if inner else 1.0
    total_area = sum(s.area for s in inner)
    for s in inner:
        distribution[s.index] += fraction * s.area / total_area

    return ZoneModel(
        zone=zone,
        node_index=index,
        labels=[f"{component}.{role}" for component, role in keys],
        capacity=np.array(capacities, dtype=float),
        a_cond=a_cond,
        ground_conductance=ground_conductance,
        glazing_conductance=glazing_ua,
        a_lwi=_interior_longwave(inner, n),
        surfaces=inner,
        outer_faces=faces,
        connex=links,
        apertures=apertures,
        hvac=hvac,
        hvac_distribution=distribution,
    )


def _interior_longwave(surfaces: List[InnerSurface], n: int) -> np.ndarray:
    """Linearized exchange with the area-weighted mean radiant node, eliminated"""
    a_lwi = np.zeros((n, n))
    if len(surfaces) < 2:
        return a_lwi
    g = np.array([linear_radiation_coefficient(s.emissivity) * s.area for s in surfaces])
    total = g.sum()
    if total <= 0.0:
        return a_lwi
    idx = [s.index for s in surfaces]
    a_lwi[np.ix_(idx, idx)] = np.outer(g, g) / total
    a_lwi[idx, idx] -= g
    return a_lwi


# ============================================================================
# Per-timestep boundary conditions and assembly
# ============================================================================

@dataclass
class ZoneBoundary:
    """Everything outside the zone's own nodes for one timestep"""
    hour: int
    outdoor_temperature: float
    sky_temperature: float  # degC
    exterior_h: float
    ground_temperature: float
    outer_irradiance: Dict[str, TiltedIrradiance] = field(default_factory=dict)
    beam_entering: float = 0.0
    diffuse_entering: float = 0.0
    internal_gain: float = 0.0
    internal_radiative_fraction: float = 0.0
    exterior_inflow: float = 0.0  # kg/s
    neighbour_inflows: Dict[str, float] = field(default_factory=dict)  # kg/s by upstream zone


Neighbours = Dict[str, Tuple[Dict[NodeKey, int], np.ndarray]]


def neighbour_values(model: ZoneModel, boundary: ZoneBoundary, neighbours: Neighbours) -> np.ndarray:
    """Neighbour temperatures consumed through A_connex / B_connex, in a stable order"""
    values = [
        neighbours[link.neighbour][1][neighbours[link.neighbour][0][link.neighbour_node]]
        for link in model.connex
    ]
    for upstream in sorted(boundary.neighbour_inflows):
        index, temperatures = neighbours[upstream]
        values.append(temperatures[index[(upstream, AIR)]])
    return np.array(values, dtype=float)


def assemble_zone(
    model: ZoneModel,
    boundary: ZoneBoundary,
    neighbours: Neighbours,
    temperatures: np.ndarray,
    linearization: Optional[np.ndarray] = None,
    hvac_power: float = 0.0,
) -> ZoneSystem:
    """
    Fill every elementary matrix and vector of one zone

    `temperatures` is the state at the start of the step; `linearization`
    is the current estimate used by the nonlinear convection model.
    """
    n = model.size
    air = 0
    estimate = temperatures if linearization is None else linearization
    mats = {name: np.zeros((n, n)) for name in MATRIX_TERMS}
    vecs = {name: np.zeros(n) for name in VECTOR_TERMS}

    mats["A_cond"] += model.a_cond
    mats["A_cond"][np.diag_indices(n)] -= model.ground_conductance
    vecs["B_cond"] += model.ground_conductance * boundary.ground_temperature
    mats["A_cond"][air, air] -= model.glazing_conductance
    vecs["B_cond"][air] += model.glazing_conductance * boundary.outdoor_temperature

    _fill_indoor_convection(model, estimate, mats["A_cvi_lin"])
    mats["A_lwi"] += model.a_lwi

    for face in model.outer_faces:
        i = face.index
        g_cv = boundary.exterior_h * face.area
        mats["A_cve"][i, i] -= g_cv
        vecs["B_cve"][i] += g_cv * boundary.outdoor_temperature

        g_lw = linear_radiation_coefficient(face.emissivity) * face.area
        f_sky = sky_view_factor(face.orientation)
        environment = f_sky * boundary.sky_temperature + (1.0 - f_sky) * boundary.outdoor_temperature
        mats["A_lwe"][i, i] -= g_lw
        vecs["B_lwe"][i] += g_lw * environment

        irradiance = boundary.outer_irradiance.get(face.component)
        if irradiance is not None:
            vecs["B_swe"][i] += face.absorptance * face.area * irradiance.total

    solar = boundary.beam_entering + boundary.diffuse_entering
    if model.surfaces:
        if solar > 0.0:
            absorbed = distribute_solar_gains(
                [s.area for s in model.surfaces],
                [s.absorptance for s in model.surfaces],
                boundary.beam_entering,
                boundary.diffuse_entering,
                model.floor_positions,
            )
            for s, q in zip(model.surfaces, absorbed):
                vecs["B_swi"][s.index] += q
    else:
        vecs["B_swi"][air] += solar

    radiative = boundary.internal_gain * boundary.internal_radiative_fraction if model.surfaces else 0.0
    vecs["B_int_load"][air] += boundary.internal_gain - radiative
    total_area = sum(s.area for s in model.surfaces)
    for s in model.surfaces:
        vecs["B_int_load"][s.index] += radiative * s.area / total_area

    g_air = boundary.exterior_inflow * AIR_SPECIFIC_HEAT
    mats["A_airflow"][air, air] -= g_air
    vecs["B_airflow"][air] += g_air * boundary.outdoor_temperature

    for link in model.connex:
        index, values = neighbours[link.neighbour]
        mats["A_connex"][link.index, link.index] -= link.conductance
        vecs["B_connex"][link.index] += link.conductance * values[index[link.neighbour_node]]
    for upstream, mdot in sorted(boundary.neighbour_inflows.items()):
        index, values = neighbours[upstream]
        g = mdot * AIR_SPECIFIC_HEAT
        mats["A_connex"][air, air] -= g
        vecs["B_connex"][air] += g * values[index[(upstream, AIR)]]

    if hvac_power:
        vecs["B_hvac"] += model.hvac_distribution * hvac_power

    return ZoneSystem(
        zone=model.name,
        node_index=model.node_index,
        labels=model.labels,
        capacity=model.capacity,
        matrices=mats,
        vectors=vecs,
        temperatures=np.array(temperatures, dtype=float),
        hvac_distribution=model.hvac_distribution,
    )


def _fill_indoor_convection(model: ZoneModel, estimate: np.ndarray, a_cvi: np.ndarray):
    convection = model.zone.convection_model
    nonlinear = isinstance(convection, NonlinearConvection)
    air = 0
    for s in model.surfaces:
        i = s.index
        if nonlinear:
            # h frozen at the current estimate; B_cvi_nlin stays zero
            delta = float(estimate[i] - estimate[air])
            surface_class = classify_surface(s.tilt, delta)
            g = interior_h(convection, surface_class, max(abs(delta), LINEARIZATION_FLOOR)) * s.area
        else:
            g = interior_h(convection, classify_surface(s.tilt), 0.0) * s.area

        a_cvi[i, i] -= g
        a_cvi[air, air] -= g
        a_cvi[i, air] += g
        a_cvi[air, i] += g


# ============================================================================
# Solving
# ============================================================================

def step_implicit(system: ZoneSystem, dt: float) -> np.ndarray:
    """Solve (C/dt - A) T_new = C/dt T_old + B"""
    matrix, rhs = system.implicit_operator(dt)
    return solve_linear(matrix, rhs, system.labels)


def solve_linear(matrix: np.ndarray, rhs: np.ndarray, labels: Sequence[str]) -> np.ndarray:
    empty_rows = np.where(~matrix.any(axis=1))[0]
    if empty_rows.size:
        node = labels[empty_rows[0]]
        raise SingularSystemError(f"Node '{node}' has no capacity and no connection", node=node)
    try:
        return np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"Singular zone system: {e}")


@dataclass
class ZoneSolution:
    temperatures: np.ndarray
    iterations: int
    hvac: Optional[hvac_control.HvacOutput]
    system: ZoneSystem
    consumed: np.ndarray


def solve_zone(
    model: ZoneModel,
    boundary: ZoneBoundary,
    neighbours: Neighbours,
    previous: np.ndarray,
    estimate: np.ndarray,
    dt: float,
    criterion: float,
    max_iterations: int,
) -> ZoneSolution:
    """One zone, one connection sweep: nonlinear zones iterate, others solve once"""
    if model.is_nonlinear:
        return iterate_nonlinear_convection(
            model, boundary, neighbours, previous, estimate, dt, criterion, max_iterations
        )
    system = assemble_zone(model, boundary, neighbours, previous)
    temperatures, output = _solve_with_control(model, system, boundary.hour, dt)
    return ZoneSolution(temperatures, 1, output, system, neighbour_values(model, boundary, neighbours))


def iterate_nonlinear_convection(
    model: ZoneModel,
    boundary: ZoneBoundary,
    neighbours: Neighbours,
    previous: np.ndarray,
    estimate: np.ndarray,
    dt: float,
    criterion: float,
    max_iterations: int,
) -> ZoneSolution:
    """
    Re-linearize the indoor convection at the current estimate and re-solve
    the full zone system until the air temperature moves less than `criterion`

    The inner surface temperatures are held to the same criterion: under HVAC
    control the air node is pinned to its setpoint while the surfaces that
    set the convection coefficients are still moving.
    """
    if criterion <= 0.0:
        raise ValueError("convergence criterion must be positive")
    history: List[float] = []
    estimate = np.array(estimate, dtype=float)
    watched = [0] + [s.index for s in model.surfaces]
    for iteration in range(1, max_iterations + 1):
        system = assemble_zone(model, boundary, neighbours, previous, linearization=estimate)
        temperatures, output = _solve_with_control(model, system, boundary.hour, dt)
        change = float(np.max(np.abs(temperatures[watched] - estimate[watched])))
        history.append(change)
        estimate = temperatures
        if change < criterion:
            return ZoneSolution(
                temperatures, iteration, output, system, neighbour_values(model, boundary, neighbours)
            )
    raise ConvergenceError(
        f"Indoor convection in zone '{model.name}' did not converge in {max_iterations} iterations",
        history,
    )


def _solve_with_control(model: ZoneModel, system: ZoneSystem, hour: int, dt: float):
    if model.hvac is None:
        return step_implicit(system, dt), None
    output, temperatures = hvac_control.hvac_response(system, model.hvac, hour, dt)
    system.vectors["B_hvac"] = model.hvac_distribution * output.total
    return temperatures, output


@dataclass
class CouplingResult:
    states: Dict[str, np.ndarray]
    solutions: Dict[str, ZoneSolution]
    sweeps: int
    first_sweep_iterations: Dict[str, int]
    solve_seconds: Dict[str, float]
    solve_counts: Dict[str, int]


def couple_zones(
    models: Dict[str, ZoneModel],
    boundaries: Dict[str, ZoneBoundary],
    previous: Dict[str, np.ndarray],
    dt: float,
    criterion: float,
    max_sweeps: int,
    convection_criterion: float,
    max_convection_iterations: int,
) -> CouplingResult:
    """
    Gauss-Seidel connection process in declaration order

    Each zone is solved with the latest temperatures of its neighbours. The
    process stops when no neighbour value a zone consumed has moved by more
    than `criterion` since that zone was solved.
    """
    if criterion <= 0.0:
        raise ValueError("coupling criterion must be positive")
    estimates = {name: np.array(previous[name], dtype=float) for name in models}
    solutions: Dict[str, ZoneSolution] = {}
    first_sweep: Dict[str, int] = {}
    seconds = {name: 0.0 for name in models}
    counts = {name: 0 for name in models}
    history: List[float] = []

    def snapshot() -> Neighbours:
        return {name: (models[name].node_index, estimates[name]) for name in models}

    for sweep in range(1, max_sweeps + 1):
        for name, model in models.items():
            start = time.perf_counter()
            solution = solve_zone(
                model, boundaries[name], snapshot(), previous[name], estimates[name],
                dt, convection_criterion, max_convection_iterations,
            )
            seconds[name] += time.perf_counter() - start
            counts[name] += solution.iterations
            estimates[name] = solution.temperatures
            solutions[name] = solution
            if sweep == 1:
                first_sweep[name] = solution.iterations

        latest = snapshot()
        drift = 0.0
        for name, model in models.items():
            consumed = solutions[name].consumed
            if consumed.size:
                now = neighbour_values(model, boundaries[name], latest)
                drift = max(drift, float(np.max(np.abs(now - consumed))))
        history.append(drift)
        if drift < criterion:
            logger.debug(f"Zone coupling converged in {sweep} sweep(s)")
            return CouplingResult(estimates, solutions, sweep, first_sweep, seconds, counts)

    raise ConvergenceError(f"Zone coupling did not converge in {max_sweeps} sweeps", history)


def initial_state(model: ZoneModel) -> np.ndarray:
    return np.full(model.size, model.zone.initial_temperature, dtype=float)


def kelvin_to_celsius(value: float) -> float:
    return value - KELVIN
