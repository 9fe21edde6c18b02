"""
Building Schemas - Project / Building / Zone / Interzone / Component tree

Schemas only check structure and types. Physical invariants (positive areas,
exponent ranges, dangling references, network connectivity) are reported by
`validate_building` as located diagnostics so that a bad document never
crashes and every problem is reported at once.

Angles are stored in degrees, as in the building file; properties expose radians.
"""
import enum
import math
from datetime import datetime
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator

from app.core.config import settings
from app.services.solar import DiffuseModel, SkyTemperatureModel, SurfaceOrientation

EXTERIOR = "EXTERIOR"

AIR_DENSITY = 1.2  # kg/m3
AIR_SPECIFIC_HEAT = 1006.0  # J/kgK


class ExteriorConvectionModel(str, enum.Enum):
    """Outside surface convection"""
    CONSTANT = "constant"  # 16.7 W/m2K
    WIND = "wind"  # 5.7 + 3.8 V


class AirflowModel(str, enum.Enum):
    FIXED_RATES = "fixed_rates"
    PRESSURE_NETWORK = "pressure_network"


class ConductionModel(str, enum.Enum):
    R2C = "R2C"


class _Frozen(BaseModel):
    class Config:
        frozen = True
        extra = "forbid"


# ============================================================================
# Building-level selections
# ============================================================================

class Site(_Frozen):
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0
    albedo: float = 0.2
    utc_offset_hours: float = 0.0

    @property
    def latitude(self) -> float:
        return math.radians(self.latitude_deg)

    @property
    def longitude(self) -> float:
        return math.radians(self.longitude_deg)


class BuildingModels(_Frozen):
    exterior_convection: ExteriorConvectionModel = ExteriorConvectionModel.CONSTANT
    diffuse_model: DiffuseModel = DiffuseModel.ISOTROPIC
    sky_temperature: SkyTemperatureModel = SkyTemperatureModel.OFFSET
    airflow_model: AirflowModel = AirflowModel.FIXED_RATES


# ============================================================================
# Zone and its indoor convection model
# ============================================================================

class PowerLawCoefficient(_Frozen):
    """h = a * |dT|^p"""
    a: float
    p: float


class ConstantConvection(_Frozen):
    model: Literal["constant_h"] = "constant_h"
    h: float = 5.0


class PerSurfaceConvection(_Frozen):
    model: Literal["per_surface_h"] = "per_surface_h"
    h_floor_up: float = 4.04
    h_ceiling_down: float = 0.95
    h_vertical: float = 3.08


class NonlinearConvection(_Frozen):
    model: Literal["nonlinear"] = "nonlinear"
    vertical: PowerLawCoefficient = PowerLawCoefficient(a=1.31, p=1.0 / 3.0)
    floor_heat_up: PowerLawCoefficient = PowerLawCoefficient(a=1.52, p=1.0 / 3.0)
    ceiling_heat_down: PowerLawCoefficient = PowerLawCoefficient(a=0.59, p=0.25)


ConvectionModel = Annotated[
    Union[ConstantConvection, PerSurfaceConvection, NonlinearConvection],
    Field(discriminator="model"),
]


class InternalGains(_Frozen):
    hourly_w: List[float] = Field(default_factory=lambda: [0.0] * 24)
    radiative_fraction: float = 0.0


class Zone(_Frozen):
    name: str
    volume: float
    air_capacity: Optional[float] = None
    convection_model: ConvectionModel = ConstantConvection()
    internal_gains: InternalGains = InternalGains()
    moisture_gains: List[float] = Field(default_factory=lambda: [0.0] * 24)  # kg/s per hour
    initial_temperature: float = 20.0
    initial_humidity: float = 0.01
    reference_height: float = 0.0

    @field_validator("convection_model", mode="before")
    @classmethod
    def _shorthand_model(cls, value):
        # "nonlinear" is accepted for {"model": "nonlinear"}
        if isinstance(value, str):
            return {"model": value}
        return value

    @property
    def effective_air_capacity(self) -> float:
        if self.air_capacity is not None:
            return self.air_capacity
        return AIR_DENSITY * AIR_SPECIFIC_HEAT * self.volume

    @property
    def air_mass(self) -> float:
        return AIR_DENSITY * self.volume


# ============================================================================
# Components
# ============================================================================

class Layer(_Frozen):
    thickness: float
    conductivity: float
    density: float
    specific_heat: float


class Wall(_Frozen):
    """
    Opaque wall, single layer, R2C conduction

    tilt/azimuth give the outward normal of face B (the face in side_b).
    """
    type: Literal["wall"] = "wall"
    name: str
    area: float
    layer: Layer
    conduction_model: ConductionModel = ConductionModel.R2C
    tilt_deg: float = 90.0
    azimuth_deg: float = 0.0
    absorptance_a: float = 0.6
    absorptance_b: float = 0.6
    emissivity_a: float = 0.9
    emissivity_b: float = 0.9
    ground_contact: bool = False

    @property
    def orientation(self) -> SurfaceOrientation:
        return SurfaceOrientation(math.radians(self.tilt_deg), math.radians(self.azimuth_deg))


class Glazing(_Frozen):
    type: Literal["glazing"] = "glazing"
    name: str
    area: float
    tau_beam_normal: float = 0.85
    tau_diffuse: float = 0.75
    u_value: float = 5.8
    tilt_deg: float = 90.0
    azimuth_deg: float = 0.0

    @property
    def orientation(self) -> SurfaceOrientation:
        return SurfaceOrientation(math.radians(self.tilt_deg), math.radians(self.azimuth_deg))


class LargeOpening(_Frozen):
    height: float
    width: float
    discharge_coefficient: float = 0.61


class Opening(_Frozen):
    """
    Airflow path between side_a and side_b

    `height` is the centre of the opening above the side_a zone floor.
    `azimuth_deg` is the facade normal used for wind pressure when one side
    is the exterior (None: no wind exposure).
    """
    type: Literal["opening"] = "opening"
    name: str
    flow_coefficient: float = 0.01  # kg/(s.Pa^n)
    flow_exponent: float = 0.65
    height: float = 1.0
    azimuth_deg: Optional[float] = None
    large_opening: Optional[LargeOpening] = None


class HvacSystem(_Frozen):
    type: Literal["hvac"] = "hvac"
    name: str
    setpoint_low: float = 18.0
    setpoint_high: float = 26.0
    schedule: List[bool] = Field(default_factory=lambda: [True] * 24)
    heating_power_max: float = 0.0
    cooling_power_max: float = 0.0
    radiative_fraction: float = 0.0
    latent_capacity: float = 0.0  # kg/s
    humidity_setpoint: Optional[float] = None  # kg/kg
    sizing_mode: bool = False


class FixedFlow(_Frozen):
    """Prescribed mass flow from side_a to side_b, scaled by an hourly schedule"""
    type: Literal["fixed_flow"] = "fixed_flow"
    name: str
    mass_flow: float
    schedule: List[float] = Field(default_factory=lambda: [1.0] * 24)
    balanced: bool = False  # an equal flow returns from side_b to side_a


Component = Annotated[
    Union[Wall, Glazing, Opening, HvacSystem, FixedFlow],
    Field(discriminator="type"),
]


class Interzone(_Frozen):
    name: str
    side_a: str
    side_b: str
    components: List[Component] = Field(default_factory=list)
    description: Optional[str] = None

    def other_side(self, zone: str) -> str:
        return self.side_b if zone == self.side_a else self.side_a


class Building(_Frozen):
    name: str = "building"
    site: Site
    models: BuildingModels = BuildingModels()
    zones: List[Zone]
    interzones: List[Interzone] = Field(default_factory=list)

    @property
    def zone_names(self) -> List[str]:
        return [zone.name for zone in self.zones]

    def zone(self, name: str) -> Zone:
        for zone in self.zones:
            if zone.name == name:
                return zone
        raise KeyError(name)

    def components(self, kind=None):
        """(interzone, component) pairs in declaration order, optionally filtered by class"""
        for interzone in self.interzones:
            for component in interzone.components:
                if kind is None or isinstance(component, kind):
                    yield interzone, component


# ============================================================================
# Project
# ============================================================================

class SolverOptions(_Frozen):
    coupling_criterion: float = settings.COUPLING_CRITERION
    convection_criterion: float = settings.CONVECTION_CRITERION
    max_convection_iterations: int = settings.MAX_CONVECTION_ITERATIONS
    max_coupling_sweeps: int = settings.MAX_COUPLING_SWEEPS
    airflow_tolerance: float = settings.AIRFLOW_TOLERANCE
    max_airflow_iterations: int = settings.MAX_AIRFLOW_ITERATIONS
    airflow_outer_iteration: bool = settings.AIRFLOW_OUTER_ITERATION
    warmup_days: int = settings.WARMUP_DAYS
    verbose_surfaces: bool = False


class Period(_Frozen):
    start: datetime
    end: datetime


class Project(_Frozen):
    """Weather input + building + result location, as run by the engine"""
    building: Building
    weather_path: Optional[Path] = None
    result_path: Path = Path(settings.RESULTS_DIR)
    period: Optional[Period] = None
    timestep: int = settings.DEFAULT_TIMESTEP
    solver_options: SolverOptions = SolverOptions()
    label: str = "run"
