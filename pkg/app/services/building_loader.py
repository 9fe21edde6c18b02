"""
Building Loader - parse, validate and serialize building description files

A building file is a UTF-8 JSON document with top-level keys `site`, `models`,
`zones` and `interzones`; components are nested inside their interzone.
Validation never raises on bad content: every problem becomes a Diagnostic
located by entity path, e.g. `interzones[iz_west].components[ac_west].area`.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

from pydantic import ValidationError

from app.core.exceptions import BuildingValidationError, ConfigurationError, Diagnostic
from app.models.building import (
    EXTERIOR,
    AirflowModel,
    Building,
    ConstantConvection,
    FixedFlow,
    Glazing,
    HvacSystem,
    Interzone,
    NonlinearConvection,
    Opening,
    PerSurfaceConvection,
    Period,
    Project,
    SolverOptions,
    Wall,
    Zone,
)
from app.services.airflow import reached_from_exterior

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
CASE_STUDY_FILE = DATA_DIR / "case_study.json"
CASE_STUDY_KEYWORD = "case_study"

HOURS_PER_DAY = 24
MAX_SPECIFIC_HUMIDITY = 0.05


def parse_building(document: Union[str, bytes, Dict[str, Any]]) -> Building:
    """
    Parse and validate a building document

    Raises BuildingValidationError with every located problem when the document
    is malformed, violates the schema or breaks a building invariant.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise BuildingValidationError([Diagnostic("$", f"malformed JSON: {e}")])

    if not isinstance(document, dict):
        raise BuildingValidationError([Diagnostic("$", "building document must be a JSON object")])

    try:
        building = Building.model_validate(document)
    except ValidationError as e:
        raise BuildingValidationError([
            Diagnostic(_locate(document, error["loc"]), error["msg"]) for error in e.errors()
        ])

    diagnostics = validate_building(building)
    if diagnostics:
        raise BuildingValidationError(diagnostics)
    return building


def load_building(path: Union[str, Path]) -> Building:
    path = Path(path)
    if str(path) == CASE_STUDY_KEYWORD:
        return case_study_building()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read building file {path}: {e}")
    return parse_building(text)


def serialize_building(building: Building) -> str:
    return json.dumps(building.model_dump(mode="json"), indent=2)


def case_study_building() -> Building:
    """Bundled three-zone cube (ground floor, eastern and western first floor)"""
    return parse_building(CASE_STUDY_FILE.read_text(encoding="utf-8"))


# ============================================================================
# Validation
# ============================================================================

def validate_building(b: Building) -> List[Diagnostic]:
    """Every invariant violation, ordered by entity path"""
    found: List[Diagnostic] = []

    def check(condition: bool, path: str, message: str):
        if not condition:
            found.append(Diagnostic(path, message))

    site = b.site
    check(-90.0 <= site.latitude_deg <= 90.0, "site.latitude_deg", "latitude must be within [-90, 90]")
    check(0.0 <= site.albedo <= 1.0, "site.albedo", "albedo must be within [0, 1]")

    check(len(b.zones) >= 1, "zones", "a building needs at least one zone")
    zone_names = set()
    for zone in b.zones:
        path = f"zones[{zone.name}]"
        check(zone.name not in zone_names, path, "duplicate zone name")
        check(zone.name != EXTERIOR, path, f"'{EXTERIOR}' is reserved for the outdoor side")
        zone_names.add(zone.name)
        _validate_zone(zone, path, check)

    interzone_names = set()
    component_names = set()
    hvac_zones = set()
    for interzone in b.interzones:
        path = f"interzones[{interzone.name}]"
        check(interzone.name not in interzone_names, path, "duplicate interzone name")
        interzone_names.add(interzone.name)
        for side in ("side_a", "side_b"):
            value = getattr(interzone, side)
            check(
                value == EXTERIOR or value in zone_names,
                f"{path}.{side}",
                f"references unknown zone '{value}'",
            )
        check(interzone.side_a != interzone.side_b, path, "side_a and side_b must differ")
        check(len(interzone.components) >= 1, path, "an interzone needs at least one component")

        for component in interzone.components:
            cpath = f"{path}.components[{component.name}]"
            check(component.name not in component_names, cpath, "duplicate component name")
            component_names.add(component.name)
            _validate_component(component, interzone, cpath, check)
            if isinstance(component, HvacSystem):
                check(interzone.side_a not in hvac_zones, cpath, "a zone holds at most one HVAC system")
                hvac_zones.add(interzone.side_a)

    if b.models.airflow_model is AirflowModel.PRESSURE_NETWORK:
        reached = reached_from_exterior((iz.side_a, iz.side_b) for iz, _ in b.components(Opening))
        for zone in b.zones:
            check(
                zone.name in reached,
                f"zones[{zone.name}]",
                "not connected to the exterior through openings (pressure_network model)",
            )

    return sorted(found)


def _validate_zone(zone: Zone, path: str, check) -> None:
    check(zone.volume > 0.0, f"{path}.volume", "volume must be positive")
    if zone.air_capacity is not None:
        check(zone.air_capacity > 0.0, f"{path}.air_capacity", "air capacity must be positive")
    gains = zone.internal_gains
    check(0.0 <= gains.radiative_fraction <= 1.0, f"{path}.internal_gains.radiative_fraction",
          "radiative fraction must be within [0, 1]")
    check(len(gains.hourly_w) == HOURS_PER_DAY, f"{path}.internal_gains.hourly_w",
          "schedule needs 24 hourly values")
    check(len(zone.moisture_gains) == HOURS_PER_DAY, f"{path}.moisture_gains",
          "schedule needs 24 hourly values")
    check(all(g >= 0.0 for g in zone.moisture_gains), f"{path}.moisture_gains",
          "moisture gains must be non-negative")
    check(0.0 <= zone.initial_humidity <= MAX_SPECIFIC_HUMIDITY, f"{path}.initial_humidity",
          "specific humidity must be within [0, 0.05]")

    model = zone.convection_model
    mpath = f"{path}.convection_model"
    if isinstance(model, ConstantConvection):
        check(model.h > 0.0, mpath, "coefficient must be positive")
    elif isinstance(model, PerSurfaceConvection):
        check(min(model.h_floor_up, model.h_ceiling_down, model.h_vertical) > 0.0, mpath,
              "coefficients must be positive")
    elif isinstance(model, NonlinearConvection):
        for label in ("vertical", "floor_heat_up", "ceiling_heat_down"):
            law = getattr(model, label)
            check(law.a > 0.0, f"{mpath}.{label}.a", "coefficient must be positive")
            check(0.0 < law.p < 1.0, f"{mpath}.{label}.p", "exponent must be within (0, 1)")


def _validate_component(component, interzone: Interzone, path: str, check) -> None:
    sides = (interzone.side_a, interzone.side_b)
    if isinstance(component, Wall):
        check(component.area > 0.0, f"{path}.area", "area must be positive")
        layer = component.layer
        check(layer.thickness > 0.0, f"{path}.layer.thickness", "thickness must be positive")
        check(layer.conductivity > 0.0, f"{path}.layer.conductivity", "conductivity must be positive")
        check(layer.density >= 0.0, f"{path}.layer.density", "density must be non-negative")
        check(layer.specific_heat >= 0.0, f"{path}.layer.specific_heat",
              "specific heat must be non-negative")
        for label in ("absorptance_a", "absorptance_b", "emissivity_a", "emissivity_b"):
            value = getattr(component, label)
            check(0.0 <= value <= 1.0, f"{path}.{label}", "must be within [0, 1]")
        check(0.0 <= component.tilt_deg <= 180.0, f"{path}.tilt_deg", "tilt must be within [0, 180]")
        if component.ground_contact:
            check(EXTERIOR in sides, path, "ground contact requires the exterior on one side")
    elif isinstance(component, Glazing):
        check(component.area > 0.0, f"{path}.area", "area must be positive")
        check(0.0 <= component.tau_beam_normal <= 1.0, f"{path}.tau_beam_normal", "must be within [0, 1]")
        check(0.0 <= component.tau_diffuse <= 1.0, f"{path}.tau_diffuse", "must be within [0, 1]")
        check(component.u_value > 0.0, f"{path}.u_value", "U-value must be positive")
        check(0.0 <= component.tilt_deg <= 180.0, f"{path}.tilt_deg", "tilt must be within [0, 180]")
    elif isinstance(component, Opening):
        check(component.flow_coefficient > 0.0, f"{path}.flow_coefficient", "coefficient must be positive")
        check(0.5 <= component.flow_exponent <= 1.0, f"{path}.flow_exponent",
              "exponent must be within [0.5, 1]")
        large = component.large_opening
        if large is not None:
            check(large.height > 0.0 and large.width > 0.0, f"{path}.large_opening",
                  "height and width must be positive")
            check(0.0 < large.discharge_coefficient <= 1.0, f"{path}.large_opening.discharge_coefficient",
                  "discharge coefficient must be within (0, 1]")
    elif isinstance(component, HvacSystem):
        check(interzone.side_a != EXTERIOR, path, "an HVAC system serves the zone on side_a")
        check(component.setpoint_low <= component.setpoint_high, f"{path}.setpoint_low",
              "low setpoint must not exceed high setpoint")
        check(component.heating_power_max >= 0.0 and component.cooling_power_max >= 0.0, path,
              "powers must be non-negative")
        check(0.0 <= component.radiative_fraction <= 1.0, f"{path}.radiative_fraction",
              "radiative fraction must be within [0, 1]")
        check(len(component.schedule) == HOURS_PER_DAY, f"{path}.schedule", "schedule needs 24 hourly flags")
        check(component.latent_capacity >= 0.0, f"{path}.latent_capacity", "latent capacity must be non-negative")
    elif isinstance(component, FixedFlow):
        check(component.mass_flow >= 0.0, f"{path}.mass_flow", "mass flow must be non-negative")
        check(len(component.schedule) == HOURS_PER_DAY, f"{path}.schedule", "schedule needs 24 hourly values")
        check(all(v >= 0.0 for v in component.schedule), f"{path}.schedule", "schedule values must be non-negative")


def _locate(document: Any, loc: Sequence[Any]) -> str:
    """Render a pydantic error location with entity names where they exist"""
    parts: List[str] = []
    node = document
    for position, key in enumerate(loc):
        last = position == len(loc) - 1
        if isinstance(key, int):
            name = None
            if isinstance(node, list) and 0 <= key < len(node) and isinstance(node[key], dict):
                name = node[key].get("name")
            parts.append(f"[{name if name is not None else key}]")
            node = node[key] if isinstance(node, list) and 0 <= key < len(node) else None
        else:
            if isinstance(node, dict) and key in node:
                node = node[key]
                parts.append(f".{key}" if parts else str(key))
            elif last:
                parts.append(f".{key}" if parts else str(key))
            # other keys are discriminator tags ("wall", "nonlinear", ...), not document keys
    return "".join(parts) or "$"


# ============================================================================
# Description and project files
# ============================================================================

def describe_building(b: Building) -> Dict[str, Any]:
    counts: Dict[str, int] = {}
    for _, component in b.components():
        counts[component.type] = counts.get(component.type, 0) + 1
    return {
        "name": b.name,
        "zones": len(b.zones),
        "interzones": len(b.interzones),
        "components": sum(counts.values()),
        "components_by_type": dict(sorted(counts.items())),
        "models": b.models.model_dump(mode="json"),
        "zone_convection": {zone.name: zone.convection_model.model for zone in b.zones},
        "diagnostics": [str(d) for d in validate_building(b)],
    }


def load_project(path: Union[str, Path]) -> Project:
    """
    Read a project file

    {"building": "building.json" | "case_study" | {...}, "weather": "weather.csv",
     "results": "out", "period": {"start": ..., "end": ...}, "timestep": 3600,
     "solver": {...}, "label": "B"}
    Relative paths are resolved against the project file directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot read project file {path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigurationError(f"Project file {path} must hold a JSON object")

    base = path.parent
    building_ref = raw.get("building", CASE_STUDY_KEYWORD)
    if isinstance(building_ref, dict):
        building = parse_building(building_ref)
    elif building_ref == CASE_STUDY_KEYWORD:
        building = case_study_building()
    else:
        building = load_building(base / building_ref)

    fields: Dict[str, Any] = {"building": building}
    if raw.get("weather"):
        fields["weather_path"] = base / raw["weather"]
    if raw.get("results"):
        fields["result_path"] = base / raw["results"]
    if raw.get("timestep") is not None:
        fields["timestep"] = raw["timestep"]
    if raw.get("label"):
        fields["label"] = raw["label"]
    try:
        if raw.get("period"):
            fields["period"] = Period.model_validate(raw["period"])
        if raw.get("solver"):
            fields["solver_options"] = SolverOptions.model_validate(raw["solver"])
        return Project(**fields)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid project file {path}: {e}")
