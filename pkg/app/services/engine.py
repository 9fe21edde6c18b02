"""
Simulation Engine - timestep loop, convection-model cases and comparison

Per timestep:
1. sun position and tilted irradiance on every exterior face and window
2. airflow (prescribed rates or pressure network, previous-step temperatures)
3. zone solves with their convection model and HVAC, coupled by Gauss-Seidel
   sweeps (optionally followed by one airflow re-solve and re-coupling)
4. building-wide moisture balance
5. record
"""
import logging
import time
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import BuildingValidationError, ConfigurationError, SimulationError
from app.models.building import (
    AirflowModel,
    Building,
    ExteriorConvectionModel,
    FixedFlow,
    HvacSystem,
    Opening,
    Project,
    SolverOptions,
)
from app.models.results import (
    CaseSummary,
    ComparisonReport,
    SimulationResult,
    TimingReport,
    ZoneTiming,
    link_column,
    surface_column,
    zone_column,
)
from app.models.weather import WeatherRecord, WeatherSeries
from app.services import airflow, moisture, thermal
from app.services.building_loader import validate_building
from app.services.solar import (
    KELVIN,
    IrradianceSample,
    incidence_cosine,
    sky_temperature,
    solar_position,
    tilted_irradiance,
)
from app.services.weather import load_weather, synthetic_weather

logger = logging.getLogger(__name__)

CONSTANT_EXTERIOR_H = 16.7  # W/m2K
WIND_H_BASE = 5.7
WIND_H_SLOPE = 3.8
SECONDS_PER_HOUR = 3600

CONVECTION_MODELS = ("constant_h", "per_surface_h", "nonlinear")


def exterior_h(model: ExteriorConvectionModel, wind_speed: float) -> float:
    if model == ExteriorConvectionModel.WIND:
        return WIND_H_BASE + WIND_H_SLOPE * max(wind_speed, 0.0)
    return CONSTANT_EXTERIOR_H


@dataclass
class StepOutcome:
    timestamp: datetime
    coupling: thermal.CouplingResult
    humidity: Dict[str, float]
    link_flows: Dict[str, float]
    surfaces: Dict[str, Tuple[float, float]]


class SimulationEngine:
    """Holds the zone models and the running state of one building"""

    def __init__(
        self,
        building: Building,
        weather: WeatherSeries,
        timestep: int = SECONDS_PER_HOUR,
        options: Optional[SolverOptions] = None,
        label: str = "run",
    ):
        if timestep <= 0 or SECONDS_PER_HOUR % timestep:
            raise ConfigurationError(f"Timestep {timestep} s must be positive and divide 3600 s")
        if len(weather) == 0:
            raise ConfigurationError("Weather series is empty")
        self.building = building
        self.weather = weather
        self.timestep = timestep
        self.options = options or SolverOptions()
        self.label = label

        self.models = thermal.build_zone_models(building)
        self.network = (
            airflow.build_network(building)
            if building.models.airflow_model == AirflowModel.PRESSURE_NETWORK
            else None
        )
        self.ground_temperature = weather.annual_mean_temperature()
        self.link_ids = [c.name for _, c in building.components(FixedFlow)]
        if self.network is not None:
            self.link_ids += [c.name for _, c in building.components(Opening)]
        self.surface_ids = [
            c.name for _, c in building.components()
            if not isinstance(c, (Opening, FixedFlow, HvacSystem))
        ]
        self.reset()

    def reset(self):
        self.state = {name: thermal.initial_state(model) for name, model in self.models.items()}
        self.humidity = {zone.name: zone.initial_humidity for zone in self.building.zones}
        self._new_timing()

    def _new_timing(self):
        self.timing = TimingReport(case=self.label, zones=[ZoneTiming(name) for name in self.models])

    @property
    def columns(self) -> List[str]:
        columns = ["timestamp"]
        for zone in self.models:
            columns += [zone_column(zone, q) for q in ("tair", "w", "p_hvac", "clamped")]
        columns += [link_column(link) for link in self.link_ids]
        if self.options.verbose_surfaces:
            for component in self.surface_ids:
                columns += [surface_column(component, "incident"), surface_column(component, "absorbed")]
        return columns

    # ========================================================================
    # Run
    # ========================================================================

    def run(self, start: Optional[datetime] = None, end: Optional[datetime] = None) -> Tuple[SimulationResult, TimingReport]:
        records = self.weather if start is None and end is None else self.weather.between(
            start or self.weather.start, end or self.weather.end + timedelta(hours=1)
        )
        records = records.records
        logger.info(
            f"Simulation '{self.label}': {len(records)} hour(s), timestep {self.timestep} s, "
            f"{len(self.models)} zone(s)"
        )

        first_day = records[:24]
        for _ in range(self.options.warmup_days):
            for record in first_day:
                self.advance(record)
        if first_day and self.options.warmup_days:
            logger.info(f"Warm-up done ({self.options.warmup_days} day(s))")
        self._new_timing()

        rows = []
        started = time.perf_counter()
        for record in records:
            for outcome in self.advance(record):
                rows.append(self._row(outcome))
        self.timing.wall_s = time.perf_counter() - started

        frame = pd.DataFrame(rows, columns=self.columns)
        logger.info(f"Simulation '{self.label}' finished in {self.timing.wall_s:.2f} s")
        return SimulationResult(self.label, frame, list(self.models), list(self.link_ids)), self.timing

    def advance(self, record: WeatherRecord) -> List[StepOutcome]:
        """All sub-hourly steps of one weather hour"""
        outcomes = []
        for k in range(SECONDS_PER_HOUR // self.timestep):
            timestamp = record.timestamp + timedelta(seconds=k * self.timestep)
            try:
                outcomes.append(self.step(record, timestamp))
            except SimulationError as e:
                e.args = (f"{timestamp.isoformat()}: {e}",) + e.args[1:]
                raise
        return outcomes

    def step(self, record: WeatherRecord, timestamp: datetime) -> StepOutcome:
        building = self.building
        hour = timestamp.hour
        site = building.site
        sun = solar_position(timestamp, site.latitude, site.longitude, site.utc_offset_hours)
        sample = IrradianceSample(record.gh, record.dh)
        diffuse_model = building.models.diffuse_model

        # solar on exterior faces and through windows
        surfaces: Dict[str, Tuple[float, float]] = {}
        boundaries: Dict[str, thermal.ZoneBoundary] = {}
        t_sky = sky_temperature(record.tdb, building.models.sky_temperature) - KELVIN
        h_e = exterior_h(building.models.exterior_convection, record.wind_speed)

        flows = airflow.gross_fixed_flows(building, hour)
        link_flows = {
            c.name: c.mass_flow * c.schedule[hour % 24] for _, c in building.components(FixedFlow)
        }
        if self.network is not None:
            link_flows.update(self._solve_airflow(record, flows))
            flows = flows + self.network.directed_flows()
        inflows = airflow.zone_inflows(flows, self.models)

        for name, model in self.models.items():
            zone = model.zone
            outer = {}
            for face in model.outer_faces:
                irradiance = tilted_irradiance(sample, sun, face.orientation, diffuse_model, site.albedo)
                outer[face.component] = irradiance
                surfaces[face.component] = (irradiance.total * face.area, face.absorptance * face.area * irradiance.total)
            beam = diffuse = 0.0
            for aperture in model.apertures:
                irradiance = tilted_irradiance(sample, sun, aperture.orientation, diffuse_model, site.albedo)
                gains = thermal.window_transmission(
                    aperture.glazing, irradiance.beam, irradiance.diffuse, incidence_cosine(sun, aperture.orientation)
                )
                beam += gains.beam_transmitted
                diffuse += gains.diffuse_transmitted
                surfaces[aperture.glazing.name] = (
                    irradiance.total * aperture.glazing.area, gains.beam_transmitted + gains.diffuse_transmitted
                )
            boundaries[name] = thermal.ZoneBoundary(
                hour=hour,
                outdoor_temperature=record.tdb,
                sky_temperature=t_sky,
                exterior_h=h_e,
                ground_temperature=self.ground_temperature,
                outer_irradiance=outer,
                beam_entering=beam,
                diffuse_entering=diffuse,
                internal_gain=zone.internal_gains.hourly_w[hour],
                internal_radiative_fraction=zone.internal_gains.radiative_fraction,
                exterior_inflow=inflows[name].exterior,
                neighbour_inflows=dict(inflows[name].neighbours),
            )

        coupling = self._couple(boundaries)
        if self.network is not None and self.options.airflow_outer_iteration:
            air = {name: float(t[0]) for name, t in coupling.states.items()}
            link_flows.update(self._solve_airflow(record, airflow.gross_fixed_flows(building, hour), air))
            flows = airflow.gross_fixed_flows(building, hour) + self.network.directed_flows()
            inflows = airflow.zone_inflows(flows, self.models)
            for name, boundary in boundaries.items():
                boundary.exterior_inflow = inflows[name].exterior
                boundary.neighbour_inflows = dict(inflows[name].neighbours)
            coupling = self._couple(boundaries)

        humidity = moisture.solve_moisture_balance(
            building, self.humidity, inflows, record.w, hour, self.timestep
        )

        self.state = coupling.states
        self.humidity = humidity.humidity
        for timing in self.timing.zones:
            timing.solve_s += coupling.solve_seconds[timing.name]
            timing.solves += coupling.solve_counts[timing.name]
            timing.iterations.append(coupling.first_sweep_iterations[timing.name])
        self.timing.sweeps.append(coupling.sweeps)
        logger.debug(f"{timestamp.isoformat()}: {coupling.sweeps} sweep(s)")

        if self.options.verbose_surfaces:
            for name, solution in coupling.solutions.items():
                absorbed_inside = solution.system.vectors["B_swi"]
                for surface in self.models[name].surfaces:
                    incident, absorbed = surfaces.get(surface.component, (0.0, 0.0))
                    surfaces[surface.component] = (incident, absorbed + float(absorbed_inside[surface.index]))

        return StepOutcome(timestamp, coupling, humidity.humidity, link_flows, surfaces)

    def _couple(self, boundaries: Dict[str, thermal.ZoneBoundary]) -> thermal.CouplingResult:
        o = self.options
        return thermal.couple_zones(
            self.models, boundaries, self.state, self.timestep,
            o.coupling_criterion, o.max_coupling_sweeps,
            o.convection_criterion, o.max_convection_iterations,
        )

    def _solve_airflow(
        self, record: WeatherRecord, fixed: Sequence[airflow.DirectedFlow], air: Optional[Mapping[str, float]] = None
    ) -> Dict[str, float]:
        if air is None:
            air = {name: float(t[0]) for name, t in self.state.items()}
        airflow.solve_pressure_network(
            self.network, air, record.tdb, record.wind_speed, record.wind_dir, fixed,
            tolerance=self.options.airflow_tolerance,
            max_iterations=self.options.max_airflow_iterations,
        )
        return {link: result.mass_flow for link, result in self.network.flows.items()}

    def _row(self, outcome: StepOutcome) -> dict:
        row = {"timestamp": outcome.timestamp.isoformat()}
        for name, solution in outcome.coupling.solutions.items():
            output = solution.hvac
            row[zone_column(name, "tair")] = float(solution.temperatures[0])
            row[zone_column(name, "w")] = outcome.humidity[name]
            row[zone_column(name, "p_hvac")] = output.total if output else 0.0
            row[zone_column(name, "clamped")] = bool(output.clamped) if output else False
        for link in self.link_ids:
            row[link_column(link)] = outcome.link_flows.get(link, 0.0)
        if self.options.verbose_surfaces:
            for component in self.surface_ids:
                incident, absorbed = outcome.surfaces.get(component, (0.0, 0.0))
                row[surface_column(component, "incident")] = incident
                row[surface_column(component, "absorbed")] = absorbed
        return row


# ============================================================================
# Project entry points
# ============================================================================

def project_weather(project: Project) -> WeatherSeries:
    if project.weather_path is None:
        return synthetic_weather()
    return load_weather(project.weather_path)


def run_simulation(
    project: Project, weather: Optional[WeatherSeries] = None
) -> Tuple[SimulationResult, TimingReport]:
    diagnostics = validate_building(project.building)
    if diagnostics:
        raise BuildingValidationError(diagnostics)
    weather = weather if weather is not None else project_weather(project)
    start = end = None
    if project.period is not None:
        start, end = project.period.start, project.period.end
        if not weather.covers(start, end):
            raise ConfigurationError(
                f"Weather {weather.start} - {weather.end} does not cover the period {start} - {end}"
            )
    engine = SimulationEngine(
        project.building, weather, project.timestep, project.solver_options, project.label
    )
    return engine.run(start, end)


def controlled_zones(building: Building) -> List[str]:
    return [interzone.side_a for interzone, _ in building.components(HvacSystem)]


def standard_cases(building: Building) -> Dict[str, Dict[str, str]]:
    """
    A: constant coefficient everywhere
    B: nonlinear everywhere
    C: nonlinear only in the HVAC-controlled zone(s)
    """
    focus = set(controlled_zones(building)) or {building.zone_names[0]}
    names = building.zone_names
    return {
        "A": {zone: "constant_h" for zone in names},
        "B": {zone: "nonlinear" for zone in names},
        "C": {zone: "nonlinear" if zone in focus else "constant_h" for zone in names},
    }


def parse_case(text: str) -> Tuple[str, Dict[str, str]]:
    """'C=west_floor:nonlinear,east_floor:constant_h' -> ('C', {...})"""
    if "=" not in text:
        raise ConfigurationError(f"Case '{text}' must look like LABEL=zone:model,...")
    label, body = text.split("=", 1)
    assignments: Dict[str, str] = {}
    for item in filter(None, body.split(",")):
        if ":" not in item:
            raise ConfigurationError(f"Case item '{item}' must look like zone:model")
        zone, model = item.split(":", 1)
        assignments[zone.strip()] = model.strip()
    return label.strip(), assignments


def apply_case(building: Building, assignments: Mapping[str, str]) -> Building:
    """Copy of the building with the given per-zone convection models"""
    unknown = set(assignments) - set(building.zone_names)
    if unknown:
        raise ConfigurationError(f"Case assigns unknown zone(s): {', '.join(sorted(unknown))}")
    bad = {m for m in assignments.values() if m not in CONVECTION_MODELS}
    if bad:
        raise ConfigurationError(
            f"Unknown convection model(s) {', '.join(sorted(bad))} (expected one of: {', '.join(CONVECTION_MODELS)})"
        )
    document = building.model_dump(mode="json")
    for zone in document["zones"]:
        if zone["name"] in assignments:
            zone["convection_model"] = {"model": assignments[zone["name"]]}
    return Building.model_validate(document)


def with_sizing(building: Building, enabled: bool = True) -> Building:
    document = building.model_dump(mode="json")
    for interzone in document["interzones"]:
        for component in interzone["components"]:
            if component["type"] == "hvac":
                component["sizing_mode"] = enabled
    return Building.model_validate(document)


def compare_cases(
    project: Project,
    cases: Union[Mapping[str, Mapping[str, str]], Sequence[str]],
    reference: Optional[str] = None,
    weather: Optional[WeatherSeries] = None,
    repeats: int = 1,
) -> ComparisonReport:
    """
    Run every case on identical inputs and compare with the reference case

    `cases` maps labels to {zone: convection model}; a list of labels picks
    from the standard A/B/C cases. Time ratios compare the zone assemble+solve
    time (`solve_s`); with `repeats` > 1 each case keeps its fastest run.
    """
    if repeats < 1:
        raise ConfigurationError(f"repeats must be at least 1, got {repeats}")
    if not isinstance(cases, Mapping):
        standard = standard_cases(project.building)
        missing = [label for label in cases if label not in standard]
        if missing:
            raise ConfigurationError(f"Unknown case(s) {', '.join(missing)} (standard cases: A, B, C)")
        cases = {label: standard[label] for label in cases}
    if len(cases) < 2:
        raise ConfigurationError("Comparison needs at least two cases")
    reference = reference or next(iter(cases))
    if reference not in cases:
        raise ConfigurationError(f"Reference case '{reference}' is not among the cases")

    weather = weather if weather is not None else project_weather(project)
    results: Dict[str, SimulationResult] = {}
    timings: Dict[str, TimingReport] = {}
    for label, assignments in cases.items():
        case_project = project.model_copy(update={
            "building": apply_case(project.building, assignments),
            "label": label,
        })
        for _ in range(repeats):
            result, timing = run_simulation(case_project, weather)
            if label not in timings or timing.solve_s < timings[label].solve_s:
                results[label], timings[label] = result, timing
        logger.info(f"Case {label}: {timings[label].wall_s:.2f} s, {timings[label].solves} solve(s)")

    focus = controlled_zones(project.building) or project.building.zone_names
    ref_result, ref_timing = results[reference], timings[reference]
    summaries: Dict[str, CaseSummary] = {}
    for label, result in results.items():
        d_t = max((_max_abs(result.series(z), ref_result.series(z)) for z in focus), default=0.0)
        d_p = max(
            (_max_abs(result.series(z, "p_hvac"), ref_result.series(z, "p_hvac")) for z in focus),
            default=0.0,
        )
        timing = timings[label]
        iterations = [n for z in timing.zones if z.name in focus for n in z.iterations]
        summaries[label] = CaseSummary(
            label=label,
            models=dict(cases[label]),
            max_temperature_error=d_t,
            max_power_error=d_p,
            wall_s=timing.wall_s,
            solve_s=timing.solve_s,
            time_ratio=timing.solve_s / ref_timing.solve_s if ref_timing.solve_s > 0 else 1.0,
            solves=timing.solves,
            solve_ratio=timing.solves / ref_timing.solves if ref_timing.solves else 1.0,
            median_iterations=float(np.median(iterations)) if iterations else 0.0,
        )
    return ComparisonReport(reference, list(focus), summaries, results, timings)


def _max_abs(a: pd.Series, b: pd.Series) -> float:
    values = (a.astype(float) - b.astype(float)).abs().to_numpy()
    return float(values.max()) if values.size else 0.0
