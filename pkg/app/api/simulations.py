"""
Simulations API - synthetic weather, simulation runs and convection-model comparison
"""
import json
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional, Union

import pandas as pd
from fastapi import APIRouter, HTTPException, status
from pydantic import BaseModel, Field

from app.core.exceptions import SimulationError, ZoneSimError
from app.models.building import Building, Project, SolverOptions
from app.models.weather import WeatherSeries
from app.services.building_loader import case_study_building, parse_building
from app.services.engine import apply_case, compare_cases, run_simulation, with_sizing
from app.services.weather import SYNTHETIC_START, synthetic_weather, weather_from_frame

logger = logging.getLogger(__name__)

router = APIRouter()


# Pydantic schemas
class SyntheticWeatherRequest(BaseModel):
    days: List[str] = Field(default_factory=lambda: ["cloudy", "sunny"], description="Sequence of 'cloudy' / 'sunny'")
    start: datetime = Field(default=SYNTHETIC_START, description="Midnight of the first day")


class SimulationRequest(BaseModel):
    """Run a building (default: the bundled case study) against posted or synthetic weather"""
    building: Optional[Dict[str, Any]] = None
    weather: Optional[List[Dict[str, Any]]] = Field(None, description="Rows with timestamp,gh,dh,tdb,w,wind_speed,wind_dir")
    days: List[str] = Field(default_factory=lambda: ["cloudy", "sunny"])
    timestep: int = Field(default=3600, gt=0)
    sizing: bool = False
    case: Optional[Dict[str, str]] = Field(None, description="zone -> convection model")
    solver: Optional[Dict[str, Any]] = None
    label: str = "run"


class ComparisonRequest(BaseModel):
    building: Optional[Dict[str, Any]] = None
    weather: Optional[List[Dict[str, Any]]] = None
    days: List[str] = Field(default_factory=lambda: ["cloudy", "sunny"])
    timestep: int = Field(default=3600, gt=0)
    sizing: bool = False
    cases: Union[List[str], Dict[str, Dict[str, str]]] = Field(default_factory=lambda: ["A", "B", "C"])
    reference: Optional[str] = "B"
    solver: Optional[Dict[str, Any]] = None


def _rows(series: WeatherSeries) -> List[Dict[str, Any]]:
    frame = series.to_frame()
    frame["timestamp"] = frame["timestamp"].dt.strftime("%Y-%m-%dT%H:%M:%S")
    return json.loads(frame.to_json(orient="records"))


def _building(document: Optional[Dict[str, Any]], sizing: bool) -> Building:
    building = parse_building(document) if document is not None else case_study_building()
    return with_sizing(building) if sizing else building


def _weather(rows: Optional[List[Dict[str, Any]]], days: List[str]) -> WeatherSeries:
    if rows is not None:
        return weather_from_frame(pd.DataFrame(rows))
    return synthetic_weather(days)


def _project(building: Building, request, label: str) -> Project:
    solver = SolverOptions.model_validate(request.solver) if request.solver else SolverOptions()
    return Project(building=building, timestep=request.timestep, solver_options=solver, label=label)


def _http_error(e: Exception) -> HTTPException:
    if isinstance(e, SimulationError):
        return HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(e))
    detail: Any = str(e)
    diagnostics = getattr(e, "diagnostics", None)
    if diagnostics:
        detail = [{"path": d.path, "message": d.message} for d in diagnostics]
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=detail)


@router.post("/weather/synthetic")
async def create_synthetic_weather(request: SyntheticWeatherRequest):
    try:
        series = synthetic_weather(request.days, request.start)
    except ZoneSimError as e:
        raise _http_error(e)
    return {"rows": _rows(series)}


@router.post("/simulations")
def simulate(request: SimulationRequest):
    """
    Run one simulation

    Returns the result rows (one per timestep) and the timing report.
    """
    try:
        building = _building(request.building, request.sizing)
        if request.case:
            building = apply_case(building, request.case)
        project = _project(building, request, request.label)
        result, timing = run_simulation(project, _weather(request.weather, request.days))
    except (ZoneSimError, ValueError) as e:
        logger.warning(f"Simulation request failed: {e}")
        raise _http_error(e)

    rows = json.loads(result.frame.to_json(orient="records"))
    return {
        "label": result.label,
        "columns": list(result.frame.columns),
        "rows": rows,
        "timing": timing.to_dict(),
    }


@router.post("/simulations/compare")
def compare(request: ComparisonRequest):
    try:
        building = _building(request.building, request.sizing)
        project = _project(building, request, "compare")
        report = compare_cases(project, request.cases, request.reference, _weather(request.weather, request.days))
    except (ZoneSimError, ValueError) as e:
        logger.warning(f"Comparison request failed: {e}")
        raise _http_error(e)

    body = report.to_dict()
    body["table"] = report.to_text()
    return body
