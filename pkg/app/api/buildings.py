"""
Buildings API - case study, validation and summary of building documents
"""
import json
import logging
from typing import Any, Dict, List

from fastapi import APIRouter, HTTPException, status
from pydantic import BaseModel, Field

from app.core.exceptions import BuildingValidationError
from app.services.building_loader import (
    case_study_building,
    describe_building,
    parse_building,
    serialize_building,
)

logger = logging.getLogger(__name__)

router = APIRouter()


class DiagnosticOut(BaseModel):
    path: str
    message: str


class ValidationResponse(BaseModel):
    valid: bool
    diagnostics: List[DiagnosticOut] = Field(default_factory=list)


@router.get("/case-study")
async def get_case_study() -> Dict[str, Any]:
    """The bundled three-zone building, as a building document"""
    return json.loads(serialize_building(case_study_building()))


@router.post("/validate", response_model=ValidationResponse)
async def validate(document: Dict[str, Any]):
    """
    Validate a building document

    Invalid documents are not an HTTP error here: every problem is listed.
    """
    try:
        parse_building(document)
    except BuildingValidationError as e:
        return ValidationResponse(
            valid=False,
            diagnostics=[DiagnosticOut(path=d.path, message=d.message) for d in e.diagnostics],
        )
    return ValidationResponse(valid=True)


@router.post("/describe")
async def describe(document: Dict[str, Any]) -> Dict[str, Any]:
    try:
        building = parse_building(document)
    except BuildingValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=[{"path": d.path, "message": d.message} for d in e.diagnostics],
        )
    return describe_building(building)
