"""
Tests for building parsing, validation, description and project files
"""
import json

import pytest

from conftest import one_zone_document, wall
from app.core.exceptions import BuildingValidationError, ConfigurationError
from app.models.building import EXTERIOR, Glazing, HvacSystem, NonlinearConvection
from app.services.building_loader import (
    describe_building,
    load_building,
    load_project,
    parse_building,
    serialize_building,
    validate_building,
)


def diagnostics_for(document):
    with pytest.raises(BuildingValidationError) as excinfo:
        parse_building(document)
    return excinfo.value.diagnostics


class TestCaseStudy:
    def test_counts(self, case_study):
        assert case_study.zone_names == ["ground_floor", "east_floor", "west_floor"]
        assert len(case_study.interzones) == 16
        assert len(list(case_study.components())) == 22
        assert validate_building(case_study) == []

    def test_west_floor_is_air_conditioned(self, case_study):
        ((interzone, hvac),) = list(case_study.components(HvacSystem))
        assert interzone.side_a == "west_floor"
        assert hvac.cooling_power_max == 2000.0
        assert hvac.setpoint_high == 20.0

    def test_glazing_east_and_west(self, case_study):
        azimuths = sorted(g.azimuth_deg for _, g in case_study.components(Glazing))
        assert azimuths == [90.0, 270.0]

    def test_serialize_round_trip(self, case_study):
        assert parse_building(serialize_building(case_study)) == case_study

    def test_load_keyword(self, case_study):
        assert load_building("case_study") == case_study


class TestValidation:
    def test_dangling_zone_reference(self):
        document = one_zone_document()
        document["interzones"][0]["side_b"] = "attic"
        (diagnostic,) = diagnostics_for(document)
        assert diagnostic.path == "interzones[facade_n].side_b"
        assert "references unknown zone" in diagnostic.message

    def test_every_problem_reported(self):
        document = one_zone_document()
        document["zones"][0]["volume"] = -1.0
        document["interzones"][1]["components"][0]["area"] = 0.0
        paths = [d.path for d in diagnostics_for(document)]
        assert paths == ["interzones[facade_e].components[wall_e].area", "zones[room].volume"]

    def test_schema_error_located_by_name(self):
        document = one_zone_document()
        del document["interzones"][2]["components"][0]["layer"]
        (diagnostic,) = diagnostics_for(document)
        assert diagnostic.path == "interzones[facade_s].components[wall_s].layer"

    def test_malformed_json(self):
        (diagnostic,) = diagnostics_for('{"zones": [')
        assert "malformed JSON" in diagnostic.message

    def test_not_an_object(self):
        diagnostics_for("[1, 2]")

    def test_exponent_range(self):
        document = one_zone_document(
            convection_model={"model": "nonlinear", "vertical": {"a": 1.31, "p": 1.5}}
        )
        (diagnostic,) = diagnostics_for(document)
        assert diagnostic.path == "zones[room].convection_model.vertical.p"

    def test_shorthand_convection(self):
        building = parse_building(one_zone_document("nonlinear"))
        assert isinstance(building.zone("room").convection_model, NonlinearConvection)

    def test_ground_contact_needs_exterior(self):
        document = one_zone_document()
        document["zones"].append({"name": "cellar", "volume": 10.0})
        document["interzones"].append({
            "name": "cellar_floor", "side_a": "room", "side_b": "cellar",
            "components": [wall("buried", tilt=180.0, ground_contact=True)],
        })
        (diagnostic,) = diagnostics_for(document)
        assert diagnostic.path == "interzones[cellar_floor].components[buried]"

    def test_pressure_network_needs_openings(self):
        document = one_zone_document()
        document["models"] = {"airflow_model": "pressure_network"}
        (diagnostic,) = diagnostics_for(document)
        assert diagnostic.path == "zones[room]"
        assert "not connected" in diagnostic.message

    def test_one_hvac_per_zone(self):
        document = one_zone_document()
        for k in range(2):
            document["interzones"][k]["components"].append({"type": "hvac", "name": f"ac{k}"})
        paths = [d.path for d in diagnostics_for(document)]
        assert paths == ["interzones[facade_e].components[ac1]"]

    def test_reserved_exterior_name(self):
        document = one_zone_document()
        document["zones"].append({"name": EXTERIOR, "volume": 5.0})
        assert any("reserved" in d.message for d in diagnostics_for(document))


class TestDescribe:
    def test_summary(self, case_study):
        summary = describe_building(case_study)
        assert summary["zones"] == 3
        assert summary["components_by_type"] == {"fixed_flow": 3, "glazing": 2, "hvac": 1, "wall": 16}
        assert summary["zone_convection"]["west_floor"] == "constant_h"
        assert summary["diagnostics"] == []


class TestProjectFile:
    def test_relative_paths(self, tmp_path):
        (tmp_path / "house.json").write_text(json.dumps(one_zone_document()))
        (tmp_path / "project.json").write_text(json.dumps({
            "building": "house.json",
            "weather": "weather/site.csv",
            "results": "out",
            "period": {"start": "2024-01-15T00:00:00", "end": "2024-01-16T00:00:00"},
            "timestep": 1800,
            "solver": {"convection_criterion": 0.01},
            "label": "trial",
        }))
        project = load_project(tmp_path / "project.json")
        assert project.building.zone_names == ["room"]
        assert project.weather_path == tmp_path / "weather" / "site.csv"
        assert project.result_path == tmp_path / "out"
        assert project.timestep == 1800
        assert project.solver_options.convection_criterion == 0.01
        assert project.label == "trial"

    def test_defaults_to_case_study(self, tmp_path, case_study):
        (tmp_path / "project.json").write_text("{}")
        project = load_project(tmp_path / "project.json")
        assert project.building == case_study
        assert project.weather_path is None

    def test_unreadable_project(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_project(tmp_path / "missing.json")

    def test_invalid_solver_options(self, tmp_path):
        (tmp_path / "project.json").write_text(json.dumps({"solver": {"unknown_option": 1}}))
        with pytest.raises(ConfigurationError):
            load_project(tmp_path / "project.json")
