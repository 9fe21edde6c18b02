"""
Tests for the command line entry point
"""
import json

import pandas as pd

from conftest import one_zone_document
from app.cli import main


def write_project(tmp_path, document, **extra):
    (tmp_path / "building.json").write_text(json.dumps(document))
    project = {"building": "building.json", "weather": "weather.csv", "results": "out",
               "solver": {"warmup_days": 0}, "label": "cli"}
    project.update(extra)
    path = tmp_path / "project.json"
    path.write_text(json.dumps(project))
    return path


class TestWeatherCommand:
    def test_synth_writes_file(self, tmp_path):
        out = tmp_path / "weather.csv"
        assert main(["weather", "synth", "--days", "sunny,cloudy", "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert len(frame) == 48
        assert list(frame.columns) == ["timestamp", "gh", "dh", "tdb", "w", "wind_speed", "wind_dir"]

    def test_unknown_day_is_invalid_input(self, tmp_path):
        assert main(["weather", "synth", "--days", "foggy", "--out", str(tmp_path / "w.csv")]) == 2


class TestSimulateCommand:
    def test_simulate(self, tmp_path, capsys):
        project = write_project(tmp_path, one_zone_document())
        main(["weather", "synth", "--days", "sunny", "--out", str(tmp_path / "weather.csv")])
        assert main(["simulate", "--project", str(project)]) == 0
        frame = pd.read_csv(tmp_path / "out" / "cli.csv")
        assert len(frame) == 24
        timing = json.loads((tmp_path / "out" / "cli_timing.json").read_text())
        assert timing["case"] == "cli"
        assert "written to" in capsys.readouterr().out

    def test_period_and_case(self, tmp_path):
        project = write_project(tmp_path, one_zone_document())
        main(["weather", "synth", "--days", "sunny", "--out", str(tmp_path / "weather.csv")])
        code = main([
            "simulate", "--project", str(project),
            "--period", "2024-01-15T06:00:00", "2024-01-15T18:00:00",
            "--timestep", "1800", "--case", "N=room:nonlinear", "--out", str(tmp_path / "runs"),
        ])
        assert code == 0
        assert len(pd.read_csv(tmp_path / "runs" / "N.csv")) == 24

    def test_invalid_building(self, tmp_path, capsys):
        document = one_zone_document()
        document["interzones"][0]["side_b"] = "attic"
        project = write_project(tmp_path, document)
        assert main(["simulate", "--project", str(project)]) == 2
        assert "references unknown zone" in capsys.readouterr().err

    def test_missing_weather_file(self, tmp_path):
        project = write_project(tmp_path, one_zone_document())
        assert main(["simulate", "--project", str(project)]) == 2

    def test_convergence_failure(self, tmp_path, capsys):
        project = write_project(
            tmp_path, one_zone_document("nonlinear"), solver={"warmup_days": 0, "max_convection_iterations": 1}
        )
        main(["weather", "synth", "--days", "sunny", "--out", str(tmp_path / "weather.csv")])
        assert main(["simulate", "--project", str(project)]) == 3
        assert "did not converge" in capsys.readouterr().err


class TestDescribeCommand:
    def test_case_study(self, capsys):
        assert main(["describe", "--project", "case_study"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["zones"] == 3
