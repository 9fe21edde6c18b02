#!/usr/bin/env python3
"""
Run convection cases A, B and C on the bundled three-zone building
Usage: python scripts/reproduce_case_study.py [--sizing] [out_dir]

A: constant indoor convection everywhere
B: nonlinear convection in every zone (reference)
C: nonlinear convection only in the air-conditioned west floor
Weather: one synthetic cloudy day followed by a sunny one.
"""

import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.models.building import Project
from app.services.building_loader import case_study_building
from app.services.engine import compare_cases, with_sizing
from app.services.results_writer import write_results
from app.services.weather import synthetic_weather


def reproduce(sizing: bool, out_dir: Path = None):
    building = case_study_building()
    if sizing:
        building = with_sizing(building)
    project = Project(building=building, label="case_study")
    report = compare_cases(project, ["A", "B", "C"], reference="B", weather=synthetic_weather(["cloudy", "sunny"]), repeats=3)

    print(report.to_text())
    for label, timing in report.timings.items():
        west = timing.zone("west_floor")
        print(f"   - {label}: west_floor iterations per step {west.iteration_summary()}")

    if out_dir is not None:
        for label, result in report.results.items():
            csv_path, _ = write_results(result, report.timings[label], out_dir)
            print(f"✅ {label} written to {csv_path}")
    return report


if __name__ == "__main__":
    args = [a for a in sys.argv[1:] if a != "--sizing"]
    reproduce("--sizing" in sys.argv[1:], Path(args[0]) if args else None)
