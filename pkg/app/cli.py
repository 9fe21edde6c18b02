#!/usr/bin/env python3
"""
ZoneSim command line

    python -m app.cli simulate --project project.json [--period START END] [--timestep S]
                               [--sizing] [--case LABEL=zone:model,...] [--out DIR]
    python -m app.cli compare  --project project.json --cases A,B,C --reference B [--repeats N] [--out DIR]
    python -m app.cli weather synth --days cloudy,sunny --out weather.csv
    python -m app.cli describe --project project.json

`--project case_study` runs the bundled building against synthetic weather.
Exit codes: 0 success, 2 invalid input, 3 convergence failure.
"""
import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from app.core.config import settings
from app.core.exceptions import BuildingValidationError, ZoneSimError
from app.models.building import Period, Project
from app.services.building_loader import (
    CASE_STUDY_KEYWORD,
    case_study_building,
    describe_building,
    load_project,
)
from app.services.engine import apply_case, compare_cases, parse_case, run_simulation, with_sizing
from app.services.results_writer import write_results
from app.services.weather import SYNTHETIC_START, synthetic_weather, write_weather

logger = logging.getLogger("zonesim")


def _project(argument: str) -> Project:
    if argument == CASE_STUDY_KEYWORD:
        return Project(building=case_study_building(), label="case_study")
    return load_project(argument)


def _timestamp(value: str) -> datetime:
    try:
        return datetime.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO timestamp: {value}")


def cmd_simulate(args) -> int:
    project = _project(args.project)
    building = project.building
    if args.sizing:
        building = with_sizing(building)
    label = project.label
    if args.case:
        label, assignments = parse_case(args.case)
        building = apply_case(building, assignments)
    update = {"building": building, "label": label}
    if args.period:
        update["period"] = Period(start=args.period[0], end=args.period[1])
    if args.timestep:
        update["timestep"] = args.timestep
    project = project.model_copy(update=update)

    result, timing = run_simulation(project)
    out = Path(args.out) if args.out else project.result_path
    csv_path, json_path = write_results(result, timing, out)
    print(f"{len(result)} step(s) written to {csv_path} (timing: {json_path})")
    return 0


def cmd_compare(args) -> int:
    project = _project(args.project)
    if args.sizing:
        project = project.model_copy(update={"building": with_sizing(project.building)})
    labels = [label.strip() for label in args.cases.split(",") if label.strip()]
    report = compare_cases(project, labels, args.reference, repeats=args.repeats)
    print(report.to_text())
    if args.out:
        out = Path(args.out)
        for label, result in report.results.items():
            write_results(result, report.timings[label], out)
        (out / "comparison.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_weather(args) -> int:
    days = [d.strip() for d in args.days.split(",") if d.strip()]
    series = synthetic_weather(days, args.start)
    path = write_weather(series, args.out)
    print(f"{len(series)} hour(s) written to {path}")
    return 0


def cmd_describe(args) -> int:
    project = _project(args.project)
    summary = describe_building(project.building)
    print(json.dumps(summary, indent=2))
    return 0 if not summary["diagnostics"] else BuildingValidationError.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zonesim", description="Multizone building simulation")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level (default: %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Run one project")
    simulate.add_argument("--project", required=True, help="Project file, or 'case_study'")
    simulate.add_argument("--period", nargs=2, type=_timestamp, metavar=("START", "END"))
    simulate.add_argument("--timestep", type=int, help="Seconds, must divide 3600")
    simulate.add_argument("--sizing", action="store_true", help="Infinite HVAC power")
    simulate.add_argument("--case", help="LABEL=zone:model,... convection model per zone")
    simulate.add_argument("--out", help="Output directory")
    simulate.set_defaults(func=cmd_simulate)

    compare = sub.add_parser("compare", help="Compare convection-model cases")
    compare.add_argument("--project", required=True, help="Project file, or 'case_study'")
    compare.add_argument("--cases", default="A,B,C", help="Comma-separated standard cases (default: %(default)s)")
    compare.add_argument("--reference", default="B", help="Reference case (default: %(default)s)")
    compare.add_argument("--sizing", action="store_true")
    compare.add_argument("--repeats", type=int, default=1, help="Runs per case, fastest kept (default: %(default)s)")
    compare.add_argument("--out", help="Output directory")
    compare.set_defaults(func=cmd_compare)

    weather = sub.add_parser("weather", help="Weather utilities")
    weather_sub = weather.add_subparsers(dest="weather_command", required=True)
    synth = weather_sub.add_parser("synth", help="Write a synthetic weather file")
    synth.add_argument("--days", default="cloudy,sunny", help="Comma-separated day kinds (default: %(default)s)")
    synth.add_argument("--start", type=_timestamp, default=SYNTHETIC_START)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_weather)

    describe = sub.add_parser("describe", help="Validation report and model summary")
    describe.add_argument("--project", required=True, help="Project file, or 'case_study'")
    describe.set_defaults(func=cmd_describe)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())
    try:
        return args.func(args)
    except BuildingValidationError as e:
        for diagnostic in e.diagnostics:
            print(f"error: {diagnostic}", file=sys.stderr)
        return e.exit_code
    except ZoneSimError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
