"""
Simulation errors - typed failures surfaced to the CLI and the HTTP routes

Exit codes follow the command-line contract:
- 2: the input (building, weather, options) is invalid
- 3: a numerical procedure failed to converge or was singular
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3


@dataclass(frozen=True, order=True)
class Diagnostic:
    """One validation finding, located by entity path (zone/interzone/component)"""
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ZoneSimError(Exception):
    """Base class for every error raised by the simulation engine"""
    exit_code = 1


class ConfigurationError(ZoneSimError):
    """Unknown model selection or inconsistent option values"""
    exit_code = EXIT_VALIDATION


class BuildingValidationError(ZoneSimError):
    """Building document or object violates the schema or an invariant"""
    exit_code = EXIT_VALIDATION

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics: List[Diagnostic] = sorted(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"Invalid building ({len(self.diagnostics)} problem(s)): {lines}")


class WeatherLoadError(ZoneSimError):
    """Weather file cannot be ingested"""
    exit_code = EXIT_VALIDATION

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}{message}")


class SimulationError(ZoneSimError):
    """Base class for numerical failures"""
    exit_code = EXIT_CONVERGENCE


class ConvergenceError(SimulationError):
    """Iteration cap exceeded"""

    def __init__(self, message: str, history: Optional[Sequence[float]] = None):
        self.history = list(history or [])
        super().__init__(message)


class SingularSystemError(SimulationError):
    """Linear system cannot be solved; `node` names the offending unknown"""

    def __init__(self, message: str, node: Optional[str] = None):
        self.node = node
        super().__init__(message)


class SolarDistributionError(SimulationError):
    """Enclosure where no surface absorbs shortwave radiation"""
