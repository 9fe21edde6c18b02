from pydantic_settings import BaseSettings
from typing import List


class Settings(BaseSettings):
    PROJECT_NAME: str = "ZoneSim"
    VERSION: str = "1.0.0"
    API_V1_PREFIX: str = "/api/v1"

    LOG_LEVEL: str = "INFO"

    # Time stepping
    DEFAULT_TIMESTEP: int = 3600  # seconds, hourly weather cadence
    WARMUP_DAYS: int = 3  # first day repeated before recording

    # Convergence criteria (user controlled, see SolverOptions)
    COUPLING_CRITERION: float = 1e-3  # K
    CONVECTION_CRITERION: float = 1e-3  # K
    MAX_CONVECTION_ITERATIONS: int = 25
    MAX_COUPLING_SWEEPS: int = 50

    # Pressure network
    AIRFLOW_TOLERANCE: float = 1e-6  # kg/s per zone
    MAX_AIRFLOW_ITERATIONS: int = 100
    AIRFLOW_OUTER_ITERATION: bool = False

    # Results
    CSV_SIGNIFICANT_DIGITS: int = 6
    RESULTS_DIR: str = "results"

    # CORS
    CORS_ORIGINS: List[str] = ["http://localhost:3000"]

    class Config:
        env_file = ".env"
        env_prefix = "ZONESIM_"
        case_sensitive = True
        extra = "ignore"  # Ignore extra fields in .env file


settings = Settings()
