from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Toolkit settings loaded from environment variables or a .env file.
    """

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    # Logging settings
    LOG_LEVEL: str = "INFO"

    # Run defaults
    GAMMA: float = 1.000001
    BUDGET_SECS: float = 900.0
    SEED: int = 0
    JOBS: Optional[int] = None  # None means one worker per logical core

    # Solver caps
    HELD_KARP_MAX_VERTICES: int = 20
    EXACT_MAX_VERTICES: int = 28
    MAX_DP_CHILDREN: int = 18
    ORACLE_MAX_VERTICES: int = 16
    ENUMERATE_MAX_VERTICES: int = 10

    # Numerical tolerances
    METRIC_REL_TOL: float = 1e-9
    GAMMA_REL_TOL: float = 1e-12

    # Analysis settings
    EXACT_FACTORIAL_MAX: int = 5000

    # Generator settings
    PLANTED_MARGIN: float = 0.05
    PLANTED_BETA_MAX: float = 10.0

    # Optional directory holding extra TSPLIB files for the test suite
    TSPLIB_DIR: Optional[str] = None


settings = Settings()
