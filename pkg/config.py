"""
Configuration settings for the entanglement detection toolkit.
"""

import os
from typing import Tuple

from dotenv import load_dotenv

load_dotenv(dotenv_path=os.path.join(os.path.dirname(os.path.abspath(__file__)), ".env"))


class Config:
    """Configuration class for entkit."""

    # Spectral tolerances
    DEFAULT_RANK_TOL: float = float(os.getenv("ENTKIT_DEFAULT_TOL", "1e-10"))  # relative to the largest singular value
    HERMITIAN_TOL: float = 1e-10  # scaled by max(1, max|A|)
    TRACE_TOL: float = 1e-9
    PSD_TOL: float = 1e-9
    DESCARTES_TOL: float = 1e-10  # scaled by max(1, max|a_i|)
    CUBIC_IMAG_TOL: float = 1e-9
    WITNESS_RESIDUE_TOL: float = 1e-10

    # Criteria
    DECISION_MARGIN: float = float(os.getenv("ENTKIT_MARGIN", "1e-9"))
    CT_GRID: Tuple[float, ...] = (0.0, 1 / 32, 1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0, 2.0)

    # Sweeps
    BISECTION_MAX_ITER: int = 50
    BISECTION_RESOLUTION: float = 1e-6
    SWEEP_WORKERS: int = int(os.getenv("ENTKIT_WORKERS", "1"))
    DEFAULT_SEED: int = 20240611
    DEFAULT_SHOTS: int = 10_000

    # Fixtures
    TABLE_FIXTURES_PATH: str = os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "CLI", "fixtures", "tables.json"
    )

    # Logging
    LOG_LEVEL: str = os.getenv("ENTKIT_LOG_LEVEL", "WARNING")
    LOG_FORMAT: str = "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"

    @classmethod
    def rank_tol(cls) -> float:
        """Rank tolerance, re-read from the environment so late overrides apply."""
        value = os.getenv("ENTKIT_DEFAULT_TOL")
        return float(value) if value else cls.DEFAULT_RANK_TOL
