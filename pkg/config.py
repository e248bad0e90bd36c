"""
Configuration management for the PL-duality lab.
Loads environment variables and provides typed numerical settings.
"""

import os
from pathlib import Path
from dotenv import load_dotenv
from pydantic import BaseModel

# Load environment variables
load_dotenv()


def _env_float(key: str, default: str) -> float:
    return float(os.getenv(key, default))


class Settings(BaseModel):
    """Tolerances, integrator defaults and output locations."""

    # Structural tolerances
    input_tolerance: float = _env_float("PLT_INPUT_TOLERANCE", "1e-12")
    identity_tolerance: float = _env_float("PLT_IDENTITY_TOLERANCE", "1e-10")
    normalization_tolerance: float = _env_float("PLT_NORMALIZATION_TOLERANCE", "1e-8")
    cli_normalization_tolerance: float = _env_float("PLT_CLI_NORMALIZATION_TOLERANCE", "1e-4")
    membership_tolerance: float = _env_float("PLT_MEMBERSHIP_TOLERANCE", "1e-9")
    degenerate_beta: float = _env_float("PLT_DEGENERATE_BETA", "1e-10")
    point_orbit_beta: float = _env_float("PLT_POINT_ORBIT_BETA", "1e-12")

    # Integrator
    rk4_step: float = _env_float("PLT_RK4_STEP", "1e-3")
    blowup_norm: float = _env_float("PLT_BLOWUP_NORM", "1e9")
    residual_flag_threshold: float = _env_float("PLT_RESIDUAL_FLAG_THRESHOLD", "1e-3")

    # Verification
    default_seed: int = int(os.getenv("PLT_SEED", "0"))

    # Output
    artifacts_dir: Path = Path(os.getenv("PLT_ARTIFACTS_DIR", "artifacts"))
    log_level: str = os.getenv("PLT_LOG_LEVEL", "WARNING")

    def closed_form_tolerance(self) -> float:
        """Determinant window inside which the closed AKS factors are used."""
        return self.identity_tolerance


# Global settings instance
settings = Settings()
