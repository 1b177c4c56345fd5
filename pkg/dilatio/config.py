from pathlib import Path
import os

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


"""Runtime configuration.

Loads environment variables from the repository root `.env` first, then
from a `.env` in the current working directory if present. Values already
present in the environment always win.
"""

_ROOT_DIR = Path(__file__).resolve().parents[1]
load_dotenv(_ROOT_DIR / ".env", override=False)
load_dotenv(Path.cwd() / ".env", override=False)


def _default_threads() -> int:
    return max(1, min(4, os.cpu_count() or 1))


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="DILATIO_", env_file=".env", extra="ignore")

    threads: int = Field(default_factory=_default_threads, ge=1)
    samples: int = Field(default=200_000, ge=1)
    seed: int = 20240917
    quad_tol: float = 1e-10
    quad_max_depth: int = 48
    gl_order: int = 20
    angular_panels: int = 32
    sup_samples: int = 100_000
    sigma_threshold: float = 3.0
    fail_abs_tol: float = 1e-6
    fail_rel_tol: float = 1e-3
    log_level: str = "INFO"


settings = Settings()
