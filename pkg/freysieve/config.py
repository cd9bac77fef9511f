"""
Configuration for the freysieve toolkit
Loads settings from a .env file (if present) and the process environment
"""
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

DEFAULT_CACHE_DIR = str(Path.home() / ".cache" / "freysieve")
DEFAULT_CURVE_ENDPOINT = "https://www.lmfdb.org/api/ec_curvedata/"

# Bundled case files, curve excerpts and newform packs
DATA_DIR = Path(__file__).parent / "data"


def _flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class Settings:
    """Runtime settings; one instance per CLI invocation"""
    cache_dir: str
    curve_endpoint: str
    offline: bool
    http_timeout: float
    max_field_size: int
    factor_max_bits: int
    factor_rho_steps: int
    precision: int
    ellenberg_max_prime: int
    ellenberg_terms: str
    torsion3_scan_limit: int
    workers: int
    seed: int
    quiet: bool
    debug: bool

    def with_overrides(self, **changes) -> "Settings":
        """Return a copy with every non-None override applied"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Build Settings from the environment.

    Args:
        env_file: optional dotenv file whose values take precedence over
            variables already set (the CLI's --config).
    """
    if env_file:
        if not Path(env_file).is_file():
            raise FileNotFoundError(f"Config file not found: {env_file}")
        load_dotenv(env_file, override=True)

    return Settings(
        cache_dir=os.path.expanduser(os.getenv("FREYSIEVE_CACHE_DIR", DEFAULT_CACHE_DIR)),
        curve_endpoint=os.getenv("FREYSIEVE_CURVE_ENDPOINT", DEFAULT_CURVE_ENDPOINT),
        offline=_flag("FREYSIEVE_OFFLINE"),
        http_timeout=float(os.getenv("FREYSIEVE_HTTP_TIMEOUT", "10")),
        max_field_size=int(os.getenv("FREYSIEVE_MAX_FIELD_SIZE", "1000000")),
        factor_max_bits=int(os.getenv("FREYSIEVE_FACTOR_MAX_BITS", "64")),
        factor_rho_steps=int(os.getenv("FREYSIEVE_FACTOR_RHO_STEPS", "200000")),
        precision=int(os.getenv("FREYSIEVE_PRECISION", "38")),
        ellenberg_max_prime=int(os.getenv("FREYSIEVE_ELLENBERG_MAX_PRIME", "20000")),
        ellenberg_terms=os.getenv("FREYSIEVE_ELLENBERG_TERMS", ""),
        torsion3_scan_limit=int(os.getenv("FREYSIEVE_TORSION3_SCAN_LIMIT", "2000")),
        workers=max(1, int(os.getenv("FREYSIEVE_WORKERS", "1"))),
        seed=int(os.getenv("FREYSIEVE_SEED", "0")),
        quiet=_flag("FREYSIEVE_QUIET"),
        debug=_flag("FREYSIEVE_DEBUG"),
    )


settings = load_settings()


def get_settings() -> Settings:
    return settings


def set_settings(new: Settings) -> None:
    """Install new process-wide settings (used by the CLI after parsing flags)"""
    global settings
    settings = new
