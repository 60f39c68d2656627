import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigError, RationalParseError
from .rational import parse_rat

load_dotenv()

DEFAULT_SEED = 1729


def _int_env(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name}={raw!r} is not an integer") from None
    if value < minimum:
        raise ConfigError(f"{name}={value} must be at least {minimum}")
    return value


def _nudges_env(name: str, default: str) -> tuple[Fraction, ...]:
    raw = os.getenv(name) or default
    try:
        nudges = tuple(parse_rat(part, name) for part in raw.split(",") if part.strip())
    except RationalParseError as e:
        raise ConfigError(str(e)) from None
    if not nudges or any(not (0 < d < 1) for d in nudges):
        raise ConfigError(f"{name}={raw!r} must list rationals strictly between 0 and 1")
    return nudges


@dataclass(frozen=True)
class Settings:
    """Runtime knobs read from the environment (and a local .env file)."""

    seed: int = DEFAULT_SEED
    max_depth: int = 6
    max_degree: int = 3
    eh_k_bound: int = 8
    mult_cap: int = 3
    genericity_bound: int = 5
    nudges: tuple[Fraction, ...] = (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))
    workers: int = 1
    axioms_path: Optional[str] = None
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            seed=_int_env("SYMPEMB_SEED", DEFAULT_SEED),
            max_depth=_int_env("SYMPEMB_MAX_DEPTH", 6, minimum=1),
            max_degree=_int_env("SYMPEMB_MAX_DEGREE", 3, minimum=1),
            eh_k_bound=_int_env("SYMPEMB_EH_K_BOUND", 8, minimum=2),
            mult_cap=_int_env("SYMPEMB_MULT_CAP", 3, minimum=1),
            genericity_bound=_int_env("SYMPEMB_GENERICITY_BOUND", 5, minimum=2),
            nudges=_nudges_env("SYMPEMB_NUDGES", "1/10,1/100,1/1000"),
            workers=_int_env("SYMPEMB_WORKERS", 1, minimum=1),
            axioms_path=os.getenv("SYMPEMB_AXIOMS") or None,
            log_level=os.getenv("SYMPEMB_LOG_LEVEL", "WARNING").upper(),
        )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
