"""Configuration loaded from environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from phtk.errors import ConfigError

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"Environment variable {name}={raw!r} is not an integer")


# Parallelism
THREADS: int = _int_env("PHTK_THREADS", os.cpu_count() or 1)

# Logging
LOG_LEVEL: str = os.getenv("PHTK_LOG_LEVEL", os.getenv("LOG_LEVEL", "INFO")).upper()

# Defaults for CLI runs
DEFAULT_PROFILE: str = os.getenv("PHTK_PROFILE", "strict")
DEFAULT_SEED: int = _int_env("PHTK_SEED", 0)
DATA_DIR: Path = Path(os.getenv("PHTK_DATA_DIR", "./data"))


@dataclass(frozen=True)
class ToleranceProfile:
    """Named tolerance with per-check multipliers.

    A residual passes when it does not exceed ``tol * multiplier(tag)``.
    """

    name: str
    tol: float
    multipliers: dict[str, float] = field(default_factory=dict)
    default_multiplier: float = 10.0

    def threshold(self, tag: str) -> float:
        return self.tol * self.multipliers.get(tag, self.default_multiplier)


# Decomposition round-trips and route identities go through extra products
_MULTIPLIERS = {
    "gen-eta": 100.0,
    "gen-tau": 100.0,
    "a4-commute": 100.0,
    "b2-commute": 100.0,
    "takagi": 100.0,
    "C==T": 100.0,
    "e=TeT": 100.0,
}

PROFILES: dict[str, ToleranceProfile] = {
    "strict": ToleranceProfile("strict", 1e-10, dict(_MULTIPLIERS)),
    "spectral": ToleranceProfile("spectral", 1e-6, dict(_MULTIPLIERS)),
}


def get_profile(name: str | None = None) -> ToleranceProfile:
    """Return the tolerance profile registered under ``name``.

    Falls back to PHTK_PROFILE when no name is given.
    """
    key = name or DEFAULT_PROFILE
    try:
        return PROFILES[key]
    except KeyError:
        raise ConfigError(
            f"Unknown tolerance profile {key!r} (available: {', '.join(sorted(PROFILES))})"
        ) from None


def get_threads() -> int:
    """Return the worker cap for fan-out commands (at least 1)."""
    return max(1, THREADS)


def resolve_output(path: Path) -> Path:
    """Place bare file names under DATA_DIR; leave explicit paths alone."""
    if path.is_absolute() or path.parent != Path("."):
        return path
    return DATA_DIR / path


def make_profile(tol: float, name: str = "custom") -> ToleranceProfile:
    """Ad-hoc profile with the standard multipliers around ``tol``."""
    return ToleranceProfile(name, tol, dict(_MULTIPLIERS))
