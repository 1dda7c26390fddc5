import os
from pathlib import Path
from typing import Any

from dotenv import dotenv_values, load_dotenv

from app.errors import InvalidArgumentError
from app.models import QuadratureConfig, SpaceDescriptor
from app.services.oracle import quadrature_config

# Ensure environment variables are sourced from .env files before anything reads them.
_BASE_DIR = Path(__file__).resolve().parent.parent
_DEFAULT_ENV_FILES = (".env", ".env.local")

for filename in _DEFAULT_ENV_FILES:
    env_path = _BASE_DIR / filename
    if env_path.exists():
        # Do not override already-set environment variables (e.g., from deployment).
        load_dotenv(env_path, override=False)


def _optional_float(raw: str | None) -> float | None:
    if raw is None or raw.strip() == "" or raw.strip().lower() == "none":
        return None
    return float(raw)


# key -> (parser, default as it would appear in the environment)
_SETTINGS: dict[str, tuple[Any, str | None]] = {
    "LOG_LEVEL": (lambda raw: raw.upper(), "INFO"),
    "HEAT_DIGITS": (int, "60"),
    "HEAT_TAIL_EPSILON": (_optional_float, None),
    "HEAT_T0": (_optional_float, None),
    "HEAT_GRID_RATIO": (float, "0.5"),
    "HEAT_RICHARDSON_DEPTH": (int, "9"),
    "HEAT_QUAD_MAXDEGREE": (int, "10"),
    "HEAT_RESIDUAL_TOLERANCE": (float, "1e-4"),
    "HEAT_OUTPUT_PRECISION": (int, "20"),
    "CELERY_BROKER_URL": (str, "redis://localhost:6379/0"),
    "CELERY_RESULT_BACKEND": (str, "redis://localhost:6379/0"),
}


def _parse(key: str, raw: str | None) -> Any:
    parser, _ = _SETTINGS[key]
    if raw is None:
        return None
    try:
        return parser(raw)
    except ValueError as e:
        raise InvalidArgumentError(f"invalid value for {key}: {raw!r}") from e


def get_config() -> dict[str, Any]:
    """
    Get application configuration from environment variables.

    Returns:
            Dictionary of configuration values
    """
    return {key: _parse(key, os.getenv(key, default)) for key, (_, default) in _SETTINGS.items()}


def load_config_file(path: str | Path) -> dict[str, Any]:
    """
    Parse a key=value settings file (dotenv syntax) into typed values.

    Only the keys present in the file are returned, so the result can be laid
    over ``get_config()``.

    Raises:
            InvalidArgumentError: If the file is missing or names an unknown key
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidArgumentError(f"config file not found: {path}")
    values = dotenv_values(path)
    unknown = sorted(set(values) - set(_SETTINGS))
    if unknown:
        raise InvalidArgumentError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return {key: _parse(key, raw) for key, raw in values.items() if raw is not None}


def resolve_settings(config_file: str | Path | None = None, **overrides: Any) -> dict[str, Any]:
    """Defaults < environment < config file < explicit overrides (None means unset)."""
    settings = get_config()
    if config_file is not None:
        settings.update(load_config_file(config_file))
    settings.update({key: value for key, value in overrides.items() if value is not None})
    return settings


def quadrature_config_from(settings: dict[str, Any], desc: SpaceDescriptor) -> QuadratureConfig:
    """QuadratureConfig for one space from resolved settings."""
    return quadrature_config(
        desc,
        decimal_digits=settings["HEAT_DIGITS"],
        t0=settings["HEAT_T0"],
        ratio=settings["HEAT_GRID_RATIO"],
        depth=settings["HEAT_RICHARDSON_DEPTH"],
        tail_epsilon=settings["HEAT_TAIL_EPSILON"],
        max_degree=settings["HEAT_QUAD_MAXDEGREE"],
        residual_tolerance=settings["HEAT_RESIDUAL_TOLERANCE"],
    )
