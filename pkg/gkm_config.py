"""Environment-driven defaults for GKM runs.

Values come from the process environment (a local .env is loaded by the CLI
before this is consulted). Explicit command-line flags override them.
"""
import logging
import os
from typing import Any, Dict, Mapping, Optional

FORMATS = ("tsv", "json", "table")

_TRUE = {"1", "true", "yes", "on"}


def _env_int(env: Mapping[str, str], key: str, default: int) -> int:
    raw = env.get(key)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"ignoring {key}={raw!r}: not an integer")
        return default


def get_run_defaults_from_env(env: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """Return the default seed, k_max, output format, strictness and log level."""
    env = os.environ if env is None else env
    output_format = env.get("GKM_FORMAT", "tsv").strip().lower()
    if output_format not in FORMATS:
        logging.getLogger(__name__).warning(f"ignoring GKM_FORMAT={output_format!r}; using tsv")
        output_format = "tsv"
    return {
        "seed": _env_int(env, "GKM_SEED", 0),
        "k_max": _env_int(env, "GKM_KMAX", 3),
        "output_format": output_format,
        "strict": env.get("GKM_STRICT", "").strip().lower() in _TRUE,
        "log_level": env.get("GKM_LOG", "WARNING").strip().upper() or "WARNING",
    }


def configure_logging(level: str = "WARNING") -> None:
    """Send log records to stderr so stdout carries only results."""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        numeric = logging.WARNING
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
