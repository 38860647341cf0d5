"""
Run configuration: built-in defaults, an optional key=value config file,
THERMOQ_* environment variables and command line flags, later sources winning.
"""

import logging
import os
from typing import Callable, Dict, List, Mapping, Optional

from dotenv import dotenv_values

from thermoq.errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_ENV = "THERMOQ_CONFIG"
ENV_PREFIX = "THERMOQ_"


def parse_float_list(value) -> List[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(v) for v in str(value).split(",") if v.strip()]


def parse_int_list(value) -> List[int]:
    """Accepts "0,1,2" or a range "0-5" (inclusive)."""
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    text = str(value).strip()
    if "-" in text and "," not in text and not text.startswith("-"):
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _optional_float(value):
    return None if value in (None, "") else float(value)


def _optional_float_list(value):
    return None if value in (None, "") else parse_float_list(value)


PARSERS: Dict[str, Callable] = {
    "system": str,
    "L": parse_float_list,
    "m": float,
    "omega": _optional_float_list,
    "n_states": int,
    "T": _optional_float_list,
    "T_min": _optional_float,
    "T_max": _optional_float,
    "samples": int,
    "modes": parse_int_list,
    "k": parse_float_list,
    "direction": int,
    "x_min": _optional_float,
    "x_max": _optional_float,
    "output": str,
    "output_path": lambda v: v or None,
    "threshold": float,
    "abs_tol": float,
    "rel_tol": float,
    "max_depth": int,
    "infinite_cutoff": float,
    "convention_mode": str,
    "convention_domain": lambda v: v or None,
    "i_max": int,
    "tol": float,
    "hbar": float,
    "kB": float,
    "log_level": str,
}

DEFAULTS: Dict[str, object] = {
    "system": "box",
    "L": "3.0",
    "m": 1.0,
    "omega": None,
    "n_states": 10,
    "T": None,
    "T_min": None,
    "T_max": None,
    "samples": 400,
    "modes": "1",
    "k": "1.0",
    "direction": 1,
    "x_min": None,
    "x_max": None,
    "output": "csv",
    "output_path": None,
    "threshold": 0.1,
    "abs_tol": 1e-10,
    "rel_tol": 1e-10,
    "max_depth": 50,
    "infinite_cutoff": 12.0,
    "convention_mode": "shared_alpha",
    "convention_domain": None,
    "i_max": 1,
    "tol": 1e-6,
    "hbar": 1.0,
    "kB": 1.0,
    "log_level": "WARNING",
}


def load_config_file(path: str) -> Dict[str, str]:
    """
    Reads a plain key=value file.

    Return:
        dict: raw string values keyed by recognised option names
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    values = dotenv_values(path)
    unknown = sorted(set(values) - set(PARSERS))
    if unknown:
        raise ConfigError(f"unknown key(s) in {path}: {', '.join(unknown)}")
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigError(f"key(s) without a value in {path}: {', '.join(missing)}")
    logger.info("loaded %d setting(s) from %s", len(values), path)
    return dict(values)


def env_overrides(environ: Mapping[str, str]) -> Dict[str, str]:
    """THERMOQ_<KEY> variables, e.g. THERMOQ_THRESHOLD or THERMOQ_T_MAX."""
    found = {}
    for key in PARSERS:
        name = ENV_PREFIX + key.upper()
        if name in environ:
            found[key] = environ[name]
    return found


class Settings:
    """
    Resolved option values. The config file comes from the explicit path, else
    from the THERMOQ_CONFIG environment variable, else there is none.
    """

    def __init__(
        self,
        flags: Optional[Mapping[str, object]] = None,
        config_path: Optional[str] = None,
        environ: Optional[Mapping[str, str]] = None,
    ):
        environ = os.environ if environ is None else environ
        self.config_path = config_path or environ.get(CONFIG_ENV) or None
        raw: Dict[str, object] = dict(DEFAULTS)
        self.sources: Dict[str, str] = {key: "default" for key in DEFAULTS}
        layers = [
            ("file", load_config_file(self.config_path) if self.config_path else {}),
            ("env", env_overrides(environ)),
            ("flag", {k: v for k, v in (flags or {}).items() if v is not None}),
        ]
        for source, values in layers:
            for key, value in values.items():
                if key not in PARSERS:
                    raise ConfigError(f"unknown option '{key}'")
                raw[key] = value
                self.sources[key] = source
        self._values = {}
        for key, value in raw.items():
            try:
                self._values[key] = PARSERS[key](value) if value is not None else None
            except (TypeError, ValueError) as e:
                raise ConfigError(
                    f"invalid value for '{key}' ({self.sources[key]}): {value!r}"
                ) from e

    def __getitem__(self, key: str):
        return self._values[key]

    def get(self, key: str, default=None):
        value = self._values.get(key)
        return default if value is None else value

    def as_dict(self) -> Dict[str, object]:
        return dict(self._values)
