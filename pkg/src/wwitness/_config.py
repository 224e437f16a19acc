"""Global options of wwitness.

Defaults are read from ``data/defaults.yml`` and may be overridden by a user file
located in the platform configuration directory, then at runtime with :py:class:`set_options`.
"""

from __future__ import annotations

import logging
import warnings
from pathlib import Path
from typing import Any, Callable

import platformdirs
import yaml

__all__ = ["DEFAULTS_FILE", "OPTIONS", "set_options", "user_config_file"]

logger = logging.getLogger(__name__)

DEFAULTS_FILE = Path(__file__).parent / "data" / "defaults.yml"
USER_CONFIG_FILE = "config.yml"


def _positive_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0


def _positive_float(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0


_VALIDATORS: dict[str, Callable[[Any], bool]] = {
    "photon_cap": _positive_int,
    "tolerance": _positive_float,
    "schmidt_max_modes": lambda v: _positive_int(v) and v >= 2,
    "ansatz_grid_points": lambda v: _positive_int(v) and v >= 3,
    "ansatz_fatol": _positive_float,
    "reference_starts": lambda v: isinstance(v, int) and v >= 0,
    "seed": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
    "phase_grid_points": lambda v: _positive_int(v) and v >= 2,
    "identity_projector": lambda v: v in ("two_quanta", "full"),
    "lossy_two_quanta": lambda v: isinstance(v, bool),
    "near_one_gap": lambda v: _positive_float(v) and v < 1,
    "monte_carlo_samples": _positive_int,
    "float_digits": lambda v: _positive_int(v) and v <= 17,
}


def user_config_file() -> Path:
    """Return the path of the optional user configuration file."""
    return Path(platformdirs.user_config_dir("wwitness")) / USER_CONFIG_FILE


def _validate(key: str, value: Any) -> None:
    if key not in _VALIDATORS:
        raise ValueError(f"Unknown option '{key}'. Valid options are {sorted(_VALIDATORS)}.")
    if not _VALIDATORS[key](value):
        raise ValueError(f"Invalid value for option '{key}': {value!r}.")


def _load_options() -> dict[str, Any]:
    options = yaml.safe_load(DEFAULTS_FILE.read_text())

    user_file = user_config_file()
    if user_file.exists():
        overrides = yaml.safe_load(user_file.read_text()) or {}
        for key, value in overrides.items():
            try:
                _validate(key, value)
            except ValueError as err:
                warnings.warn(f"Ignoring entry of {user_file}: {err}")
                continue
            options[key] = value
        logger.info("Loaded user options from %s", user_file)
    return options


OPTIONS: dict[str, Any] = _load_options()
"""Current option values. Modify through :py:class:`set_options`."""


class set_options:  # noqa: N801
    """Set wwitness options, globally or within a context.

    Parameters
    ----------
    \\*\\*kwargs
        Option names and their new values. See ``data/defaults.yml`` for the list.

    Examples
    --------
    >>> import wwitness
    >>> with wwitness.set_options(identity_projector="full"):
    ...     pass
    >>> wwitness.set_options(phase_grid_points=36)  # permanent
    """

    def __init__(self, **kwargs):
        self.old = {}
        for key, value in kwargs.items():
            _validate(key, value)
            self.old[key] = OPTIONS[key]
        OPTIONS.update(kwargs)

    def __enter__(self):
        """Context management."""
        return

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Restore the previous values."""
        OPTIONS.update(self.old)
