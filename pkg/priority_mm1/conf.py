"""
Library settings.

Values are looked up lazily from ``PRIORITY_MM1_<NAME>`` environment variables
and fall back to :data:`DEFAULTS`. Environment strings are coerced to the type
of the default value::

    from priority_mm1.conf import settings

    band = settings.GUARD_BAND
    workers = getattr(settings, "SIM_WORKERS", 1)
"""
import os

ENV_PREFIX = "PRIORITY_MM1_"

DEFAULTS = {
    # absolute root residual allowed, in units of mu**2
    "ROOT_TOLERANCE": 1e-12,
    # distance from a removable singularity below which limits are used
    "GUARD_BAND": 1e-6,
    "DIRECT_SOLVE_MAX_STATES": 200_000,
    "TRUNCATION_MAX_STATES": 10_000_000,
    "POWER_ITERATION_MAX_STEPS": 200_000,
    "KRYLOV_MAX_RESTARTS": 200,
    "ILU_DROP_TOLERANCE": 1e-6,
    "ILU_FILL_FACTOR": 10,
    "SOLVER_TOLERANCE": 1e-10,
    "LOG_LEVEL": "WARNING",
    "SIM_WORKERS": 1,
}

_TRUE_VALUES = ("1", "true", "yes", "on")


def _coerce(raw, default):
    if isinstance(default, bool):
        return raw.strip().lower() in _TRUE_VALUES
    if isinstance(default, int):
        return int(float(raw))
    if isinstance(default, float):
        return float(raw)
    return raw


class LazySettings:
    """Attribute access to environment-backed settings."""

    def __init__(self, defaults=None, prefix=ENV_PREFIX):
        self._defaults = dict(DEFAULTS if defaults is None else defaults)
        self._prefix = prefix

    def __getattr__(self, name):
        if name.startswith("_"):
            raise AttributeError(name)
        raw = os.environ.get(self._prefix + name)
        if name in self._defaults:
            default = self._defaults[name]
            return default if raw is None else _coerce(raw, default)
        if raw is None:
            raise AttributeError(f"setting '{name}' is not defined")
        return raw

    def __repr__(self):
        return "<%s prefix=%r>" % (self.__class__.__name__, self._prefix)


settings = LazySettings()
