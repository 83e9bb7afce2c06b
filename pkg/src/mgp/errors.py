"""Exception hierarchy shared across the toolkit."""
from __future__ import annotations


class MgpError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(MgpError):
    """Input violates a documented invariant (bad norm, bad config value, ...)."""


class InsufficientDataError(MgpError):
    """Too few observations to run the requested estimator."""


class DegenerateGeometryError(MgpError):
    """Observation geometry leaves the quantity unobservable (e.g. collinear baselines)."""


class ConfigurationError(MgpError):
    """Inconsistent run configuration (missing layout entry, bad file wiring, ...)."""


class InputError(MgpError):
    """Unreadable or malformed input file."""
