"""Exception types shared across the package."""

from __future__ import annotations

from collections.abc import Sequence


class CrisisCurveError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CrisisCurveError):
    """Caller-supplied data violates an operation's contract."""


class ConfigError(CrisisCurveError):
    """Invalid run configuration (sampler settings, crisis windows, ...)."""


class ParseError(CrisisCurveError):
    """Malformed input file; the message carries the offending location."""


class RegionNotFoundError(InputError):
    """Requested region is absent from a case CSV."""

    def __init__(self, region: str, candidates: Sequence[str] = ()):
        self.region = region
        self.candidates = tuple(candidates)
        hint = f"; close matches: {', '.join(self.candidates)}" if self.candidates else ""
        super().__init__(f"region {region!r} not found{hint}")


class SingularDesignError(CrisisCurveError):
    """Design matrix is rank deficient; names the first offending column."""

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = f"column {column}" if name is None else f"column {column} ({name!r})"
        super().__init__(f"design matrix is rank deficient at {label}")


class DataCleaningWarning(UserWarning):
    """Input data needed cleaning (revisions clamped, duplicates dropped, ...)."""
