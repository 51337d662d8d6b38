"""Exception types shared across the package."""


class FirelineError(Exception):
    """Base class for package-specific failures."""


class ConfigError(FirelineError):
    """Bad configuration: unknown case, invalid flag value, and the like."""


class ScenarioFormatError(ConfigError):
    """A scenario directory is missing a layer or has malformed contents."""


class CalibrationError(ConfigError):
    """Spread calibration could not bracket or reach the target."""


class InsufficientHistoryError(FirelineError):
    """A forecast was requested with too little history to fit a line."""
