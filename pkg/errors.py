"""
Exception hierarchy shared by the plant, environment, training and explain packages
"""


class AirForgeError(Exception):
    """Base class for every error raised by AirForge"""

    kind = "runtime"


class DomainError(AirForgeError, ValueError):
    """An input lies outside the domain of a physical or numerical operation"""


class UsageError(AirForgeError, RuntimeError):
    """An object was used out of order, e.g. stepping a finished episode"""


class EndOfDataError(AirForgeError):
    """The demand profile has no samples left for the requested window"""


class NumericalError(AirForgeError):
    """A computation produced non-finite values that could not be recovered"""


class ConfigurationError(AirForgeError, ValueError):
    """Invalid scenario, config file, demand file or command combination"""

    kind = "configuration"


class PolicyFileError(ConfigurationError):
    """A policy parameter file is unreadable or belongs to another scenario"""
