"""Exception hierarchy shared by every stage of the toolkit."""


class SarError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SarError, ValueError):
    """Invalid scenario configuration or parameter set."""


class DomainError(SarError, ValueError):
    """Input outside the domain of a formula (non-positive length, grazing angle, ...)."""


class PlanError(DomainError):
    """Sublook partition cannot be built with the requested number of looks."""


class AliasingError(DomainError):
    """Raw data sampled below the chirp bandwidth."""


class FormatError(SarError):
    """Bad magic, version or truncated payload in a binary artifact."""


class NoModulationDetected(SarError):
    """The sublook series is too flat to carry on-off keyed bits."""
