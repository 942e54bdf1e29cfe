"""Exception types shared across the package."""


class QnasError(Exception):
    """Base class for all qnas-specific errors."""


class OverloadedStation(QnasError):
    """A station's per-instance utilization is at or above 1, so residence
    times (and demand estimation) are undefined there."""

    def __init__(self, stations, message=None):
        self.stations = tuple(stations)
        if message is None:
            message = "overloaded station(s): %s" % (list(self.stations),)
        super().__init__(message)


class InfeasibleConfiguration(QnasError):
    """A target configuration is at or below the capacity floor on at least
    one station that carries load."""

    def __init__(self, stations, message=None):
        self.stations = tuple(stations)
        if message is None:
            message = (
                "configuration at or below capacity floor on station(s): %s"
                % (list(self.stations),)
            )
        super().__init__(message)


class UnattainableSla(QnasError):
    """A response-time threshold lies at or below the asymptotic lower bound
    of the model, so no finite configuration can satisfy it."""

    def __init__(self, classes, message=None):
        self.classes = tuple(classes)
        if message is None:
            message = (
                "SLA threshold unattainable for class(es): %s"
                % (list(self.classes),)
            )
        super().__init__(message)


class IterationCap(QnasError):
    """Safety cap on planner iterations exceeded."""


class ConfigError(QnasError):
    """Invalid or incomplete configuration file."""
