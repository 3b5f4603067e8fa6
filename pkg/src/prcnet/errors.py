"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an operation receives an argument outside its domain."""


class ConfigError(ValueError):
    """Raised for an invalid configuration value.

    ``field`` names the offending config field (dotted path) when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class InvalidEventError(ValueError):
    """Raised when a topology event does not match the current live set."""


class NoLiveAgentsError(RuntimeError):
    """Raised when a broadcaster is requested from an empty live set."""
