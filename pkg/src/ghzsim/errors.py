"""Exception hierarchy shared by all ghzsim modules."""


class GhzSimError(Exception):
    """Base class for every error raised by ghzsim."""


class InvalidParameterError(GhzSimError, ValueError):
    """A physical or numerical parameter is outside its allowed domain."""


class UndefinedConditionalError(GhzSimError, ZeroDivisionError):
    """A conditional probability or state was requested on a zero-probability event."""


class ConfigError(GhzSimError):
    """Base class for configuration problems. ``key`` is the dotted path to the offending entry."""

    def __init__(self, message: str, key: str = ""):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ConfigFileNotFound(ConfigError):
    pass


class MalformedConfig(ConfigError):
    pass


class UnknownConfigKey(ConfigError):
    pass


class OutOfRangeValue(ConfigError):
    pass
