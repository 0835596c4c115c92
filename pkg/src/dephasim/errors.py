"""Exception types raised by dephasim."""

from typing import Optional


class InvalidParameterError(ValueError):
    """A physical parameter is out of range or not finite."""

    def __init__(self, name: str, value: object, reason: str):
        self.name = name
        self.value = value
        super().__init__(f"{name}={value!r}: {reason}")


class InvalidInputError(ValueError):
    """A data collection handed to an estimator is malformed."""


class ConfigError(ValueError):
    """A scenario configuration could not be parsed or validated."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        self.message = message
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)
