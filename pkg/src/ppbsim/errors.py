"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration, detected before any compute."""


class InputShapeError(ValueError):
    """Array argument has the wrong length or shape."""


class OutOfRangeError(ValueError):
    """Requested operating point is not attainable by the model."""
