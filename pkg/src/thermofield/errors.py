class ParameterError(ValueError):
    """Invalid argument or parameter combination."""


class LoadError(OSError):
    """A file could not be decoded as the expected kind of image."""
