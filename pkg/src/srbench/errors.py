"""Exception hierarchy shared by all srbench modules."""


class SrbenchError(Exception):
    """Base class for all errors raised by srbench."""


class ImageError(SrbenchError):
    """Invalid image data or unsupported image file."""


class ConfigError(SrbenchError):
    """Invalid model configuration or evaluation criteria."""


class DatasetError(SrbenchError):
    """Dataset layout, pairing, or manifest problem."""


class MetricError(SrbenchError):
    """A metric cannot be computed on the given inputs."""


class RunnerError(SrbenchError):
    """An external or builtin model runner failed."""


class ProtocolError(RunnerError):
    """A server-mode runner violated the wire protocol."""
