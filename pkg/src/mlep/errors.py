"""Exception hierarchy shared across the package."""


class MlepError(Exception):
    """Base class for all errors raised by this package."""


class DecodeError(MlepError):
    """An encoded image stream could not be decoded.

    The message names the stage that failed (open / decode / convert).
    """


class DimensionError(MlepError):
    """Image or array dimensions violate an operation's requirements."""


class ConfigError(MlepError):
    """A configuration value is outside the supported range."""


class TrainingError(MlepError):
    """Training preconditions are not met (e.g. single-class data)."""


class MetricError(MlepError):
    """A metric is undefined for the given inputs (e.g. no positives)."""


class ManifestError(MlepError):
    """A dataset manifest file is malformed."""


class TensorFormatError(MlepError):
    """A serialized feature tensor is malformed.

    ``code`` is one of ``bad_magic``, ``bad_version``, ``bad_dtype``,
    ``bad_header``, ``truncated``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
