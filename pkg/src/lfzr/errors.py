"""Exception hierarchy for the lfzr codec."""


class LfzrError(Exception):
    """Base class for all codec errors."""


class ConfigError(LfzrError):
    """Invalid codec configuration (bad epsilon, missing weights, ...)."""


class CorruptContainerError(LfzrError):
    """Container failed validation: bad magic, checksum, truncation."""


class BoundViolationError(LfzrError):
    """Reconstruction exceeded the promised maximum absolute error."""


class DataFormatError(LfzrError):
    """Input file could not be parsed as the requested format."""
