"""Exception types shared across the package."""


class SimError(Exception):
    """Base class for all simd2nn errors."""


class ConfigurationError(SimError):
    """Invalid configuration value, key, or combination."""


class BoundsError(SimError, IndexError):
    """Layer or atom index outside the geometry."""


class ShapeError(SimError, ValueError):
    """Array shape inconsistent with the geometry or channel."""


class DomainError(SimError, ValueError):
    """Numeric argument outside the mathematical domain (e.g. distance <= 0)."""


class EncodingError(SimError, ValueError):
    """Feature vector violates the layer-0 encoding contract."""


class DegeneratePatchError(SimError, ValueError):
    """Patch carries no signal (all-zero) and cannot be normalized."""


class LabelingError(SimError):
    """Ground-truth label requested but no label mask is available."""


class FormatError(SimError, ValueError):
    """Malformed binary file; message includes the failing byte offset."""
