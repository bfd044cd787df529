"""
Exception hierarchy

InvalidArgumentError subclasses ValueError so callers that only know the
builtin still catch shape and range problems.
"""


class DeepRestError(Exception):
    """Base class for all package errors"""


class InvalidArgumentError(DeepRestError, ValueError):
    """Dimension mismatch, out-of-range parameter or inconsistent layer chain"""


class ImageFormatError(DeepRestError):
    """Unsupported, corrupt or color image file"""


class ModelFormatError(DeepRestError):
    """Truncated or inconsistent model container"""


class UnitarityError(ModelFormatError):
    """Stored transform is too far from unitary to be trusted"""
