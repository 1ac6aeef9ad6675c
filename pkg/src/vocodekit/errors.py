"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs or configuration (CLI exit 1);
everything else under ``VocodeKitError`` is a runtime failure (CLI exit 2).
"""


class VocodeKitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(VocodeKitError, ValueError):
    """Input violates a documented precondition or invariant."""


class ConfigError(ValidationError):
    """Configuration file is missing keys or violates an invariant."""


class ShapeError(ValidationError):
    """Tensor or matrix shapes are inconsistent."""


class SampleRateMismatchError(ValidationError):
    """Audio sample rate does not match what the operation expects."""


class WavFormatError(VocodeKitError):
    """WAV file cannot be decoded."""


class UnsupportedEncodingError(WavFormatError):
    """WAV encoding is neither PCM16 nor IEEE float32."""


class MultichannelError(WavFormatError):
    """WAV file has more than one channel."""


class TruncatedFileError(WavFormatError):
    """WAV file ends before its declared payload."""


class BundleError(VocodeKitError):
    """Weight bundle is missing tensors or has mismatched shapes."""
