"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation-class errors exit 2,
plain I/O failures (OSError and friends) exit 1.
"""


class SevscoreError(Exception):
    """Base class for all toolkit errors."""


class AudioFormatError(SevscoreError):
    """Rejected audio input: wrong codec, bit depth, channel count, or empty."""


class FileFormatError(SevscoreError):
    """Corrupt or mismatched binary file (frame matrix, codebook, language model)."""


class ValidationError(SevscoreError):
    """Bad manifest, configuration, or argument combination."""


class InsufficientDataError(SevscoreError):
    """Not enough voiced material or data points to compute a value."""
