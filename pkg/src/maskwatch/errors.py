"""Exception hierarchy for maskwatch.

Everything raised deliberately by this package derives from
:class:`MaskwatchError`, so callers (and the CLI) can catch one type.
"""

from __future__ import annotations


class MaskwatchError(Exception):
    """Base class for all maskwatch errors."""


# --- digest ---------------------------------------------------------------

class DigestError(MaskwatchError):
    """Base class for digest computation and decoding errors."""


class TooShortError(DigestError):
    """Input is below the minimum length a digest can be computed from."""


class InsufficientComplexityError(DigestError):
    """Input has too little byte diversity to produce a stable digest."""


class BadLengthError(DigestError):
    """Digest string is not exactly 72 characters."""


class BadPrefixError(DigestError):
    """Digest string does not start with the T1 version tag."""


class NonHexCharacterError(DigestError):
    """Digest string contains a character outside [0-9a-fA-F]."""


class VersionMismatchError(DigestError):
    """Two digests with different version tags were compared."""


# --- index / clustering ---------------------------------------------------

class DuplicateIdError(MaskwatchError):
    """The same item id was indexed twice."""


class EmptyCorpusError(MaskwatchError):
    """Clustering was requested over zero records."""


class EmptyInputError(MaskwatchError):
    """A non-empty collection was required."""


# --- signature facts ------------------------------------------------------

class BadLineError(MaskwatchError):
    """A blocklist line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# --- pipeline -------------------------------------------------------------

class SchemaViolationError(MaskwatchError):
    """A manifest line does not conform to the record schema."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ManifestDigestError(MaskwatchError):
    """Digest computation failed for a manifest entry's raw bytes."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ModelVersionError(MaskwatchError):
    """A model file was written by an unsupported format version."""


class CorruptModelError(MaskwatchError):
    """A model file is truncated or internally inconsistent."""


class MissingRawBytesError(MaskwatchError):
    """A forge mode that rewrites content was invoked without raw bytes."""
