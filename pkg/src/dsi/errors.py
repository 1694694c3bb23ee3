"""Exception hierarchy shared across the package.

Class names double as machine-readable violation codes in validation
reports, so they are stable identifiers rather than conventional
``*Error`` names.
"""

from __future__ import annotations


class DsiError(Exception):
    """Base class for all errors raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


class UsageError(DsiError, ValueError):
    """A parameter violates its documented precondition (CLI exit 2)."""


class IoFailure(DsiError):
    """An operating-system level read/write failure (CLI exit 3)."""


# --- array file format -------------------------------------------------

class BadMagic(DsiError):
    """The byte stream is not a version-1.0 NPY file."""


class UnsupportedDtype(DsiError):
    """Array dtype is not little-endian IEEE f4/f8."""


class FortranOrder(DsiError):
    """Array is stored column-major; only C order is accepted."""


class BadShape(DsiError):
    """Array is not 2-D with at least one row and one column."""


class Truncated(DsiError):
    """The byte stream ends before the declared payload."""


# --- archive content ---------------------------------------------------

class ManifestMissing(DsiError):
    """manifest.json is absent from the archive root."""


class ManifestClassFileMissing(DsiError):
    """A class array file listed in the manifest does not exist."""


class ManifestMismatch(DsiError):
    """A prune manifest does not describe the given dataset."""


class DimensionMismatch(DsiError):
    """Vector dimensions disagree with the declared dimension."""


class InvariantViolation(DsiError):
    """Archive content breaks a structural invariant (NaN row, duplicate id, ...)."""


# --- math preconditions ------------------------------------------------

class ZeroNorm(DsiError):
    """Cosine similarity is undefined for zero-norm vectors."""


class EmptyClass(DsiError):
    """A class must contain at least one sample."""


class SingleClass(DsiError):
    """The operation needs at least two classes."""
