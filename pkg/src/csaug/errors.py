"""Exception types shared across the package."""


class CsaugError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CsaugError):
    """Bad or inconsistent user-supplied configuration."""


class CtmParseError(CsaugError):
    """A CTM line could not be parsed.

    Carries the 1-based line number and the offending line text.
    """

    def __init__(self, lineno, line, reason):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno
        self.line = line
        self.reason = reason


class ManifestError(CsaugError):
    """A corpus or output manifest record is malformed or inconsistent."""


class ValidationError(CsaugError):
    """Alignment data violates a structural invariant."""


class RateMismatchError(CsaugError):
    """Sample rates that must agree do not."""


class UnknownRecordingError(CsaugError):
    """A recording id is referenced but not present in the corpus."""


class AudioReadError(CsaugError):
    """An audio file is missing, unreadable, or disagrees with its manifest."""


class OovError(CsaugError):
    """An utterance contains tokens absent from the unit inventory.

    ``missing`` is the sorted list of uncovered tokens; ``utterance_id``
    identifies the request that failed (may be None for ad-hoc queries).
    """

    def __init__(self, missing, utterance_id=None):
        self.missing = sorted(missing)
        self.utterance_id = utterance_id
        where = f" in {utterance_id!r}" if utterance_id else ""
        super().__init__(f"tokens not in inventory{where}: {self.missing}")


class SilentSegmentError(CsaugError):
    """A segment has (near-)zero energy and cannot be normalized."""
