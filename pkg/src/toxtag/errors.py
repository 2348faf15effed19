"""Exception and warning types shared across the package."""


class ToxtagError(Exception):
    """Base class for all package errors."""


class AnnParseError(ToxtagError):
    """A standoff annotation file line could not be parsed."""


class LabelError(ToxtagError):
    """An annotation carries a label outside the expected inventory."""


class IntegrityError(ToxtagError):
    """Span text disagrees with the document substring at its offsets."""


class EmbeddingLookupError(ToxtagError):
    """A precomputed embedding record is missing for a requested key."""


class CheckpointError(ToxtagError):
    """A model checkpoint file is corrupt, truncated or incompatible."""


class ConfigError(ToxtagError):
    """A run configuration file or value is invalid."""


class DataWarning(UserWarning):
    """Recoverable data irregularity (span dropped, line skipped, ...)."""
