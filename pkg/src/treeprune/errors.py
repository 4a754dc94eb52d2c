"""Exception types shared across the package."""


class TreepruneError(Exception):
    """Base class for all treeprune errors."""


class ConlluParseError(TreepruneError):
    """A CoNLL-U line could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class TreeStructureError(TreepruneError):
    """Head links of a sentence do not form a single tree rooted at ROOT."""


class TrainingError(TreepruneError):
    """Language model training was given unusable input."""


class ModelFormatError(TreepruneError):
    """A saved model file is corrupt or has an incompatible version."""


class DegenerateVectorError(TreepruneError):
    """Cosine similarity is undefined for an all-zero vector."""


class EmbeddingServiceError(TreepruneError):
    """A remote embedding call failed.

    ``retryable`` distinguishes transient transport/server failures from
    protocol errors that a retry cannot fix.
    """

    def __init__(self, message: str, retryable: bool = True):
        self.retryable = retryable
        super().__init__(message)


class TranslationError(TreepruneError):
    """A translation call failed."""

    def __init__(self, message: str, retryable: bool = False):
        self.retryable = retryable
        super().__init__(message)


class ConfigurationError(TreepruneError):
    """Invalid run configuration (bad threshold, unsupported language pair, ...)."""
