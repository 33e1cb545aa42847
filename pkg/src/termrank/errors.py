"""Exception types shared across the pipeline."""


class TermrankError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TermrankError):
    """Invalid run configuration (bad flag value, missing input file)."""


class CorpusFormatError(TermrankError):
    """Malformed corpus or lexicon input; message names the offending line."""


class AnnotationError(TermrankError):
    """An annotator broke its contract for one sentence."""


class PatternError(TermrankError):
    """Malformed filter pattern; carries the character offset of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.message = message
        self.position = position

    def __reduce__(self):
        return (type(self), (self.message, self.position))


class StoreError(TermrankError):
    """Term-store operation failed (duplicate term, unknown term, bad file)."""


class StoreLockedError(StoreError):
    """Another writer holds the store lock."""


class ScoringError(TermrankError):
    """A score cannot be computed (empty corpus, missing prerequisite)."""


class ShardFailure(TermrankError):
    """A shard worker failed; records which shard and document."""

    def __init__(self, shard_id: int, doc_id: str, cause: BaseException):
        super().__init__(
            f"shard {shard_id} failed on document {doc_id!r}: {cause}"
        )
        self.shard_id = shard_id
        self.doc_id = doc_id
        self.cause = cause

    def __reduce__(self):
        return (type(self), (self.shard_id, self.doc_id, self.cause))
