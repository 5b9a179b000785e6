"""Exception types shared across the grading engine.

Each error corresponds to a contract violation or an external failure that
callers are expected to handle explicitly. Silent fallbacks (NaN scores,
empty results standing in for failures) are deliberately avoided.
"""


class GradekitError(Exception):
    """Base class for all gradekit errors."""


# --- text / embedding ---

class EmptyText(GradekitError):
    """Input text is empty or whitespace-only."""


class ProviderUnavailable(GradekitError):
    """A remote provider (embedding, evaluation, transcription) failed."""


class DimensionMismatch(GradekitError):
    """Two embeddings (or an embedding and an index) disagree on dimension."""


# --- retrieval ---

class DuplicateChunkId(GradekitError):
    """A reference chunk id occurs more than once in one index."""


class QuestionUnknown(GradekitError):
    """The question id is not present in the reference index."""


# --- cache ---

class EmptyDeepStore(GradekitError):
    """The deep store holds no fact chunks."""


class SeedLargerThanStore(GradekitError):
    """Requested COLD seed size exceeds the deep store size."""


# --- evaluation ---

class InconsistentQuestionId(GradekitError):
    """Components of an evaluation request disagree on the question id."""


class MissingFacultyChunks(GradekitError):
    """An evaluation request requires faculty chunks but has none."""


class MalformedProviderResponse(GradekitError):
    """A remote evaluator returned a response that cannot be parsed."""


# --- pipeline ---

class EmptyTranscript(GradekitError):
    """A student response carries an empty transcript."""


class InsufficientData(GradekitError):
    """Too few responses to run the ablation harness."""


# --- allocation ---

class DuplicateStudentId(GradekitError):
    """Student ids handed to the anonymizer are not unique."""


class NoReviewers(GradekitError):
    """Allocation requested with an empty reviewer pool."""


class MapSealed(GradekitError):
    """Attempted to mutate a sealed pseudonym map."""


# --- metrics ---

class LengthMismatch(GradekitError):
    """Paired series have different lengths."""


class ConstantSeries(GradekitError):
    """A correlation was requested over a constant (or degenerate) series."""


# --- audit ---

class SerializationFailure(GradekitError):
    """An audit payload could not be canonically serialized."""


# --- ingestion ---

class UnreadableInput(GradekitError):
    """A transcription input blob is empty or not decodable."""


class BindFailure(GradekitError):
    """The HTTP service could not bind its address."""


class CorpusFormatError(GradekitError):
    """A corpus file line is not a valid record."""
