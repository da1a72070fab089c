class QArchError(Exception):
    """Base class for errors raised by qarchsearch."""

    kind = "error"


class InvalidArgument(QArchError, ValueError):
    kind = "invalid-argument"


class SizeLimitError(QArchError, ValueError):
    kind = "size-limit"


class CandidateFailure(QArchError, RuntimeError):
    """A search worker failed while evaluating one candidate."""

    kind = "candidate-failure"

    def __init__(self, candidate_index, cause):
        self.candidate_index = candidate_index
        self.cause = cause
        super().__init__(f"candidate {candidate_index} failed: {cause!r}")
