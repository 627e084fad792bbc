"""Exception types raised across the toolkit.

Every data problem gets its own class so callers (and the CLI's error
stream) can react to the condition rather than parse messages.
"""

from __future__ import annotations


class QAEnsembleError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(QAEnsembleError, ValueError):
    """A value violates one of the domain-type invariants."""


# -- prediction / distribution validation ------------------------------------

class LengthMismatch(ValidationError):
    """Probability vectors and token sequence have different lengths."""


class OffsetOutOfRange(ValidationError):
    """A token's character offsets do not form a valid range in the context."""


class NonMonotoneTokens(ValidationError):
    """Tokens are not strictly ordered by character offset."""


class DistributionSumOutOfTolerance(ValidationError):
    """A probability vector's sum deviates from 1 by more than the ingest tolerance."""


class NegativeProbability(ValidationError):
    """A probability vector contains a negative entry."""


class SpanOutOfRange(ValidationError):
    """A (start, end) token span is not a valid span of the token sequence."""


class EmptyDistribution(ValidationError):
    """Decoding was asked for a distribution over zero tokens."""


# -- scoring -----------------------------------------------------------------

class EmptyGoldSet(ValidationError):
    """An example carries no gold answers."""


class MissingPrediction(QAEnsembleError, LookupError):
    """A required per-example prediction (or answer) is absent."""

    def __init__(self, example_id: str, model_id: str | None = None):
        self.example_id = example_id
        self.model_id = model_id
        where = f"model {model_id!r}" if model_id is not None else "answer map"
        super().__init__(f"no prediction for example {example_id!r} from {where}")


# -- combining ---------------------------------------------------------------

class LengthMismatchAcrossModels(ValidationError):
    """Distributions being combined have different token counts."""


class MissingWeight(QAEnsembleError, LookupError):
    """A model id has no entry in the weight vector."""

    def __init__(self, model_id: str):
        self.model_id = model_id
        super().__init__(f"no weight for model {model_id!r}")


class AllWeightsZero(ValidationError):
    """Every exponentiated weight is zero; the combination is undefined."""


class EmptyModelSet(ValidationError):
    """An aggregation was asked for zero models."""


class TokenizationMismatch(ValidationError):
    """Models disagree on token text or offsets for the same example."""


# -- calibration / tuning ----------------------------------------------------

class EmptyDataset(ValidationError):
    """A dataset (or pool) that must be non-empty is empty."""


class PoolTooSmall(ValidationError):
    """The calibration pool has fewer examples than requested folds."""


# -- simulation --------------------------------------------------------------

class InvalidRange(ValidationError):
    """A simulator length range is empty or inconsistent."""


class ConfigMismatch(ValidationError):
    """A corpus / skill matrix does not match the simulator config in use."""


# -- file formats ------------------------------------------------------------

class FormatError(QAEnsembleError, ValueError):
    """Base class for file reading/writing problems."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class ParseError(FormatError):
    """A line is not valid JSON."""


class SchemaViolation(FormatError):
    """A record is valid JSON but violates the file schema."""

    def __init__(self, field: str, message: str, *, path: str | None = None, line: int | None = None):
        self.field = field
        super().__init__(f"field {field!r}: {message}", path=path, line=line)


class DuplicateExampleId(FormatError):
    """The same example id occurs twice where ids must be unique."""


class UnknownExampleId(FormatError):
    """A prediction references an example id absent from the gold dataset."""
