"""Exception types shared across the toolkit.

Each class corresponds to one failure mode of the data formats, solvers,
metrics, or provider clients. They all derive from SemleakError so callers
can catch the whole family at the CLI boundary.
"""


class SemleakError(Exception):
    """Base class for every error raised by this package."""


# --- data formats / store ------------------------------------------------

class BadMagic(SemleakError):
    """File does not start with the expected container magic."""


class DimMismatch(SemleakError):
    """Shape arithmetic does not add up (payload size, row/id counts, dims)."""


class DuplicateId(SemleakError):
    """An item id occurs more than once."""


class ZeroRow(SemleakError):
    """A row with (near-)zero L2 norm where a unit vector is required."""


class MalformedLine(SemleakError):
    """A JSONL line failed to parse; carries the 1-based line number."""

    def __init__(self, lineno, message="malformed JSONL line"):
        super().__init__(f"{message} (line {lineno})")
        self.lineno = lineno


class MissingField(SemleakError):
    """A required field is absent from a record."""


class NotEnoughIds(SemleakError):
    """Requested split sizes exceed the available id pool."""


# --- alignment ------------------------------------------------------------

class IdOrderMismatch(SemleakError):
    """Paired matrices must share identical ids in identical order."""


class NonFiniteInput(SemleakError):
    """NaN or Inf encountered where finite values are required."""


class SolverFailure(SemleakError):
    """The linear solver could not produce a solution."""


# --- retriever ------------------------------------------------------------

class EmptyPositives(SemleakError):
    """A row/column that the contrastive loss needs has no positive entry."""

    def __init__(self, index, axis="row"):
        super().__init__(f"no positives for {axis} {index}")
        self.index = index
        self.axis = axis


class EmptyGroupSide(SemleakError):
    """A ranking group is missing positives or negatives."""


class Divergence(SemleakError):
    """Training produced a non-finite loss; carries diagnostics."""


class KOutOfRange(SemleakError):
    """Requested top-K outside [1, vocabulary size]."""


# --- metrics ----------------------------------------------------------------

class UnknownTag(SemleakError):
    """Tag phrase not present in the vocabulary."""


class MOutOfRange(SemleakError):
    """Neighborhood size outside [1, vocabulary size]."""


class EmptySet(SemleakError):
    """A non-empty tag set is required."""


class EmptyText(SemleakError):
    """Hypothesis or reference text has no tokens."""


class MissingItem(SemleakError):
    """Aligned per-item inputs are missing an item id."""


class InvalidPredicate(SemleakError):
    """Relation predicate outside the fixed vocabulary."""


# --- model clients ----------------------------------------------------------

class ProviderError(SemleakError):
    """Provider returned a non-retryable failure (or retries were exhausted)."""

    def __init__(self, status, detail=""):
        super().__init__(f"provider error {status}: {detail[:200]}")
        self.status = status
        self.detail = detail


class ParseError(SemleakError):
    """Model output did not match the requested shape; raw text retained."""

    def __init__(self, message, raw=""):
        super().__init__(message)
        self.raw = raw


class CacheMiss(SemleakError):
    """Replay mode has no recorded response for this request hash."""


class NoInputs(SemleakError):
    """At least one input modality is required."""


# --- pipeline ----------------------------------------------------------------

class ConfigError(SemleakError):
    """Experiment configuration is invalid (exit code 2 at the CLI)."""
