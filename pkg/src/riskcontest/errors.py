"""Exception hierarchy shared across the package.

Every error raised by library code derives from ContestError so the CLI can
map failures onto its documented exit codes.
"""


class ContestError(Exception):
    """Base class for all package errors. CLI exit code 2 unless overridden."""

    exit_code = 2


class ConfigurationError(ContestError):
    """Invalid configuration value or malformed config file."""


class ValidationError(ContestError):
    """Input violates a documented precondition (bad index, shape, file)."""


class DatasetFormatError(ValidationError):
    """Malformed dataset file; message names the offending line and column."""


class SimulationBudgetError(ContestError):
    """Case/control pools could not be filled within the draw budget."""

    exit_code = 4


class DegenerateOutcomeError(ContestError):
    """Outcome vector contains a single class; no logistic fit exists."""


class UnsupportedFitError(ContestError):
    """Operation needs a fit artifact (e.g. standard errors) that is absent."""


class StratificationError(ContestError):
    """A class is too small to stratify into the requested folds."""


class EnumerationBudgetError(ContestError):
    """Subset enumeration would exceed the configured budget."""


class UndefinedRateError(ContestError):
    """A rate-based metric is undefined for this truth (k = 0 or k = d)."""


class CommitmentError(ContestError):
    """Sealed-truth digest does not match the supplied commitment."""

    exit_code = 3
