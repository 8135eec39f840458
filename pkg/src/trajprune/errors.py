"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data or configuration violates a documented contract."""


class DatasetFormatError(ValidationError):
    """A dataset file could not be parsed.

    Carries enough context (path, line number, trajectory id, field) in the
    message to locate the offending record.
    """
