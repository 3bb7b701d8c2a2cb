class DatasetError(ValueError):
    """Raised for unusable input data (unreadable files, bad rows, bad ids)."""


class EmptyDatasetError(DatasetError):
    """Raised when an operation needs at least one point and gets none."""


class ParameterError(ValueError):
    """Raised for invalid clustering or build parameters."""
