class FuzzyVaultError(Exception):
    pass


class FailureToCapture(FuzzyVaultError):
    """Enrollment aborted: too few usable minutiae or features."""


class ChaffPlacementFailure(FuzzyVaultError):
    pass


class GenerationError(FuzzyVaultError):
    """Synthetic data could not be generated under the requested constraints."""


class VaultFormatError(FuzzyVaultError, ValueError):
    """Malformed, truncated or wrong-version vault record."""


class DatasetError(FuzzyVaultError):
    """Missing, unreadable or inconsistent dataset files."""
