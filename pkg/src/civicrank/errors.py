"""Exception hierarchy shared across the pipeline."""


class CivicRankError(Exception):
    """Base class; carries a short machine-readable code."""

    code = "error"

    def __init__(self, detail=""):
        self.detail = detail
        super().__init__(f"{self.code}: {detail}" if detail else self.code)


class ValidationError(CivicRankError):
    """Bad input or infeasible parameters (CLI exit code 2)."""

    code = "validation_error"

    def __init__(self, code, detail=""):
        self.code = code
        super().__init__(detail)


class FixtureMissingError(CivicRankError):
    """Offline mode was requested but no recorded response exists (exit code 3)."""

    code = "fixture_missing"


class RetriableError(CivicRankError):
    """Transient network failure; distinct from a definitive no-match answer."""

    code = "retriable"
