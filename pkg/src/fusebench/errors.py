"""Exception types shared across the package."""


class FusebenchError(Exception):
    """Base class for every error this package raises on purpose."""


class ScoreFileError(FusebenchError):
    """A score file could not be parsed; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class ValidationError(FusebenchError):
    """Input data or configuration violates a documented precondition."""


class DegenerateModalityError(ValidationError):
    """A modality's genuine scores have zero spread, so it cannot be normalized."""

    def __init__(self, modality: int):
        super().__init__(
            f"modality {modality} has zero genuine-score standard deviation"
        )
        self.modality = modality


class UndefinedGainError(FusebenchError):
    """Relative gain is undefined because the reference rate is not positive."""


class SexprError(FusebenchError):
    """An expression string does not match the tree grammar."""
