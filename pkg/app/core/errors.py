# app/core/errors.py

from typing import Any, Dict, Optional


class GeninvError(Exception):
    """Base for every error raised by the toolkit. Carries a CLI exit code."""

    code:      str = "GENINV-000"
    exit_code: int = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code":      self.code,
            "error":     type(self).__name__,
            "message":   self.message,
            "details":   {k: str(v) for k, v in self.details.items()},
            "exit_code": self.exit_code,
        }


class DimensionError(GeninvError):
    code = "GENINV-001"


class NumericalFailureError(GeninvError):
    code      = "GENINV-002"
    exit_code = 1


class NonComplementarySubspacesError(GeninvError):
    code = "GENINV-003"


class PairValidationError(GeninvError):
    code = "GENINV-004"


class InapplicableMethodError(GeninvError):
    code = "GENINV-005"

    def __init__(self, method: str, condition: str, **details: Any):
        super().__init__(f"{method} is inapplicable: requires {condition}", **details)
        self.method    = method
        self.condition = condition


class NonexistentInverseError(GeninvError):
    code      = "GENINV-006"
    exit_code = 3

    def __init__(self, inverse: str, index: int, limit: int = 1):
        super().__init__(
            f"{inverse} inverse does not exist: index {index} exceeds {limit}",
            inverse=inverse, index=index,
        )
        self.inverse = inverse
        self.index   = index


class DegenerateWeightError(GeninvError):
    code = "GENINV-007"


class MatrixFileError(GeninvError):
    code      = "GENINV-008"
    exit_code = 4

    def __init__(self, message: str, path: Optional[str] = None, exit_code: Optional[int] = None, **details: Any):
        super().__init__(message, path=path, **details)
        self.path = path
        if exit_code is not None:
            self.exit_code = exit_code
