from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ToleranceConfig(BaseModel):
    """
    Numerical thresholds shared by every engine.

    rank_rel_tol=None resolves to max(q, n) * eps relative to the largest
    singular value of the matrix being ranked.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    rank_rel_tol: Optional[float] = None
    check_tol:    float = 1e-10

    @field_validator("rank_rel_tol", "check_tol")
    @classmethod
    def must_be_unit_interval(cls, v: Optional[float]) -> Optional[float]:
        if v is None:
            return v
        if not (0.0 < v < 1.0):
            raise ValueError(f"tolerance must lie strictly between 0 and 1 (got {v})")
        return v

    def rank_threshold(self, shape: Tuple[int, int]) -> float:
        if self.rank_rel_tol is not None:
            return self.rank_rel_tol
        return max(shape) * float(np.finfo(np.float64).eps)


class IndexInfo(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    ind_aw: int = Field(ge=0)
    ind_wa: int = Field(ge=0)
    k:      int = Field(ge=0)

    @model_validator(mode="after")
    def k_is_joint_index(self) -> "IndexInfo":
        if self.k != max(self.ind_aw, self.ind_wa):
            raise ValueError(
                f"k ({self.k}) must equal max(Ind(AW)={self.ind_aw}, Ind(WA)={self.ind_wa})"
            )
        if abs(self.ind_aw - self.ind_wa) > 1:
            raise ValueError(
                f"Ind(AW)={self.ind_aw} and Ind(WA)={self.ind_wa} differ by more than one; "
                "the rank tolerance is too tight or too loose for this pair"
            )
        return self


class RandomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed:         int   = Field(ge=0)
    q:            int   = Field(gt=0)
    n:            int   = Field(gt=0)
    target_index: int   = Field(ge=0)
    magnitude:    float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def index_fits_dimensions(self) -> "RandomSpec":
        if self.target_index > min(self.q, self.n):
            raise ValueError(
                f"target_index ({self.target_index}) must not exceed min(q, n) = {min(self.q, self.n)}"
            )
        return self


# ─────────────────────────────────────────────
# REPORTS
# ─────────────────────────────────────────────

class CrossCheckCell(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method:       str
    m:            int
    error:        Optional[float] = None
    inapplicable: bool = False
    reason:       Optional[str] = None

    @model_validator(mode="after")
    def flag_xor_number(self) -> "CrossCheckCell":
        if self.inapplicable and self.error is not None:
            raise ValueError("an inapplicable cell must not carry a number")
        if not self.inapplicable:
            if self.error is None or not np.isfinite(self.error) or self.error < 0:
                raise ValueError(f"applicable cell needs a finite nonnegative error (got {self.error})")
        return self


class CrossCheckReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m_values: List[int]
    methods:  List[str]
    rows:     List[CrossCheckCell]
    k:        int

    @field_validator("m_values")
    @classmethod
    def m_positive(cls, v: List[int]) -> List[int]:
        if not v or any(m < 1 for m in v):
            raise ValueError(f"m values must be positive integers (got {v})")
        return v

    def cell(self, method: str, m: int) -> CrossCheckCell:
        for c in self.rows:
            if c.method == method and c.m == m:
                return c
        raise KeyError((method, m))

    def applicable_cells(self) -> List[CrossCheckCell]:
        return [c for c in self.rows if not c.inapplicable]

    def inapplicable_cells(self) -> List[CrossCheckCell]:
        return [c for c in self.rows if c.inapplicable]

    def max_error(self) -> float:
        errors = [c.error for c in self.applicable_cells()]
        return max(errors) if errors else 0.0


class ResidualViolation(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name:      str
    residual:  float
    tolerance: float


class ResidualReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m:           int
    k:           int
    residuals:   Dict[str, float]
    informative: Dict[str, float] = Field(default_factory=dict)
    violations:  List[ResidualViolation] = Field(default_factory=list)
    passed:      bool = True
