import math
from enum import Enum
from typing import Any, List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class FixtureName(Enum):
    EX41 = "ex41"


class MatrixFile(BaseModel):
    """On-disk matrix: {"rows": q, "cols": n, "data": [[re, im], ...]} in row-major order."""
    model_config = ConfigDict(extra="forbid")

    rows: int = Field(gt=0)
    cols: int = Field(gt=0)
    data: List[List[float]]

    @field_validator("data", mode="before")
    @classmethod
    def components_are_numbers(cls, v: Any) -> Any:
        if not isinstance(v, list):
            raise ValueError("data must be a list of [re, im] pairs")
        for i, pair in enumerate(v):
            if not isinstance(pair, list):
                raise ValueError(f"entry {i} must be an [re, im] pair, got {type(pair).__name__}")
            for x in pair:
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise ValueError(f"entry {i} has a non-numeric component {x!r}")
        return v

    @field_validator("data")
    @classmethod
    def entries_are_finite_pairs(cls, v: List[List[float]]) -> List[List[float]]:
        for i, pair in enumerate(v):
            if len(pair) != 2:
                raise ValueError(f"entry {i} must be an [re, im] pair (got {len(pair)} components)")
            if not all(math.isfinite(x) for x in pair):
                raise ValueError(f"entry {i} is not finite: {pair}")
        return v

    @model_validator(mode="after")
    def data_matches_shape(self) -> "MatrixFile":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f"data length {len(self.data)} does not match rows*cols = "
                f"{self.rows}*{self.cols} = {self.rows * self.cols}"
            )
        return self
