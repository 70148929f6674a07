# app/core/matrix_core.py
#
# Dense complex matrix plumbing. A ComplexMatrix is a read-only 2-D complex128
# numpy array with finite entries; every function returns a fresh read-only
# array and never mutates its inputs.

import logging
from typing import Any

import numpy as np
import numpy.typing as npt

from app.core.errors import DimensionError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]


# ─────────────────────────────────────────────
# CONSTRUCTION
# ─────────────────────────────────────────────

def as_matrix(value: Any) -> ComplexMatrix:
    """Validate and freeze anything array-like into a ComplexMatrix."""
    arr = np.array(value, dtype=np.complex128, copy=True)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got {arr.ndim}-D input", shape=arr.shape)
    if not np.all(np.isfinite(arr)):
        raise DimensionError("matrix has non-finite entries", shape=arr.shape)
    arr.setflags(write=False)
    return arr


def _frozen(arr: np.ndarray) -> ComplexMatrix:
    out = np.asarray(arr, dtype=np.complex128)
    if out.flags.writeable:
        out.setflags(write=False)
    return out


def identity(n: int) -> ComplexMatrix:
    return _frozen(np.eye(n, dtype=np.complex128))


def zeros(rows: int, cols: int) -> ComplexMatrix:
    return _frozen(np.zeros((rows, cols), dtype=np.complex128))


def is_square(a: ComplexMatrix) -> bool:
    return a.shape[0] == a.shape[1]


def require_square(a: ComplexMatrix, what: str = "matrix") -> int:
    if not is_square(a):
        raise DimensionError(f"{what} must be square, got shape {a.shape}", shape=a.shape)
    return a.shape[0]


# ─────────────────────────────────────────────
# ARITHMETIC
# ─────────────────────────────────────────────

def conj_transpose(a: ComplexMatrix) -> ComplexMatrix:
    return _frozen(np.conj(a).T.copy())


def mat_mul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}",
            left=a.shape, right=b.shape,
        )
    return _frozen(a @ b)


def mat_chain(*factors: ComplexMatrix) -> ComplexMatrix:
    """Left-to-right product of conformable factors."""
    if not factors:
        raise DimensionError("empty product")
    out = factors[0]
    for f in factors[1:]:
        out = mat_mul(out, f)
    return _frozen(out)


def mat_sub(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    if a.shape != b.shape:
        raise DimensionError(f"cannot subtract {b.shape} from {a.shape}", left=a.shape, right=b.shape)
    return _frozen(a - b)


def mat_add(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}", left=a.shape, right=b.shape)
    return _frozen(a + b)


def mat_power(a: ComplexMatrix, p: int) -> ComplexMatrix:
    """A^p by repeated multiplication; A^0 is the identity."""
    n = require_square(a, "power base")
    if p < 0:
        raise DimensionError(f"matrix power must be nonnegative (got {p})")
    out = np.eye(n, dtype=np.complex128)
    for _ in range(p):
        out = out @ a
    return _frozen(out)


def frobenius_norm(a: ComplexMatrix) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, "fro"))


def distance(a: ComplexMatrix, b: ComplexMatrix) -> float:
    return frobenius_norm(mat_sub(a, b))


def block(top_left: ComplexMatrix, top_right: ComplexMatrix, rows: int, cols: int) -> ComplexMatrix:
    """Assemble [[top_left, top_right], [0, 0]] into a rows x cols matrix."""
    out = np.zeros((rows, cols), dtype=np.complex128)
    r, c = top_left.shape
    out[:r, :c] = top_left
    out[:r, c:c + top_right.shape[1]] = top_right
    return _frozen(out)
