# app/core/spectral.py

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.config.settings import PHASE_PIVOT_THRESHOLD
from app.core.errors import DimensionError, NonComplementarySubspacesError, NumericalFailureError
from app.core.matrix_core import (
    ComplexMatrix,
    _frozen,
    conj_transpose,
    frobenius_norm,
    mat_mul,
    mat_power,
    require_square,
    zeros,
)
from app.models.verification import IndexInfo, ToleranceConfig

logger = logging.getLogger(__name__)

# Per-dimension bound on ||U^* U - I||_F for factors accepted as unitary.
UNITARITY_TOL = 1e-8


def unitarity_defect(u: np.ndarray) -> float:
    """||U^* U - I||_F for a square U."""
    if u.size == 0:
        return 0.0
    return float(np.linalg.norm(np.conj(u).T @ u - np.eye(u.shape[1])))


@dataclass(frozen=True)
class SvdFactors:
    """
    A = left @ diag(singular_values) @ right^*, with left (q x q) and right
    (n x n) unitary and singular_values nonincreasing of length min(q, n).
    """
    left:            ComplexMatrix
    singular_values: np.ndarray
    right:           ComplexMatrix

    def __post_init__(self):
        q, n = self.left.shape[0], self.right.shape[0]
        if self.left.shape != (q, q) or self.right.shape != (n, n):
            raise NumericalFailureError(
                f"SVD factors must be square, got {self.left.shape} and {self.right.shape}",
                left=self.left.shape, right=self.right.shape,
            )
        s = self.singular_values
        if s.shape != (min(q, n),):
            raise NumericalFailureError(
                f"expected {min(q, n)} singular values for a {q}x{n} matrix, got {s.shape}",
                shape=(q, n),
            )
        if s.size and (s[-1] < 0.0 or np.any(np.diff(s) > 0.0)):
            raise NumericalFailureError("singular values must be nonnegative and nonincreasing", shape=(q, n))
        for name, factor in (("left", self.left), ("right", self.right)):
            defect = unitarity_defect(factor)
            if defect > UNITARITY_TOL * max(1, factor.shape[0]):
                raise NumericalFailureError(
                    f"{name} SVD factor is not unitary: ||U^* U - I||_F = {defect:.3e}",
                    factor=name, defect=defect,
                )

    @property
    def shape(self):
        return (self.left.shape[0], self.right.shape[0])

    def sigma(self) -> ComplexMatrix:
        q, n = self.shape
        out = np.zeros((q, n), dtype=np.complex128)
        p = len(self.singular_values)
        out[:p, :p] = np.diag(self.singular_values)
        return _frozen(out)

    def reconstruct(self) -> ComplexMatrix:
        return _frozen(self.left @ self.sigma() @ np.conj(self.right).T)

    def rank(self, tol: Optional[ToleranceConfig] = None, scale: float = 0.0) -> int:
        return _count_rank(self.singular_values, self.shape, tol or ToleranceConfig(), scale)


# ─────────────────────────────────────────────
# SVD
# ─────────────────────────────────────────────

def svd(a: ComplexMatrix) -> SvdFactors:
    """Full SVD with phase-normalised singular vectors."""
    q, n = a.shape
    if a.size == 0:
        return SvdFactors(_frozen(np.eye(q, dtype=np.complex128)), np.zeros(0), _frozen(np.eye(n, dtype=np.complex128)))
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge for a {q}x{n} matrix: {exc}", shape=a.shape) from exc

    u = np.array(u, dtype=np.complex128)
    v = np.conj(vh).T.astype(np.complex128)
    p = len(s)

    # Paired columns share one phase; unpaired trailing columns are normalised alone.
    for i in range(p):
        phase = _pivot_phase(v[:, i])
        v[:, i] *= np.conj(phase)
        u[:, i] *= np.conj(phase)
    for i in range(p, n):
        v[:, i] *= np.conj(_pivot_phase(v[:, i]))
    for i in range(p, q):
        u[:, i] *= np.conj(_pivot_phase(u[:, i]))

    return SvdFactors(_frozen(u), np.asarray(s, dtype=np.float64), _frozen(v))


def _pivot_phase(vec: np.ndarray) -> complex:
    mags = np.abs(vec)
    hits = np.nonzero(mags > PHASE_PIVOT_THRESHOLD)[0]
    if hits.size == 0:
        return 1.0 + 0.0j
    pivot = vec[hits[0]]
    return complex(pivot / abs(pivot))


def singular_values(a: ComplexMatrix) -> np.ndarray:
    if a.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}", shape=a.shape) from exc


def spectral_norm(a: ComplexMatrix) -> float:
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def power_scale(norm: float, p: int) -> float:
    """
    Magnitude at which a p-fold product of factors with 2-norm `norm` is
    formed. Rounding in such a product sits near eps * p * norm^p, so
    singular values of that size carry no rank.
    """
    if p <= 0:
        return 1.0
    return p * norm ** p


# ─────────────────────────────────────────────
# RANK / INDEX
# ─────────────────────────────────────────────

def _count_rank(s: np.ndarray, shape, tol: ToleranceConfig, scale: float = 0.0) -> int:
    # Relative to max(sigma_max, scale); `scale` is the magnitude a matrix
    # coming out of a product was computed at.
    reference = max(float(s[0]) if s.size else 0.0, scale)
    if reference == 0.0:
        return 0
    threshold = tol.rank_threshold(shape) * reference
    rank = int(np.count_nonzero(s > threshold))
    if 0 < rank < s.size and s[rank - 1] < 10.0 * threshold:
        logger.warning(
            "rank decision for %s matrix is marginal: sigma_%d=%.3e vs threshold %.3e",
            shape, rank, s[rank - 1], threshold,
        )
    return rank


def numerical_rank(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, scale: float = 0.0) -> int:
    return _count_rank(singular_values(a), a.shape, tol or ToleranceConfig(), scale)


def index(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> int:
    """
    Smallest j >= 0 with rank(A^j) == rank(A^(j+1)), A^0 = I.

    A^p is ranked against power_scale(||A||_2, p), not its own largest
    singular value, so a power that is zero up to rounding has rank 0.
    `norm` raises that reference when A is itself a product (a power of WA,
    say) and may already be rounding noise. Rank has to settle within n
    steps; if it does not, the tolerance is wrong for this matrix.
    """
    tol = tol or ToleranceConfig()
    n = require_square(a, "index argument")
    if n == 0:
        return 0
    reference = max(spectral_norm(a), norm or 0.0)
    previous = n
    for j in range(n + 1):
        current = numerical_rank(mat_power(a, j + 1), tol, scale=power_scale(reference, j + 1))
        if current == previous:
            logger.debug("index of %dx%d matrix is %d (rank %d)", n, n, j, current)
            return j
        previous = current
    logger.warning("index search hit the cap n=%d without rank settling", n)
    raise NumericalFailureError(
        f"rank of powers did not stabilise within {n} steps; adjust rank_rel_tol",
        size=n,
    )


def joint_index(
    a: ComplexMatrix,
    w: ComplexMatrix,
    tol: Optional[ToleranceConfig] = None,
    aw_norm: Optional[float] = None,
    wa_norm: Optional[float] = None,
) -> IndexInfo:
    ind_aw = index(mat_mul(a, w), tol, aw_norm)
    ind_wa = index(mat_mul(w, a), tol, wa_norm)
    return IndexInfo(ind_aw=ind_aw, ind_wa=ind_wa, k=max(ind_aw, ind_wa))


# ─────────────────────────────────────────────
# SUBSPACES
# ─────────────────────────────────────────────

def range_basis(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, scale: float = 0.0) -> ComplexMatrix:
    f = svd(a)
    r = f.rank(tol, scale)
    return _frozen(f.left[:, :r].copy())


def null_basis(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, scale: float = 0.0) -> ComplexMatrix:
    f = svd(a)
    r = f.rank(tol, scale)
    return _frozen(f.right[:, r:].copy())


def range_projector(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, scale: float = 0.0) -> ComplexMatrix:
    """Orthogonal projector onto R(A), i.e. A A^dagger."""
    basis = range_basis(a, tol, scale)
    if basis.shape[1] == 0:
        return zeros(a.shape[0], a.shape[0])
    return mat_mul(basis, conj_transpose(basis))


def oblique_projector(
    t_basis: ComplexMatrix,
    s_basis: ComplexMatrix,
    tol: Optional[ToleranceConfig] = None,
) -> ComplexMatrix:
    """Projector onto span(t_basis) along span(s_basis)."""
    tol = tol or ToleranceConfig()
    if t_basis.shape[0] != s_basis.shape[0]:
        raise DimensionError(
            f"bases live in different spaces: {t_basis.shape[0]} vs {s_basis.shape[0]} rows",
            t=t_basis.shape, s=s_basis.shape,
        )
    n = t_basis.shape[0]
    joined = np.hstack([t_basis, s_basis])
    if joined.shape[1] != n or numerical_rank(_frozen(joined), tol) != n:
        raise NonComplementarySubspacesError(
            f"subspaces of dimension {t_basis.shape[1]} and {s_basis.shape[1]} are not complementary in C^{n}",
            t=t_basis.shape, s=s_basis.shape,
        )
    image = np.hstack([t_basis, np.zeros_like(s_basis)])
    # P @ joined = image  <=>  joined^T @ P^T = image^T
    p = np.linalg.solve(joined.T, image.T).T
    p = _frozen(p)
    defect = frobenius_norm(_frozen(p @ p - p))
    if defect > tol.check_tol * (1.0 + frobenius_norm(p)):
        logger.warning("oblique projector is ill-conditioned: ||P^2 - P|| = %.3e", defect)
    return p
