# app/core/geninv.py
#
# Classical and W-weighted generalized inverses, the W-product algebra, and
# the defining-equation residuals each inverse is checked against.

import logging
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from app.core.errors import (
    DimensionError,
    InapplicableMethodError,
    NonexistentInverseError,
    NumericalFailureError,
    PairValidationError,
)
from app.core.matrix_core import (
    ComplexMatrix,
    _frozen,
    as_matrix,
    conj_transpose,
    frobenius_norm,
    identity,
    mat_chain,
    mat_mul,
    mat_power,
    mat_sub,
    require_square,
    zeros,
)
from app.core.spectral import index, joint_index, power_scale, range_projector, spectral_norm, svd
from app.models.verification import IndexInfo, ToleranceConfig

logger = logging.getLogger(__name__)


# ─────────────────────────────────────────────
# WEIGHTED PAIR
# ─────────────────────────────────────────────

class WeightedPair(BaseModel):
    """
    A validated (A, W) pair: A is q x n, W is n x q and nonzero. The joint
    index k = max(Ind(AW), Ind(WA)) is computed once here and reused by
    every formula, so all representations agree on the same k.

    aw_norm / wa_norm are the 2-norms powers of AW and WA are ranked
    against. They default to ||AW||_2 and ||WA||_2; a pair built from
    W-powers of another pair inherits the larger scale of its parent.
    """
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    a:          Any
    w:          Any
    index_info: IndexInfo
    tolerance:  ToleranceConfig = ToleranceConfig()
    aw_norm:    float = 0.0
    wa_norm:    float = 0.0

    @model_validator(mode="before")
    @classmethod
    def validate_pair(cls, data: Dict[str, Any]) -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise PairValidationError("WeightedPair expects a mapping with 'a' and 'w'")
        data = dict(data)
        try:
            a = as_matrix(data.get("a"))
            w = as_matrix(data.get("w"))
        except DimensionError as exc:
            raise PairValidationError(f"invalid pair matrix: {exc.message}") from exc

        q, n = a.shape
        if w.shape != (n, q):
            raise PairValidationError(
                f"weight must be {n}x{q} for a {q}x{n} matrix, got {w.shape[0]}x{w.shape[1]}",
                a=a.shape, w=w.shape,
            )
        if not np.any(w):
            raise PairValidationError("weight matrix W must be nonzero")

        tol = data.get("tolerance") or ToleranceConfig()
        if isinstance(tol, dict):
            tol = ToleranceConfig(**tol)
        aw_norm = max(spectral_norm(a @ w), float(data.get("aw_norm") or 0.0))
        wa_norm = max(spectral_norm(w @ a), float(data.get("wa_norm") or 0.0))
        try:
            info = joint_index(a, w, tol, aw_norm, wa_norm)
        except ValidationError as exc:
            raise PairValidationError(f"index invariant violated: {exc.errors()[0]['msg']}") from exc

        stored = data.get("index_info")
        if stored is not None:
            stored = stored if isinstance(stored, IndexInfo) else IndexInfo(**stored)
            if stored != info:
                raise PairValidationError(
                    f"stored index info {stored.model_dump()} does not match recomputed {info.model_dump()}"
                )

        data.update(a=a, w=w, index_info=info, tolerance=tol, aw_norm=aw_norm, wa_norm=wa_norm)
        return data

    @classmethod
    def of(cls, a: Any, w: Any, tol: Optional[ToleranceConfig] = None) -> "WeightedPair":
        return cls(a=a, w=w, tolerance=tol or ToleranceConfig())

    @property
    def k(self) -> int:
        return self.index_info.k

    @property
    def q(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @property
    def aw(self) -> ComplexMatrix:
        return mat_mul(self.a, self.w)

    @property
    def wa(self) -> ComplexMatrix:
        return mat_mul(self.w, self.a)

    def has_identity_weight(self) -> bool:
        if self.q != self.n:
            return False
        return frobenius_norm(mat_sub(self.w, identity(self.n))) <= self.tolerance.check_tol

    def aw_scale(self, j: int) -> float:
        """Magnitude (AW)^j is formed at."""
        return power_scale(self.aw_norm, j)

    def wa_scale(self, j: int) -> float:
        return power_scale(self.wa_norm, j)

    def with_matrix(self, a: Any, power: int = 1) -> "WeightedPair":
        """
        Same weight and tolerance, different A (used by formulas that invert
        A^{*s}). With `power` = s the new pair ranks against (AW)^s and (WA)^s
        at this pair's scale.
        """
        return WeightedPair(
            a=a, w=self.w, tolerance=self.tolerance,
            aw_norm=self.aw_scale(power) if power > 1 else 0.0,
            wa_norm=self.wa_scale(power) if power > 1 else 0.0,
        )


# ─────────────────────────────────────────────
# W-PRODUCT ALGEBRA
# ─────────────────────────────────────────────

def w_product(a: ComplexMatrix, b: ComplexMatrix, w: ComplexMatrix) -> ComplexMatrix:
    """A * B = A W B."""
    if a.shape != b.shape or w.shape != (a.shape[1], a.shape[0]):
        raise DimensionError(
            f"W-product needs A, B of equal shape q x n and W of shape n x q; "
            f"got A {a.shape}, B {b.shape}, W {w.shape}",
        )
    return mat_chain(a, w, b)


def _check_weight(a: ComplexMatrix, w: ComplexMatrix) -> None:
    if w.shape != (a.shape[1], a.shape[0]):
        raise DimensionError(f"weight {w.shape} is not conformable with {a.shape}", a=a.shape, w=w.shape)


def w_power(a: ComplexMatrix, w: ComplexMatrix, l: int) -> ComplexMatrix:
    """A^{*l} = A (WA)^(l-1) for l >= 1. Zeroth powers only exist fused with W."""
    _check_weight(a, w)
    if l < 1:
        raise DimensionError(
            f"bare W-power needs l >= 1 (got {l}); use w_power_left / w_power_right for l = 0"
        )
    return mat_mul(a, mat_power(mat_mul(w, a), l - 1))


def w_power_left(a: ComplexMatrix, w: ComplexMatrix, l: int) -> ComplexMatrix:
    """A^{*l} W, with A^{*0} W = I_q."""
    _check_weight(a, w)
    if l == 0:
        return identity(a.shape[0])
    return mat_mul(w_power(a, w, l), w)


def w_power_right(a: ComplexMatrix, w: ComplexMatrix, l: int) -> ComplexMatrix:
    """W A^{*l}, with W A^{*0} = I_n."""
    _check_weight(a, w)
    if l == 0:
        return identity(a.shape[1])
    return mat_mul(w, w_power(a, w, l))


# ─────────────────────────────────────────────
# CLASSICAL INVERSES
# ─────────────────────────────────────────────

def moore_penrose(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, scale: float = 0.0) -> ComplexMatrix:
    """Truncated-SVD pseudoinverse; `scale` is the magnitude a product argument was formed at."""
    f = svd(a)
    r = f.rank(tol, scale)
    if r == 0:
        return zeros(a.shape[1], a.shape[0])
    v_r = f.right[:, :r]
    u_r = f.left[:, :r]
    return _frozen((v_r / f.singular_values[:r]) @ np.conj(u_r).T)


# `norm` on the square-matrix inverses below is a lower bound on the 2-norm
# that powers of A are ranked against. Callers pass it when A is itself a
# product whose entries may be pure rounding.

def _reference(a: ComplexMatrix, norm: Optional[float]) -> float:
    return max(spectral_norm(a), norm or 0.0)


def _drazin_at(a: ComplexMatrix, l: int, tol: Optional[ToleranceConfig], ref: float) -> ComplexMatrix:
    a_l = mat_power(a, l)
    pinv = moore_penrose(mat_power(a, 2 * l + 1), tol, scale=power_scale(ref, 2 * l + 1))
    return mat_chain(a_l, pinv, a_l)


def drazin(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> ComplexMatrix:
    """A^D = A^l (A^(2l+1))^dagger A^l with l = Ind(A)."""
    require_square(a, "Drazin argument")
    ref = _reference(a, norm)
    return _drazin_at(a, index(a, tol, ref), tol, ref)


def group_inverse(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> ComplexMatrix:
    require_square(a, "group-inverse argument")
    ref = _reference(a, norm)
    ind = index(a, tol, ref)
    if ind > 1:
        raise NonexistentInverseError("group", ind)
    return _drazin_at(a, ind, tol, ref)


def core_ep(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> ComplexMatrix:
    """A^(core-EP) = A^D A^d (A^d)^dagger with d = Ind(A)."""
    require_square(a, "core-EP argument")
    ref = _reference(a, norm)
    d = index(a, tol, ref)
    a_d = mat_power(a, d)
    return mat_chain(_drazin_at(a, d, tol, ref), a_d, moore_penrose(a_d, tol, scale=power_scale(ref, d)))


def core_inverse(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> ComplexMatrix:
    require_square(a, "core-inverse argument")
    ref = _reference(a, norm)
    ind = index(a, tol, ref)
    if ind > 1:
        raise NonexistentInverseError("core", ind)
    return mat_chain(_drazin_at(a, ind, tol, ref), a, moore_penrose(a, tol, scale=ref))


def _require_m(m: int, what: str, minimum: int = 1) -> None:
    if m < minimum:
        raise InapplicableMethodError(what, f"m >= {minimum}", m=m)


def m_weak_group(
    a: ComplexMatrix,
    m: int,
    tol: Optional[ToleranceConfig] = None,
    norm: Optional[float] = None,
) -> ComplexMatrix:
    """A^{w_m} = (A^(core-EP))^(m+1) A^m."""
    _require_m(m, "m-weak-group")
    require_square(a, "m-weak-group argument")
    return mat_mul(mat_power(core_ep(a, tol, norm), m + 1), mat_power(a, m))


def weak_group(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> ComplexMatrix:
    return m_weak_group(a, 1, tol, norm)


def generalized_group(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None, norm: Optional[float] = None) -> ComplexMatrix:
    """The m = 2 member of the m-weak group family."""
    return m_weak_group(a, 2, tol, norm)


# ─────────────────────────────────────────────
# W-WEIGHTED INVERSES
# ─────────────────────────────────────────────

def weighted_core_ep(p: WeightedPair) -> ComplexMatrix:
    """A^(core-EP,W) = A ((WA)^(core-EP))^2."""
    return mat_mul(p.a, mat_power(core_ep(p.wa, p.tolerance, p.wa_norm), 2))


def weighted_drazin(p: WeightedPair) -> ComplexMatrix:
    """A^(D,W) = A ((WA)^D)^2."""
    return mat_mul(p.a, mat_power(drazin(p.wa, p.tolerance, p.wa_norm), 2))


def weighted_group(p: WeightedPair) -> ComplexMatrix:
    if p.k > 1:
        raise NonexistentInverseError("weighted-group", p.k)
    return mat_mul(p.a, mat_power(group_inverse(p.wa, p.tolerance, p.wa_norm), 2))


def weighted_core(p: WeightedPair) -> ComplexMatrix:
    if p.k > 1:
        raise NonexistentInverseError("weighted-core", p.k)
    return weighted_core_ep(p)


def weighted_weak_group(p: WeightedPair) -> ComplexMatrix:
    """A^(w,W) = (A^(core-EP,W) W A^(core-EP,W)) W A."""
    y = weighted_core_ep(p)
    return mat_chain(y, p.w, y, p.w, p.a)


# ─────────────────────────────────────────────
# DEFINING-EQUATION RESIDUALS
# ─────────────────────────────────────────────
# Each residual is ||L - R||_F / (1 + max(||L||_F, ||R||_F)).

def relative_gap(lhs: ComplexMatrix, rhs: ComplexMatrix) -> float:
    scale = 1.0 + max(frobenius_norm(lhs), frobenius_norm(rhs))
    return frobenius_norm(mat_sub(lhs, rhs)) / scale


def penrose_residuals(a: ComplexMatrix, x: ComplexMatrix) -> Dict[str, float]:
    ax = mat_mul(a, x)
    xa = mat_mul(x, a)
    return {
        "penrose.axa":     relative_gap(mat_mul(ax, a), a),
        "penrose.xax":     relative_gap(mat_mul(x, ax), x),
        "penrose.ax_herm": relative_gap(conj_transpose(ax), ax),
        "penrose.xa_herm": relative_gap(conj_transpose(xa), xa),
    }


def weighted_drazin_residuals(p: WeightedPair, x: ComplexMatrix) -> Dict[str, float]:
    aw = p.aw
    aw_k = mat_power(aw, p.k)
    return {
        "w_drazin.power":    relative_gap(aw_k, mat_chain(mat_power(aw, p.k + 1), x, p.w)),
        "w_drazin.outer":    relative_gap(x, mat_chain(x, p.w, p.a, p.w, x)),
        "w_drazin.commute":  relative_gap(mat_chain(aw, x), mat_chain(x, p.wa)),
    }


def weighted_core_ep_residuals(p: WeightedPair, x: ComplexMatrix) -> Dict[str, float]:
    tol = p.tolerance
    proj_wa = range_projector(mat_power(p.wa, p.k), tol, p.wa_scale(p.k))
    proj_aw = range_projector(mat_power(p.aw, p.k), tol, p.aw_scale(p.k))
    outside = mat_sub(x, mat_mul(proj_aw, x))
    return {
        "w_core_ep.projector": relative_gap(mat_chain(p.w, p.a, p.w, x), proj_wa),
        "w_core_ep.range":     frobenius_norm(outside) / (1.0 + frobenius_norm(x)),
    }


def weighted_weak_group_residuals(p: WeightedPair, x: ComplexMatrix, core_ep_w: Optional[ComplexMatrix] = None) -> Dict[str, float]:
    y = core_ep_w if core_ep_w is not None else weighted_core_ep(p)
    awx = mat_chain(p.a, p.w, x)
    return {
        "w_weak_group.square": relative_gap(mat_chain(awx, p.w, x), x),
        "w_weak_group.awx":    relative_gap(awx, mat_chain(y, p.w, p.a)),
    }


def _verified(name: str, x: ComplexMatrix, residuals: Dict[str, float], tol: ToleranceConfig) -> ComplexMatrix:
    offenders = {k: v for k, v in residuals.items() if v > tol.check_tol}
    if offenders:
        raise NumericalFailureError(
            f"{name} failed its defining equations: "
            + ", ".join(f"{k}={v:.3e}" for k, v in sorted(offenders.items())),
        )
    logger.debug("%s verified: max residual %.3e", name, max(residuals.values(), default=0.0))
    return x


def verified_moore_penrose(a: ComplexMatrix, tol: Optional[ToleranceConfig] = None) -> ComplexMatrix:
    tol = tol or ToleranceConfig()
    x = moore_penrose(a, tol)
    return _verified("moore_penrose", x, penrose_residuals(a, x), tol)


def verified_weighted(p: WeightedPair, inverse: Callable[[WeightedPair], ComplexMatrix]) -> ComplexMatrix:
    """Compute a W-weighted inverse and check it against its own defining equations."""
    checks = {
        weighted_drazin:     weighted_drazin_residuals,
        weighted_group:      weighted_drazin_residuals,
        weighted_core_ep:    weighted_core_ep_residuals,
        weighted_core:       weighted_core_ep_residuals,
        weighted_weak_group: weighted_weak_group_residuals,
    }
    if inverse not in checks:
        raise DimensionError(f"no defining equations registered for {getattr(inverse, '__name__', inverse)}")
    x = inverse(p)
    return _verified(inverse.__name__, x, checks[inverse](p, x), p.tolerance)
