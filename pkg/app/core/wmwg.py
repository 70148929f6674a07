# app/core/wmwg.py
#
# The W-weighted m-weak group inverse
#
#     A^(w_m,W) = (A^(core-EP,W))^{*(m+1)} W A^{*m}
#
# together with its alternative representations, the four projectors it
# induces, the m / m-1 commutation identity and the SVD block form.

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from app.core.errors import DegenerateWeightError, InapplicableMethodError, NumericalFailureError
from app.core.geninv import (
    WeightedPair,
    _require_m,
    core_ep,
    drazin,
    m_weak_group,
    moore_penrose,
    weighted_core,
    weighted_core_ep,
    weighted_drazin,
    weighted_group,
    weighted_weak_group,
    w_power,
    w_power_left,
    w_power_right,
)
from app.core.matrix_core import (
    ComplexMatrix,
    _frozen,
    block,
    conj_transpose,
    frobenius_norm,
    mat_chain,
    mat_mul,
    mat_power,
    mat_sub,
    zeros,
)
from app.core.spectral import (
    UNITARITY_TOL,
    null_basis,
    range_basis,
    range_projector,
    spectral_norm,
    svd,
    unitarity_defect,
)

logger = logging.getLogger(__name__)


# ─────────────────────────────────────────────
# METHOD / PROJECTOR CATALOGUES
# ─────────────────────────────────────────────

class ReprMethod(Enum):
    DEFINITIONAL      = "Definitional"
    DRAZIN_PROJECTOR  = "DrazinProjector"
    PINV_POWER        = "PinvPower"
    PINV_PROJECTOR    = "PinvProjector"
    WEAK_GROUP_RIGHT  = "WeakGroupRight"
    WEAK_GROUP_LEFT   = "WeakGroupLeft"
    WEIGHTED_GROUP    = "WeightedGroup"
    SQUARED_MWG       = "SquaredMwg"
    CORE_K_PLUS_1     = "CoreKPlus1"
    CORE_K            = "CoreK"
    BILATERAL_MWG     = "BilateralMwg"
    BILATERAL_CORE_EP = "BilateralCoreEp"
    BILATERAL_DRAZIN  = "BilateralDrazin"
    SVD_CANONICAL     = "SvdCanonical"

    @property
    def formula(self) -> str:
        return _FORMULAS[self]

    @classmethod
    def from_tag(cls, tag: str) -> "ReprMethod":
        for member in cls:
            if member.value.lower() == tag.strip().lower():
                return member
        raise InapplicableMethodError(tag, "a known representation tag: " + ", ".join(m.value for m in cls))


_FORMULAS: Dict[ReprMethod, str] = {
    ReprMethod.DEFINITIONAL:      "(A^(cEP,W))^{*(m+1)} W A^{*m}",
    ReprMethod.DRAZIN_PROJECTOR:  "(A^(D,W))^{*(m+1)} P_R((WA)^k) W A^{*m}",
    ReprMethod.PINV_POWER:        "A^{*l} W (W A^{*(l+m+1)} W)^+ W A^{*m}, l >= k",
    ReprMethod.PINV_PROJECTOR:    "(W A^{*(m+1)} W P_R((AW)^k))^+ W A^{*m}",
    ReprMethod.WEAK_GROUP_RIGHT:  "A^{*(m-1)} W (A^{*m})^(w,W)",
    ReprMethod.WEAK_GROUP_LEFT:   "(A^(w,W))^{*m} W A^{*(m-1)}",
    ReprMethod.WEIGHTED_GROUP:    "((AW)^m A^(cEP,W) W A)^(#,W) W A^{*(m-1)}",
    ReprMethod.SQUARED_MWG:       "A ((WA)^(w_m))^2",
    ReprMethod.CORE_K_PLUS_1:     "A^{*(k-m)} W (A^{*(k+1)})^(core,W) W A^{*m}, k >= m",
    ReprMethod.CORE_K:            "A^{*(k-m-1)} W (A^{*k})^(core,W) W A^{*m}, k >= m+1",
    ReprMethod.BILATERAL_MWG:     "(AW)^(w_m) A (WA)^(w_m)",
    ReprMethod.BILATERAL_CORE_EP: "(AW)^(cEP) A (WA)^(w_m)",
    ReprMethod.BILATERAL_DRAZIN:  "(AW)^D A (WA)^(w_m)",
    ReprMethod.SVD_CANONICAL:     "T [[(S1K1)^(w_m,S2K2), B], [0, 0]] S^*",
}


class ProjectorKind(Enum):
    WAW_X  = "WAW_X"
    X_WAW  = "X_WAW"
    AW_X_W = "AW_X_W"
    W_X_WA = "W_X_WA"


# ─────────────────────────────────────────────
# DEFINITION
# ─────────────────────────────────────────────

def wmwg(p: WeightedPair, m: int) -> ComplexMatrix:
    _require_m(m, "wmwg")
    y = weighted_core_ep(p)
    return mat_mul(w_power(y, p.w, m + 1), w_power_right(p.a, p.w, m))


# ─────────────────────────────────────────────
# REPRESENTATIONS
# ─────────────────────────────────────────────

def represent(p: WeightedPair, m: int, method: ReprMethod, l: Optional[int] = None) -> ComplexMatrix:
    """
    Evaluate one representation of A^(w_m,W). Methods whose hypotheses fail
    raise InapplicableMethodError instead of falling back to another formula.
    `l` is only read by PinvPower and defaults to k.
    """
    _require_m(m, method.value)
    logger.debug("represent %s (m=%d, k=%d)", method.value, m, p.k)
    if method is ReprMethod.PINV_POWER:
        return _pinv_power(p, m, p.k if l is None else l)
    return _DISPATCH[method](p, m)


def _drazin_projector(p: WeightedPair, m: int) -> ComplexMatrix:
    d = weighted_drazin(p)
    proj = range_projector(mat_power(p.wa, p.k), p.tolerance, p.wa_scale(p.k))
    return mat_chain(w_power(d, p.w, m + 1), proj, w_power_right(p.a, p.w, m))


def _pinv_power(p: WeightedPair, m: int, l: int) -> ComplexMatrix:
    if l < p.k:
        raise InapplicableMethodError(ReprMethod.PINV_POWER.value, f"l >= k (l={l}, k={p.k})", l=l, k=p.k)
    inner = mat_mul(w_power_right(p.a, p.w, l + m + 1), p.w)
    return mat_chain(
        w_power_left(p.a, p.w, l),
        moore_penrose(inner, p.tolerance, scale=p.wa_scale(l + m + 1) * spectral_norm(p.w)),
        w_power_right(p.a, p.w, m),
    )


def _pinv_projector(p: WeightedPair, m: int) -> ComplexMatrix:
    proj = range_projector(mat_power(p.aw, p.k), p.tolerance, p.aw_scale(p.k))
    inner = mat_chain(w_power_right(p.a, p.w, m + 1), p.w, proj)
    scale = p.wa_scale(m + 1) * spectral_norm(p.w)
    return mat_mul(moore_penrose(inner, p.tolerance, scale=scale), w_power_right(p.a, p.w, m))


def _weak_group_right(p: WeightedPair, m: int) -> ComplexMatrix:
    sub = p if m == 1 else p.with_matrix(w_power(p.a, p.w, m), power=m)
    return mat_mul(w_power_left(p.a, p.w, m - 1), weighted_weak_group(sub))


def _weak_group_left(p: WeightedPair, m: int) -> ComplexMatrix:
    z = weighted_weak_group(p)
    return mat_mul(w_power(z, p.w, m), w_power_right(p.a, p.w, m - 1))


def _weighted_group(p: WeightedPair, m: int) -> ComplexMatrix:
    c = mat_chain(mat_power(p.aw, m), weighted_core_ep(p), p.w, p.a)
    return mat_mul(weighted_group(p.with_matrix(c)), w_power_right(p.a, p.w, m - 1))


def _squared_mwg(p: WeightedPair, m: int) -> ComplexMatrix:
    return mat_mul(p.a, mat_power(m_weak_group(p.wa, m, p.tolerance, p.wa_norm), 2))


def _core_k_plus_1(p: WeightedPair, m: int) -> ComplexMatrix:
    if p.k < m:
        raise InapplicableMethodError(ReprMethod.CORE_K_PLUS_1.value, f"k >= m (k={p.k}, m={m})", k=p.k, m=m)
    core = weighted_core(p.with_matrix(w_power(p.a, p.w, p.k + 1), power=p.k + 1))
    return mat_chain(w_power_left(p.a, p.w, p.k - m), core, w_power_right(p.a, p.w, m))


def _core_k(p: WeightedPair, m: int) -> ComplexMatrix:
    if p.k < m + 1:
        raise InapplicableMethodError(ReprMethod.CORE_K.value, f"k >= m+1 (k={p.k}, m={m})", k=p.k, m=m)
    core = weighted_core(p.with_matrix(w_power(p.a, p.w, p.k), power=p.k))
    return mat_chain(w_power_left(p.a, p.w, p.k - m - 1), core, w_power_right(p.a, p.w, m))


def _bilateral(left: Callable[[WeightedPair, int], ComplexMatrix]) -> Callable[[WeightedPair, int], ComplexMatrix]:
    def evaluate(p: WeightedPair, m: int) -> ComplexMatrix:
        return mat_chain(left(p, m), p.a, m_weak_group(p.wa, m, p.tolerance, p.wa_norm))
    return evaluate


_DISPATCH: Dict[ReprMethod, Callable[[WeightedPair, int], ComplexMatrix]] = {
    ReprMethod.DEFINITIONAL:      wmwg,
    ReprMethod.DRAZIN_PROJECTOR:  _drazin_projector,
    ReprMethod.PINV_PROJECTOR:    _pinv_projector,
    ReprMethod.WEAK_GROUP_RIGHT:  _weak_group_right,
    ReprMethod.WEAK_GROUP_LEFT:   _weak_group_left,
    ReprMethod.WEIGHTED_GROUP:    _weighted_group,
    ReprMethod.SQUARED_MWG:       _squared_mwg,
    ReprMethod.CORE_K_PLUS_1:     _core_k_plus_1,
    ReprMethod.CORE_K:            _core_k,
    ReprMethod.BILATERAL_MWG:     _bilateral(lambda p, m: m_weak_group(p.aw, m, p.tolerance, p.aw_norm)),
    ReprMethod.BILATERAL_CORE_EP: _bilateral(lambda p, m: core_ep(p.aw, p.tolerance, p.aw_norm)),
    ReprMethod.BILATERAL_DRAZIN:  _bilateral(lambda p, m: drazin(p.aw, p.tolerance, p.aw_norm)),
    ReprMethod.SVD_CANONICAL:     lambda p, m: canonical_wmwg(p, m),
}


# ─────────────────────────────────────────────
# PROJECTORS
# ─────────────────────────────────────────────

def projector(p: WeightedPair, m: int, kind: ProjectorKind, x: Optional[ComplexMatrix] = None) -> ComplexMatrix:
    x = wmwg(p, m) if x is None else x
    a, w = p.a, p.w
    if kind is ProjectorKind.WAW_X:
        return mat_chain(w, a, w, x)
    if kind is ProjectorKind.X_WAW:
        return mat_chain(x, w, a, w)
    if kind is ProjectorKind.AW_X_W:
        return mat_chain(a, w, x, w)
    return mat_chain(w, x, w, a)


def projector_bases(p: WeightedPair, m: int, kind: ProjectorKind) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """
    (t, s): orthonormal bases of the range the projector maps onto and of
    the null space it maps along. Both spaces are read off products of
    powers, ranked at the scale those powers were formed at.
    """
    tol = p.tolerance
    w_norm = spectral_norm(p.w)
    wa_k = mat_power(p.wa, p.k)
    wa_k_h = conj_transpose(wa_k)
    if kind is ProjectorKind.WAW_X:
        range_matrix, range_scale = wa_k, p.wa_scale(p.k)
        null_matrix, null_scale = mat_mul(wa_k_h, mat_power(p.wa, m)), p.wa_scale(p.k + m)
    elif kind is ProjectorKind.X_WAW:
        range_matrix, range_scale = mat_power(p.aw, p.k), p.aw_scale(p.k)
        null_matrix = mat_chain(wa_k_h, mat_power(p.wa, m + 1), p.w)
        null_scale = p.wa_scale(p.k + m + 1) * w_norm
    elif kind is ProjectorKind.AW_X_W:
        range_matrix, range_scale = mat_power(p.aw, p.k), p.aw_scale(p.k)
        null_matrix = mat_chain(wa_k_h, p.w, mat_power(p.aw, m))
        null_scale = p.wa_scale(p.k) * w_norm * p.aw_scale(m)
    else:
        range_matrix, range_scale = wa_k, p.wa_scale(p.k)
        null_matrix, null_scale = mat_mul(wa_k_h, mat_power(p.wa, m + 1)), p.wa_scale(p.k + m + 1)
    return range_basis(range_matrix, tol, range_scale), null_basis(null_matrix, tol, null_scale)


def projector_residuals(
    p: WeightedPair,
    m: int,
    kind: ProjectorKind,
    x: Optional[ComplexMatrix] = None,
) -> Dict[str, float]:
    """Idempotency, range-fixing and null-annihilation defects, each relative."""
    proj = projector(p, m, kind, x)
    t, s = projector_bases(p, m, kind)
    size = proj.shape[0]

    idem = frobenius_norm(mat_sub(mat_mul(proj, proj), proj)) / (1.0 + frobenius_norm(proj))
    fixes = frobenius_norm(mat_sub(mat_mul(proj, t), t)) / (1.0 + frobenius_norm(t)) if t.shape[1] else 0.0
    kills = frobenius_norm(mat_mul(proj, s)) / (1.0 + frobenius_norm(s)) if s.shape[1] else 0.0

    prefix = f"projector.{kind.value}"
    return {
        f"{prefix}.idempotent": idem,
        f"{prefix}.range":      fixes,
        f"{prefix}.null":       kills,
        f"{prefix}.dimension":  float(abs(t.shape[1] + s.shape[1] - size)),
    }


def commutation_residual(p: WeightedPair, m: int) -> float:
    """||W A W X_m - W X_(m-1) W A||_F for m >= 2."""
    _require_m(m, "commutation residual", minimum=2)
    x_m = wmwg(p, m)
    x_prev = wmwg(p, m - 1)
    return frobenius_norm(mat_sub(mat_chain(p.w, p.a, p.w, x_m), mat_chain(p.w, x_prev, p.w, p.a)))


# Operation-catalogue name for the same residual.
theorem_3_2_residual = commutation_residual


# ─────────────────────────────────────────────
# SVD CANONICAL FORM
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class CanonicalBlocks:
    """
    A = T [[S1 K1, S1 L1], [0, 0]] S^*  and  W = S [[S2 K2, S2 L2], [0, 0]] T^*,
    where [[K1, L1], [H1, R1]] = U^* S and [[K2, L2], [H2, R2]] = V^* T.
    """
    t:         ComplexMatrix
    s:         ComplexMatrix
    k1:        ComplexMatrix
    l1:        ComplexMatrix
    k2:        ComplexMatrix
    l2:        ComplexMatrix
    sigma1_k1: ComplexMatrix
    sigma1_l1: ComplexMatrix
    sigma2_k2: ComplexMatrix
    sigma2_l2: ComplexMatrix

    def __post_init__(self):
        q, n = self.t.shape[0], self.s.shape[0]
        r1, r2 = self.k1.shape[0], self.k2.shape[0]
        expected = {
            "t":         (q, q),
            "s":         (n, n),
            "k1":        (r1, r2),
            "l1":        (r1, n - r2),
            "k2":        (r2, r1),
            "l2":        (r2, q - r1),
            "sigma1_k1": (r1, r2),
            "sigma1_l1": (r1, n - r2),
            "sigma2_k2": (r2, r1),
            "sigma2_l2": (r2, q - r1),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise NumericalFailureError(
                    f"canonical block {name} has shape {getattr(self, name).shape}, expected {shape}",
                    block=name,
                )
        for name, factor in (("t", self.t), ("s", self.s)):
            if unitarity_defect(factor) > UNITARITY_TOL * max(1, factor.shape[0]):
                raise NumericalFailureError(f"canonical factor {name} is not unitary", block=name)
        for name, defect in zip(("K1 L1", "K2 L2"), self.orthonormality_defects()):
            if defect > UNITARITY_TOL * max(1, r1, r2):
                raise NumericalFailureError(
                    f"rows of [{name}] are not orthonormal: ||K K^* + L L^* - I||_F = {defect:.3e}",
                    block=name, defect=defect,
                )

    @property
    def r1(self) -> int:
        return self.k1.shape[0]

    @property
    def r2(self) -> int:
        return self.k2.shape[0]

    def reassemble(self) -> Tuple[ComplexMatrix, ComplexMatrix]:
        q, n = self.t.shape[0], self.s.shape[0]
        a = mat_chain(self.t, block(self.sigma1_k1, self.sigma1_l1, q, n), conj_transpose(self.s))
        w = mat_chain(self.s, block(self.sigma2_k2, self.sigma2_l2, n, q), conj_transpose(self.t))
        return a, w

    def orthonormality_defects(self) -> Tuple[float, float]:
        def defect(k: ComplexMatrix, l: ComplexMatrix) -> float:
            gram = k @ np.conj(k).T + l @ np.conj(l).T
            return frobenius_norm(_frozen(gram - np.eye(k.shape[0])))
        return defect(self.k1, self.l1), defect(self.k2, self.l2)


def canonical_blocks(p: WeightedPair) -> CanonicalBlocks:
    tol = p.tolerance
    fa = svd(p.a)
    # W^* = V S2 S^*, so S comes out as right singular vectors and gets the same phase convention as U.
    fw = svd(conj_transpose(p.w))
    t, u = fa.left, fa.right
    s, v = fw.right, fw.left
    r1, r2 = fa.rank(tol), fw.rank(tol)
    sigma1 = fa.singular_values[:r1]
    sigma2 = fw.singular_values[:r2]

    us = mat_mul(conj_transpose(u), s)
    vt = mat_mul(conj_transpose(v), t)
    k1, l1 = _frozen(us[:r1, :r2].copy()), _frozen(us[:r1, r2:].copy())
    k2, l2 = _frozen(vt[:r2, :r1].copy()), _frozen(vt[:r2, r1:].copy())

    logger.debug("canonical blocks: r1=%d r2=%d", r1, r2)
    return CanonicalBlocks(
        t=t, s=s, k1=k1, l1=l1, k2=k2, l2=l2,
        sigma1_k1=_frozen(sigma1[:, None] * k1),
        sigma1_l1=_frozen(sigma1[:, None] * l1),
        sigma2_k2=_frozen(sigma2[:, None] * k2),
        sigma2_l2=_frozen(sigma2[:, None] * l2),
    )


def _sub_pair(p: WeightedPair, blocks: CanonicalBlocks) -> WeightedPair:
    if frobenius_norm(blocks.sigma2_k2) <= p.tolerance.check_tol * frobenius_norm(p.w):
        logger.warning("canonical sub-pair has a vanishing weight block (r1=%d, r2=%d)", blocks.r1, blocks.r2)
        raise DegenerateWeightError(
            "the reduced weight S2 K2 is zero, so the reduced W-weighted inverse is undefined",
            r1=blocks.r1, r2=blocks.r2,
        )
    return WeightedPair.of(blocks.sigma1_k1, blocks.sigma2_k2, p.tolerance)


def _assemble(p: WeightedPair, blocks: CanonicalBlocks, top_left: ComplexMatrix, top_right: ComplexMatrix) -> ComplexMatrix:
    return mat_chain(blocks.t, block(top_left, top_right, p.q, p.n), conj_transpose(blocks.s))


def canonical_core_ep(p: WeightedPair) -> ComplexMatrix:
    """A^(core-EP,W) = T [[(S1K1)^(core-EP,S2K2), 0], [0, 0]] S^*."""
    blocks = canonical_blocks(p)
    if blocks.r1 == 0:
        return zeros(p.q, p.n)
    sub = _sub_pair(p, blocks)
    return _assemble(p, blocks, weighted_core_ep(sub), zeros(blocks.r1, p.n - blocks.r2))


def canonical_off_diagonal(p: WeightedPair, m: int, blocks: Optional[CanonicalBlocks] = None) -> ComplexMatrix:
    """B = Y (W1 Y)^m (W1 A1)^(m-1) W1 S1L1 with A1 = S1K1, W1 = S2K2, Y = A1^(core-EP,W1)."""
    _require_m(m, "canonical off-diagonal block")
    blocks = blocks or canonical_blocks(p)
    sub = _sub_pair(p, blocks)
    y = weighted_core_ep(sub)
    w1, a1 = sub.w, sub.a
    return mat_chain(
        y,
        mat_power(mat_mul(w1, y), m),
        mat_power(mat_mul(w1, a1), m - 1),
        w1,
        blocks.sigma1_l1,
    )


def canonical_wmwg(p: WeightedPair, m: int) -> ComplexMatrix:
    """Block form of A^(w_m,W) built from the SVDs of A and W."""
    _require_m(m, "canonical wmwg")
    blocks = canonical_blocks(p)
    if blocks.r1 == 0:
        return zeros(p.q, p.n)
    sub = _sub_pair(p, blocks)
    top_left = wmwg(sub, m)
    top_right = canonical_off_diagonal(p, m, blocks)
    return _assemble(p, blocks, top_left, top_right)


def canonical_wmwg_recursive(p: WeightedPair, m: int) -> ComplexMatrix:
    """
    Same block form with the off-diagonal block written through lower orders:
    Y W1 Y W1 S1L1 for m = 1, and Y W1 (A1)^(w_(m-1),W1) W1 S1L1 for m > 1.
    """
    _require_m(m, "canonical wmwg")
    blocks = canonical_blocks(p)
    if blocks.r1 == 0:
        return zeros(p.q, p.n)
    sub = _sub_pair(p, blocks)
    y = weighted_core_ep(sub)
    inner = y if m == 1 else wmwg(sub, m - 1)
    top_right = mat_chain(y, sub.w, inner, sub.w, blocks.sigma1_l1)
    return _assemble(p, blocks, wmwg(sub, m), top_right)
