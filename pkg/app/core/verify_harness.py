# app/core/verify_harness.py

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import DEFAULT_WORKERS, get_random_suite_tolerance
from app.core.errors import (
    DegenerateWeightError,
    GeninvError,
    InapplicableMethodError,
    NumericalFailureError,
    PairValidationError,
)
from app.core.geninv import (
    WeightedPair,
    core_ep,
    core_inverse,
    generalized_group,
    m_weak_group,
    moore_penrose,
    penrose_residuals,
    relative_gap,
    weighted_core_ep,
    weighted_core_ep_residuals,
    weighted_drazin,
    weighted_drazin_residuals,
    weighted_weak_group,
    weighted_weak_group_residuals,
    w_power,
)
from app.core.matrix_core import (
    ComplexMatrix,
    conj_transpose,
    distance,
    frobenius_norm,
    identity,
    mat_chain,
    mat_mul,
    mat_power,
    mat_sub,
)
from app.core.spectral import index, null_basis, oblique_projector, range_basis, spectral_norm
from app.core.wmwg import (
    ProjectorKind,
    ReprMethod,
    commutation_residual,
    projector,
    projector_bases,
    projector_residuals,
    represent,
    wmwg,
)
from app.models.verification import (
    CrossCheckCell,
    CrossCheckReport,
    RandomSpec,
    ResidualReport,
    ResidualViolation,
    ToleranceConfig,
)

logger = logging.getLogger(__name__)

PINV_POWER_MINIMAL = "PinvPower[l=k]"


class VerificationEngine:

    def __init__(self, tolerance: Optional[ToleranceConfig] = None, workers: int = DEFAULT_WORKERS):
        self.tolerance = tolerance
        self.workers   = max(1, workers)

    # ─────────────────────────────────────────────────────────────────────────
    # CROSS-FORMULA CONSENSUS
    # ─────────────────────────────────────────────────────────────────────────

    def cross_check(
        self,
        p: WeightedPair,
        m_values: Sequence[int],
        include_extensions: bool = False,
    ) -> CrossCheckReport:
        """
        Frobenius distance of every non-definitional representation to the
        definitional formula. PinvPower uses l = 2k; the optional
        PinvPower[l=k] row is an extension with the minimal admissible l.
        """
        m_values = list(m_values)
        if not m_values or any(m < 1 for m in m_values):
            raise InapplicableMethodError("cross_check", f"every m >= 1 (got {m_values})")

        rows = [(method.value, method) for method in ReprMethod if method is not ReprMethod.DEFINITIONAL]
        if include_extensions:
            rows.append((PINV_POWER_MINIMAL, ReprMethod.PINV_POWER))

        baselines = {m: wmwg(p, m) for m in m_values}
        tasks = [(label, method, m) for label, method in rows for m in m_values]

        def evaluate(task: Tuple[str, ReprMethod, int]) -> CrossCheckCell:
            label, method, m = task
            l = None
            if method is ReprMethod.PINV_POWER:
                l = p.k if label == PINV_POWER_MINIMAL else 2 * p.k
            try:
                x = represent(p, m, method, l=l)
            except (InapplicableMethodError, DegenerateWeightError) as exc:
                return CrossCheckCell(method=label, m=m, inapplicable=True, reason=exc.message)
            return CrossCheckCell(method=label, m=m, error=distance(x, baselines[m]))

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                cells = list(pool.map(evaluate, tasks))
        else:
            cells = [evaluate(t) for t in tasks]

        report = CrossCheckReport(m_values=m_values, methods=[label for label, _ in rows], rows=cells, k=p.k)
        logger.info(
            "cross-check: %d cells, %d inapplicable, max error %.3e",
            len(cells), len(report.inapplicable_cells()), report.max_error(),
        )
        return report

    # ─────────────────────────────────────────────────────────────────────────
    # DEFINING-EQUATION RESIDUALS
    # ─────────────────────────────────────────────────────────────────────────

    def residual_suite(self, p: WeightedPair, m: int, tol: Optional[float] = None) -> ResidualReport:
        if m < 1:
            raise InapplicableMethodError("residual_suite", f"m >= 1 (got {m})")
        limit = tol if tol is not None else self._check_tol(p)

        x = wmwg(p, m)
        y = weighted_core_ep(p)
        residuals: Dict[str, float] = {}

        residuals.update(penrose_residuals(p.a, moore_penrose(p.a, p.tolerance)))
        residuals.update(weighted_drazin_residuals(p, weighted_drazin(p)))
        residuals.update(weighted_core_ep_residuals(p, y))
        residuals.update(weighted_weak_group_residuals(p, weighted_weak_group(p), core_ep_w=y))
        for kind in ProjectorKind:
            residuals.update(projector_residuals(p, m, kind, x))
        residuals.update(self._core_ep_identities(p, y))

        if m >= 2:
            scale = 1.0 + frobenius_norm(p.w) ** 2 * frobenius_norm(p.a) * frobenius_norm(x)
            residuals["commutation"] = commutation_residual(p, m) / scale

        informative = {
            "outer_inverse": relative_gap(mat_chain(x, p.w, p.a, p.w, x), x),
        }
        informative.update(self._oblique_second_opinion(p, m, x))

        violations = [
            ResidualViolation(name=name, residual=value, tolerance=limit)
            for name, value in sorted(residuals.items())
            if not value <= limit
        ]
        return ResidualReport(
            m=m,
            k=p.k,
            residuals=dict(sorted(residuals.items())),
            informative=dict(sorted(informative.items())),
            violations=violations,
            passed=not violations,
        )

    def _core_ep_identities(self, p: WeightedPair, y: ComplexMatrix) -> Dict[str, float]:
        tol = p.tolerance
        out: Dict[str, float] = {}
        wa_cep = core_ep(p.wa, tol, p.wa_norm)

        for s in (1, 2, 3):
            lhs = w_power(y, p.w, s)
            rhs = weighted_core_ep(p.with_matrix(w_power(p.a, p.w, s), power=s)) if s > 1 else y
            out[f"core_ep.power_{s}"] = relative_gap(lhs, rhs)

        out["core_ep.w_times"] = relative_gap(mat_mul(p.w, y), wa_cep)
        for s in (2, 3):
            out[f"core_ep.wa_power_{s}"] = relative_gap(core_ep(mat_power(p.wa, s), tol, p.wa_scale(s)), mat_power(wa_cep, s))

        # A^(cEP,W) W A W projects onto R((AW)^k) along N(((WA)^k)^* W A W).
        proj = mat_chain(y, p.w, p.a, p.w)
        t = range_basis(mat_power(p.aw, p.k), tol, p.aw_scale(p.k))
        s_ = null_basis(
            mat_chain(conj_transpose(mat_power(p.wa, p.k)), p.w, p.a, p.w), tol, p.wa_scale(p.k + 1) * spectral_norm(p.w)
        )
        out["core_ep.projector.idempotent"] = frobenius_norm(mat_sub(mat_mul(proj, proj), proj)) / (1.0 + frobenius_norm(proj))
        out["core_ep.projector.range"] = (
            frobenius_norm(mat_sub(mat_mul(proj, t), t)) / (1.0 + frobenius_norm(t)) if t.shape[1] else 0.0
        )
        out["core_ep.projector.null"] = (
            frobenius_norm(mat_mul(proj, s_)) / (1.0 + frobenius_norm(s_)) if s_.shape[1] else 0.0
        )
        return out

    def _oblique_second_opinion(self, p: WeightedPair, m: int, x: ComplexMatrix) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for kind in ProjectorKind:
            t, s = projector_bases(p, m, kind)
            try:
                reference = oblique_projector(t, s, p.tolerance)
            except GeninvError as exc:
                logger.warning("oblique reference for %s unavailable: %s", kind.value, exc.message)
                continue
            out[f"oblique.{kind.value}"] = relative_gap(projector(p, m, kind, x), reference)
        return out

    # ─────────────────────────────────────────────────────────────────────────
    # SPECIAL-CASE REDUCTIONS
    # ─────────────────────────────────────────────────────────────────────────

    def reduction_suite(self, p: WeightedPair, m: int) -> Dict[str, float]:
        if m < 1:
            raise InapplicableMethodError("reduction_suite", f"m >= 1 (got {m})")
        x = wmwg(p, m)
        out: Dict[str, float] = {}

        if m == 1:
            out["weak_group"] = relative_gap(x, weighted_weak_group(p))
        if p.k <= m:
            out["drazin"] = relative_gap(x, weighted_drazin(p))
        if p.has_identity_weight():
            out.update(self._identity_weight_reductions(p, m, x))
        return out

    def _identity_weight_reductions(self, p: WeightedPair, m: int, x: ComplexMatrix) -> Dict[str, float]:
        a, tol, ref = p.a, p.tolerance, p.wa_norm
        out = {"m_weak_group": relative_gap(x, m_weak_group(a, m, tol, ref))}
        if m == 2:
            out["generalized_group"] = relative_gap(x, generalized_group(a, tol, ref))
        # A^(w_m) = A^(m-1) (A^m)^(w)
        out["weak_group_of_power"] = relative_gap(
            x, mat_mul(mat_power(a, m - 1), m_weak_group(mat_power(a, m), 1, tol, p.wa_scale(m)))
        )
        k = index(a, tol, ref)
        if k >= m + 1:
            out["core_of_power"] = relative_gap(
                x, mat_chain(mat_power(a, k - m - 1), core_inverse(mat_power(a, k), tol, p.wa_scale(k)), mat_power(a, m))
            )
        if m >= 2:
            out["shift"] = relative_gap(mat_mul(a, x), mat_mul(m_weak_group(a, m - 1, tol, ref), a))
        return out

    # ─────────────────────────────────────────────────────────────────────────
    # HELPERS
    # ─────────────────────────────────────────────────────────────────────────

    def _check_tol(self, p: WeightedPair) -> float:
        return (self.tolerance or p.tolerance).check_tol


# ─────────────────────────────────────────────
# RANDOM INSTANCES WITH A PLANTED INDEX
# ─────────────────────────────────────────────

def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _well_conditioned(rng: np.random.Generator, n: int) -> np.ndarray:
    return _random_unitary(rng, n) @ np.diag(rng.uniform(1.0, 2.0, n)) @ _random_unitary(rng, n)


def _planted_core(rng: np.random.Generator, size: int, nilpotent: int) -> np.ndarray:
    """Q diag(D, J) Q^* with D invertible and J a single nilpotent Jordan block."""
    core = np.zeros((size, size), dtype=np.complex128)
    live = size - nilpotent
    moduli = rng.uniform(0.75, 1.25, live)
    phases = rng.uniform(0.0, 2.0 * np.pi, live)
    core[:live, :live] = np.diag(moduli * np.exp(1j * phases))
    for i in range(live, size - 1):
        core[i, i + 1] = 1.0
    q = _random_unitary(rng, size)
    return q @ core @ np.conj(q).T


def _rescale(x: np.ndarray, magnitude: float) -> np.ndarray:
    peak = np.max(np.abs(x)) if x.size else 0.0
    return x if peak == 0.0 else x * (magnitude / peak)


def random_weighted_pair(spec: RandomSpec, tol: Optional[ToleranceConfig] = None) -> WeightedPair:
    """
    Seeded (A, W) with max(Ind(AW), Ind(WA)) equal to spec.target_index.

    The nilpotent block goes into a size min(q, n) core M; A and W split M
    through a well-conditioned factor so that one of AW, WA is similar to M
    and the other is M padded with zeros.
    """
    tol = tol or get_random_suite_tolerance()
    q, n, t = spec.q, spec.n, spec.target_index
    if q != n and t == 0:
        raise PairValidationError(
            f"index 0 needs AW and WA nonsingular, impossible for a {q}x{n} matrix",
            q=q, n=n,
        )

    rng = np.random.default_rng(spec.seed)
    size = min(q, n)
    core = _planted_core(rng, size, t)
    g = _well_conditioned(rng, size)
    g_inv = np.linalg.inv(g)

    if q == n:
        a, w = core @ g_inv, g
    elif q > n:
        frame = _random_unitary(rng, q)
        a = frame @ np.vstack([core, np.zeros((q - n, n))]) @ g
        w = g_inv @ np.hstack([np.eye(n), np.zeros((n, q - n))]) @ np.conj(frame).T
    else:
        frame = _random_unitary(rng, n)
        a = g_inv @ np.hstack([core, np.zeros((q, n - q))]) @ np.conj(frame).T
        w = frame @ np.vstack([g, np.zeros((n - q, q))])

    pair = WeightedPair.of(_rescale(a, spec.magnitude), _rescale(w, spec.magnitude), tol)
    if pair.k != t:
        raise NumericalFailureError(
            f"planted index {t} but measured k={pair.k} (seed {spec.seed}); rank tolerance too tight",
            seed=spec.seed,
        )
    logger.debug("random pair seed=%d %dx%d k=%d", spec.seed, q, n, pair.k)
    return pair


def identity_weighted_pair(spec: RandomSpec, tol: Optional[ToleranceConfig] = None) -> WeightedPair:
    """Square seeded A with Ind(A) = spec.target_index, paired with W = I."""
    if spec.q != spec.n:
        raise PairValidationError("an identity weight needs a square matrix", q=spec.q, n=spec.n)
    tol = tol or get_random_suite_tolerance()
    rng = np.random.default_rng(spec.seed)
    core = _planted_core(rng, spec.n, spec.target_index)
    return WeightedPair.of(_rescale(core, spec.magnitude), identity(spec.n), tol)


def random_suite_specs(count: int, max_dim: int = 8, seed: int = 0) -> List[RandomSpec]:
    """Deterministic batch of RandomSpec values covering planted indices 0..3."""
    rng = np.random.default_rng(seed)
    specs: List[RandomSpec] = []
    while len(specs) < count:
        q, n = (int(v) for v in rng.integers(1, max_dim + 1, size=2))
        target = int(rng.integers(0, 4))
        if target > min(q, n) or (q != n and target == 0):
            continue
        specs.append(RandomSpec(seed=int(rng.integers(0, 2**31 - 1)), q=q, n=n, target_index=target))
    return specs
