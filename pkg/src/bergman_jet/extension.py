"""Minimal L² extension of a (p-1)-jet and its dual characterization.

An extension F = Σ c_α z^α has its normal-degree p-1 coefficients pinned by
the jet; the free coefficients (normal degree >= p) span I_S^p.  The weighted
norm is the Hermitian form ‖F‖² = c^H M c with M = conj(Gram), so the minimum
over free coefficients is a Schur complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve

from .bergman import (BasisTruncation, DualFunctional, GramMatrix, dual_norm,
                      functional_moments, gram)
from .errors import ConditioningError, ContractViolation
from .jet_metric import JetSection, section_norm
from .polynomial import Poly, normal_degree
from .quadrature import QuadratureConfig
from .weights import FamilyParams, Model


@dataclass(frozen=True)
class ExtensionProblem:
    jet: JetSection
    model: Model
    trunc: BasisTruncation

    def __post_init__(self):
        if self.trunc.p != self.model.p or self.jet.k != self.model.k:
            raise ContractViolation("jet, model and truncation disagree on p or k")
        if not self.trunc.fixed():
            raise ContractViolation("truncation has no jet coordinates")
        self.jet.check(self.model)
        pos = self.trunc.position()
        for a in self.jet.poly.coeffs:
            if a not in pos:
                raise ContractViolation(f"jet term {a} exceeds truncation degree {self.trunc.N}")

    @classmethod
    def build(cls, jet: JetSection, model: Model, N=None):
        return cls(jet, model, BasisTruncation.for_model(model, N))

    def jet_vector(self):
        c = np.zeros(len(self.trunc.indices), dtype=complex)
        pos = self.trunc.position()
        for a, v in self.jet.poly.coeffs.items():
            c[pos[a]] = v
        return c


@dataclass
class ExtensionResult:
    coefficients: dict
    primal_norm2: float
    jet_norm2: float = float("nan")
    dual_quotient_norm2: float = float("nan")
    tolerance: float = 5e-3
    extras: dict = field(default_factory=dict)

    @property
    def ratio(self):
        # zero jet: 0/0 is defined as 0
        if self.jet_norm2 == 0 and self.primal_norm2 == 0:
            return 0.0
        return self.primal_norm2 / self.jet_norm2

    @property
    def verdict(self):
        return bool(self.ratio <= 1 + self.tolerance)

    def extension(self, n) -> Poly:
        return Poly(n, dict(self.coefficients))

    def to_json(self):
        coeffs = [{"exponent": list(a), "re": float(v.real), "im": float(v.imag)}
                  for a, v in sorted(self.coefficients.items())]
        out = {
            "coefficients": coeffs,
            "primal_norm2": self.primal_norm2,
            "jet_norm2": self.jet_norm2,
            "dual_quotient_norm2": self.dual_quotient_norm2,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "verdict": "PASS" if self.verdict else "FAIL",
        }
        out.update(self.extras)
        return out


def weighted_norm2(c, gm: GramMatrix) -> float:
    """‖Σ c_α z^α‖² = Σ c_α conj(c_β) Gram_{αβ}."""
    return float(np.real(np.conj(c) @ (gm.entries.conj() @ c)))


def _base_gram(prob: ExtensionProblem, cfg):
    return gram(prob.trunc, prob.model, FamilyParams(0.0, 0.0, prob.model.p), cfg)


def _chol(A, label, offset=0):
    from scipy.linalg import lapack
    L, info = lapack.zpotrf(np.array(A, dtype=complex), lower=1, clean=1)
    if info != 0:
        raise ConditioningError(f"{label} not positive definite at pivot {offset + info - 1}",
                                pivot=offset + info - 1)
    return L


def minimal_extension(prob: ExtensionProblem, cfg: QuadratureConfig | None = None,
                      gm: GramMatrix | None = None) -> ExtensionResult:
    """Minimize c^H M c over free coefficients with jet coefficients pinned."""
    gm = gm or _base_gram(prob, cfg)
    M = gm.entries.conj()
    F, R = prob.trunc.fixed(), prob.trunc.free()
    c = prob.jet_vector()
    if R and np.any(c):
        L = _chol(M[np.ix_(R, R)], "reduced system")
        c[R] = -cho_solve((L, True), M[np.ix_(R, F)] @ c[F])
    idx = prob.trunc.indices
    coeffs = {idx[i]: complex(c[i]) for i in range(len(idx)) if c[i] != 0}
    # feasibility: pinned entries are copied, never recomputed
    for a, v in prob.jet.poly.coeffs.items():
        coeffs[a] = v
    return ExtensionResult(coeffs, weighted_norm2(c, gm))


def dual_quotient_exact(prob: ExtensionProblem, gm: GramMatrix) -> float:
    """sup over functionals killing I_S^p of |xi(F)|²/‖xi‖², through (Gram^{-1})_FF.

    Such functionals have moments supported on the jet indices F; with
    W = (Gram^{-1})_FF the sup equals y^H W^{-1} y with y = conj(c_F).
    """
    F = prob.trunc.fixed()
    c = prob.jet_vector()
    if not np.any(c):
        return 0.0
    L = gm.cholesky()
    n = len(gm.indices)
    Ginv = cho_solve((L, True), np.eye(n, dtype=complex))
    W = Ginv[np.ix_(F, F)]
    W = 0.5 * (W + W.conj().T)
    y = np.conj(c[F])
    LW = _chol(W, "inverse Gram block")
    return float(np.real(np.vdot(y, cho_solve((LW, True), y))))


def functional_value(xi: DualFunctional, c) -> complex:
    """xi(Σ c_α z^α) = Σ c_α xi(z^α)."""
    return complex(np.dot(xi.moments, c))


def quotient_norm_dual(prob: ExtensionProblem, probes, cfg: QuadratureConfig | None = None,
                       gm: GramMatrix | None = None, extension: ExtensionResult | None = None):
    """max over probe sections g of |xi_g(F)|² / ‖xi_g‖² for any extension F of the jet."""
    if not probes:
        raise ContractViolation("probe list is empty")
    gm = gm or _base_gram(prob, cfg)
    if extension is None:
        c = prob.jet_vector()  # the jet itself is a feasible point modulo I_S^p
    else:
        pos = prob.trunc.position()
        c = np.zeros(len(pos), dtype=complex)
        for a, v in extension.coefficients.items():
            c[pos[a]] = v
    best = 0.0
    for g in probes:
        xi = functional_moments(g, prob.trunc, prob.model, cfg)
        d = dual_norm(xi, gm)
        if d == 0:
            raise ContractViolation("probe functional has zero dual norm")
        best = max(best, abs(functional_value(xi, c)) ** 2 / d)
    return best


def verify_optimal_bound(prob: ExtensionProblem, cfg: QuadratureConfig | None = None,
                         tol=5e-3) -> ExtensionResult:
    """Primal minimal norm against the jet norm, plus both dual routes."""
    gm = _base_gram(prob, cfg)
    res = minimal_extension(prob, cfg, gm)
    res.tolerance = tol
    res.jet_norm2 = section_norm(prob.jet, prob.model, cfg) if not prob.jet.is_zero() else 0.0
    res.dual_quotient_norm2 = dual_quotient_exact(prob, gm)
    if not prob.jet.is_zero():
        res.extras["probe_quotient_norm2"] = quotient_norm_dual(prob, [prob.jet], cfg, gm, res)
    res.extras["gram_min_pivot"] = gm.min_pivot()
    res.extras["N"] = prob.trunc.N
    return res


def truncation_series(jet: JetSection, model: Model, degrees, cfg=None):
    """Primal minimal norms for increasing N (nonincreasing in exact arithmetic)."""
    return [(N, minimal_extension(ExtensionProblem.build(jet, model, N), cfg).primal_norm2)
            for N in degrees]


def normal_part_only(res: ExtensionResult, k, p):
    """Coefficients of the I_S^p part of the extension."""
    return {a: v for a, v in res.coefficients.items() if normal_degree(a, k) >= p}
