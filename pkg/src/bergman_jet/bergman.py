"""Truncated weighted Bergman spaces A^2_{s,q} = A^2(D, phi + (p+k-2)G + q psi(s, .)).

Holomorphic functions are modelled by monomials z^alpha of total degree <= N.
Square integrability against e^{-(p+k-2)G} near S forces vanishing to order
p-1 along S, so the basis is exactly the monomials of normal degree >= p-1.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import ConditioningError, ContractViolation, NumericalError
from .geometry import FiberSlice
from .jet_metric import JetSection, section_inner
from .lemma_lab import SweepTable
from .polynomial import Poly, graded_lex, normal_degree
from .quadrature import QuadratureConfig, fiber_rule, sphere_rule, tangential_rule
from .weights import FamilyParams, Model

THREADS_ENV = "BERGMAN_JET_THREADS"


def thread_count():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class BasisTruncation:
    n: int
    k: int
    p: int
    N: int

    def __post_init__(self):
        if self.N < self.p - 1:
            raise ContractViolation("truncation degree N must be >= p-1")

    @classmethod
    def for_model(cls, model: Model, N=None):
        return cls(model.n, model.k, model.p, model.p + 6 if N is None else N)

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return [a for a in graded_lex(self.n, self.N) if normal_degree(a, self.k) >= self.p - 1]

    def fixed(self):
        """Positions of the jet coordinates (normal degree exactly p-1)."""
        return [i for i, a in enumerate(self.indices) if normal_degree(a, self.k) == self.p - 1]

    def free(self):
        """Positions of I_S^p (normal degree >= p)."""
        return [i for i, a in enumerate(self.indices) if normal_degree(a, self.k) >= self.p]

    def position(self):
        return {a: i for i, a in enumerate(self.indices)}


@dataclass
class GramMatrix:
    """Gram[a, b] = ∫_D z^a conj(z^b) e^{-weight} dλ; Hermitian positive definite."""

    entries: np.ndarray
    indices: list
    weight_tag: dict = field(default_factory=dict)

    def cholesky(self):
        """Lower factor L with Gram = L L^H; no regularization."""
        G = np.array(self.entries, dtype=complex)
        L, info = lapack.zpotrf(G, lower=1, clean=1)
        if info > 0:
            raise ConditioningError(
                f"Gram matrix not positive definite at pivot {info - 1} "
                f"(index {self.indices[info - 1]})", pivot=info - 1)
        if info < 0:
            raise ConditioningError(f"zpotrf argument error {info}")
        return L

    def min_pivot(self):
        return float(np.min(np.abs(np.diag(self.cholesky())) ** 2))


@dataclass
class DualFunctional:
    """xi_g(h) = ∫_S <h mod I^p, g>_J dV_S, stored through its moments xi_g(z^alpha)."""

    source: JetSection | None
    indices: list
    moments: np.ndarray


def _fiber_block(model, fiber, cfg, normal_exps, s, q, dirs, chunk=2048):
    """Normal moment matrix ∫_{U_x} z'^a conj(z'^b) e^{-weight} dλ(z') for one x.

    Directions are processed ``chunk`` at a time to bound memory for the
    sampled sphere rules used when k >= 3.
    """
    kinks, widths = [], []
    if q > 0:
        u_s = model.u_of_G(s, fiber.base_point)
        kinks, widths = [u_s], [min(1.0 / cfg.panel_count, 3.0 / q)]
    v, wv = dirs
    total = np.zeros((len(normal_exps), len(normal_exps)), dtype=complex)
    for lo in range(0, len(v), chunk):
        zp, w = fiber_rule(fiber, cfg, kinks=kinks, kink_widths=widths,
                           directions=(v[lo:lo + chunk], wv[lo:lo + chunk]))
        Z = fiber.full_points(zp)
        omega = w * np.exp(-model.log_weight(Z, s, q))
        if not np.all(np.isfinite(omega)):
            raise NumericalError("non-finite weight on a quadrature node off S")
        B = np.ones((len(zp), len(normal_exps)), dtype=complex)
        for j, a in enumerate(normal_exps):
            for i, e in enumerate(a):
                if e:
                    B[:, j] *= zp[:, i] ** e
        total += (B * omega[:, None]).T @ B.conj()
    return total


def _raw_gram(model: Model, trunc: BasisTruncation, s, q, cfg: QuadratureConfig):
    k = model.k
    idx = trunc.indices
    normal_exps = sorted({a[:k] for a in idx})
    npos = {a: i for i, a in enumerate(normal_exps)}
    sel = np.array([npos[a[:k]] for a in idx])
    X, wx = tangential_rule(model.geometry, cfg)
    geom = model.geometry
    dirs_cache = {}

    def block(m):
        fiber = FiberSlice(geom, tuple(X[m]))
        key = tuple(fiber.angular_breaks())
        if key not in dirs_cache:
            dirs_cache[key] = sphere_rule(k, cfg, key)
        return _fiber_block(model, fiber, cfg, normal_exps, s, q, dirs_cache[key])

    threads = thread_count()
    if threads > 1:
        for m in range(len(X)):  # fill the direction cache before going parallel
            key = tuple(FiberSlice(geom, tuple(X[m])).angular_breaks())
            dirs_cache.setdefault(key, sphere_rule(k, cfg, key))
        with ThreadPoolExecutor(threads) as pool:
            blocks = list(pool.map(block, range(len(X))))
    else:
        blocks = [block(m) for m in range(len(X))]
    Mx = np.stack(blocks)[:, sel][:, :, sel]
    T = np.ones((len(X), len(idx)), dtype=complex)
    for j, a in enumerate(idx):
        for i, e in enumerate(a[k:]):
            if e:
                T[:, j] *= X[:, i] ** e
    G = np.einsum("m,mi,mj,mij->ij", wx, T, T.conj(), Mx, optimize=True)
    return 0.5 * (G + G.conj().T)


def gram(trunc: BasisTruncation, model: Model, fp: FamilyParams | None = None,
         cfg: QuadratureConfig | None = None, verify=False, rtol=1e-8) -> GramMatrix:
    """Monomial Gram matrix of the family weight at (s, q).

    With ``verify`` the matrix is recomputed on a refined rule and rejected
    when any entry moves by more than ``rtol`` relative to its diagonal scale.
    """
    fp = fp or FamilyParams(0.0, 0.0, model.p)
    if fp.p != model.p or trunc.p != model.p:
        raise ContractViolation("jet order differs between model, family and truncation")
    cfg = cfg or QuadratureConfig()
    G = _raw_gram(model, trunc, fp.s, fp.q, cfg)
    if verify:
        G2 = _raw_gram(model, trunc, fp.s, fp.q, cfg.refined())
        d = np.sqrt(np.abs(np.diag(G2)))
        rel = np.abs(G2 - G) / np.outer(d, d)
        if np.max(rel) > rtol:
            i, j = np.unravel_index(np.argmax(rel), rel.shape)
            raise NumericalError(
                f"Gram entry ({trunc.indices[i]}, {trunc.indices[j]}) not converged "
                f"(relative change {rel[i, j]:.2e})")
        G = G2
    tag = {**model.fingerprint(), "s": fp.s, "q": fp.q, "N": trunc.N}
    return GramMatrix(G, trunc.indices, tag)


def functional_moments(g: JetSection, trunc: BasisTruncation, model: Model,
                       cfg: QuadratureConfig | None = None) -> DualFunctional:
    """Moments xi_g(z^alpha) from the closed-form metric; zero off normal degree p-1."""
    idx = trunc.indices
    m = np.zeros(len(idx), dtype=complex)
    if not g.is_zero():
        g.check(model)
        for i in trunc.fixed():
            cls = JetSection(Poly.monomial(idx[i]), model.k)
            m[i] = section_inner(cls, g, model, cfg)
    return DualFunctional(g, idx, m)


def dual_norm(xi: DualFunctional, gm: GramMatrix) -> float:
    """‖xi‖² = m^H Gram^{-1} m: the exact dual norm on the truncated space."""
    if list(xi.indices) != list(gm.indices):
        raise ContractViolation("functional and Gram matrix use different bases")
    if not np.any(xi.moments):
        return 0.0
    L = gm.cholesky()
    y = solve_triangular(L, xi.moments, lower=True)
    return float(np.vdot(y, y).real)


def dual_norm_sweep(xi: DualFunctional, model: Model, trunc: BasisTruncation, s_grid, q,
                    cfg: QuadratureConfig | None = None) -> SweepTable:
    """‖xi‖²_{s,q} along a grid of s <= 0; ``scaled()`` gives e^s ‖xi‖²_{s,q}."""
    s_grid = [float(s) for s in s_grid]
    if any(s > 0 for s in s_grid) or s_grid != sorted(s_grid):
        raise ContractViolation("s grid must be sorted and <= 0")
    rows = []
    for s in s_grid:
        gm = gram(trunc, model, FamilyParams(s, q, model.p), cfg)
        v = dual_norm(xi, gm)
        rows.append((s, v))
    return SweepTable(rows, q, {**model.fingerprint(), "N": trunc.N, "q": q})


def disc_scaled_dual_norm(s, q):
    """Closed form of e^s ‖xi‖²_{s,q} on the unit disc (phi = 0, gamma = 0, g = z^{p-1}).

    The Gram diagonal for z^{p-1} is π e^s (1 + (1 - e^{(q-1)s})/(q-1)), giving
    π (q-1) / (q - e^{(q-1)s}); the q = 1 limit is π / (1 - s).
    """
    if abs(q - 1) < 1e-12:
        return math.pi / (1 - s)
    return math.pi * (q - 1) / (q - math.exp((q - 1) * s))
