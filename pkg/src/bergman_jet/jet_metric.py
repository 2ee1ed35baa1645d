"""Hermitian metric on the jet bundle J^{(p-1)} = I_S^{p-1} / I_S^p.

Two independent routes are provided for the pointwise metric:

* ``metric_shell``: the shell integral of f conj(g) e^{-phi-(p+k-1)G} over
  U_x ∩ {t < G < t+1}, evaluated down a schedule of t;
* ``metric_closed_form``: the limiting value
  (1/2) e^{-phi(x) - (p+k-1) gamma(x)} A(x) ∫_{S^{2k-1}} f conj(g) dσ.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, RangeError
from .polynomial import Poly, normal_degree
from .quadrature import (
    QuadratureConfig,
    ShellSpec,
    integrate_band,
    integrate_shell,
    shell_t_max,
    sphere_area,
    sphere_integral,
    sphere_mc_points,
    sphere_monomial_integral,
    tangential_rule,
)
from .weights import Model

CONVERGENCE_RTOL = 1e-5


@dataclass(frozen=True)
class JetElement:
    """A point of the fiber J_x: a homogeneous polynomial of degree p-1 in z'."""

    coeffs: dict
    base_point: tuple = ()

    def __post_init__(self):
        clean = {tuple(a): complex(c) for a, c in self.coeffs.items() if c != 0}
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "base_point", tuple(complex(v) for v in self.base_point))
        if len({sum(a) for a in clean}) > 1:
            raise ContractViolation("jet element must be homogeneous in z'")

    @property
    def k(self):
        return len(next(iter(self.coeffs))) if self.coeffs else None

    def degree(self):
        return sum(next(iter(self.coeffs))) if self.coeffs else None

    def normal_poly(self, k):
        return Poly(k, self.coeffs)

    def full_poly(self, n, k):
        m = n - k
        return Poly(n, {a + (0,) * m: c for a, c in self.coeffs.items()})

    def check(self, model: Model):
        k = model.k
        for a in self.coeffs:
            if len(a) != k:
                raise ContractViolation(f"jet exponent {a} must have k={k} entries")
            if sum(a) != model.p - 1:
                raise ContractViolation(f"jet exponent {a} must have degree p-1={model.p - 1}")
        if len(self.base_point) != model.n - k:
            raise ContractViolation("base point must carry the n-k tangential coordinates")


@dataclass(frozen=True)
class JetSection:
    """Section of J^{(p-1)} over S, stored as a polynomial in all n variables
    whose every term has normal degree exactly p-1."""

    poly: Poly
    k: int

    def check(self, model: Model):
        if self.poly.n != model.n or self.k != model.k:
            raise ContractViolation("section dimensions differ from the model")
        bad = [a for a in self.poly.coeffs if normal_degree(a, self.k) != model.p - 1]
        if bad:
            raise ContractViolation(f"section terms {bad} do not have normal degree p-1")

    def at(self, x) -> JetElement:
        coeffs = {}
        x = np.asarray(x, dtype=complex)
        for a_n, tang in self.poly.split_normal(self.k).items():
            coeffs[a_n] = complex(tang(x[None, :])[0])
        return JetElement(coeffs, tuple(x))

    def components(self):
        return self.poly.split_normal(self.k)

    def is_zero(self):
        return self.poly.is_zero()


@dataclass
class MetricValue:
    value: complex
    shell_estimates: list
    extrapolated: complex
    closed_form: complex
    tolerance: float = 1e-4
    converged: bool = True
    errors: list = field(default_factory=list)

    @property
    def relative_gap(self):
        scale = abs(self.closed_form)
        gap = abs(self.extrapolated - self.closed_form)
        return gap / scale if scale > 0 else gap

    @property
    def agree(self):
        return self.relative_gap <= self.tolerance

    def to_json(self):
        cplx = lambda z: {"re": complex(z).real, "im": complex(z).imag}
        return {
            "value": cplx(self.value),
            "t_schedule": [t for t, _ in self.shell_estimates],
            "shell_estimates": [cplx(v) for _, v in self.shell_estimates],
            "quadrature_errors": list(self.errors),
            "extrapolated": cplx(self.extrapolated),
            "closed_form": cplx(self.closed_form),
            "relative_gap": self.relative_gap,
            "tolerance": self.tolerance,
            "converged": self.converged,
            "agree": self.agree,
        }


# -- helpers -----------------------------------------------------------------

def _as_base_points(model, X):
    X = np.asarray(X, dtype=complex)
    m = model.n - model.k
    return X.reshape(1, m) if X.ndim < 2 else X.reshape(X.shape[0], m)


def _point_on_S(model, X):
    X = _as_base_points(model, X)
    return np.concatenate([np.zeros((X.shape[0], model.k), dtype=complex), X], axis=1)


def _prefactor(model: Model, X):
    """(1/2) e^{-phi - (p+k-1) gamma} A at base points X (M, n-k)."""
    Z = _point_on_S(model, X)
    return 0.5 * np.exp(-model.phi(Z) - (model.p + model.k - 1) * model.green.gamma(Z))


def _same_base(fx: JetElement, gx: JetElement):
    if not np.allclose(fx.base_point, gx.base_point, atol=1e-14, rtol=0):
        raise ContractViolation("jet elements live over different base points")


def _check_schedule(model, x, t_schedule):
    ts = [float(t) for t in t_schedule]
    if not ts:
        raise ContractViolation("empty t schedule")
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ContractViolation("t schedule must be strictly decreasing")
    t_max = shell_t_max(model, x)
    if ts[0] > t_max:
        raise RangeError(f"t={ts[0]} exceeds t_max={t_max:.6g}", t_max=t_max)
    return ts


def shell_series(model: Model, f: Poly, g: Poly, x, t_schedule, cfg=None):
    """Shell integrals of f conj(g) e^{-phi-(p+k-1)G} dV_{U_x} for each t (fiber at x)."""
    cfg = cfg or QuadratureConfig()
    ts = _check_schedule(model, x, t_schedule)

    def integrand(Z):
        with np.errstate(over="ignore"):
            return f(Z) * np.conj(g(Z)) * np.exp(-model.log_weight(Z, extra=1))

    out = [integrate_shell(model, ShellSpec(t), integrand, cfg, x=x) for t in ts]
    return ts, out


# -- public operations -------------------------------------------------------

def metric_closed_form(fx: JetElement, gx: JetElement, model: Model):
    """Limit of the shell integrals: (1/2) e^{-phi(x)-(p+k-1)gamma(x)} A(x) ∫ f conj(g) dσ."""
    _same_base(fx, gx)
    if not fx.coeffs or not gx.coeffs:
        return 0j
    fx.check(model)
    gx.check(model)
    k = model.k
    sph = sphere_integral(fx.normal_poly(k), gx.normal_poly(k))
    return complex(_prefactor(model, [fx.base_point])[0] * sph)


def metric_shell(fx: JetElement, gx: JetElement, model: Model, t_schedule=(-20.0,),
                 cfg: QuadratureConfig | None = None, tolerance=1e-4) -> MetricValue:
    """Shell-integral route; the estimate at the most negative t is the limit."""
    _same_base(fx, gx)
    x = fx.base_point
    for e in (fx, gx):
        if e.coeffs:
            e.check(model)
    closed = metric_closed_form(fx, gx, model)
    f = fx.full_poly(model.n, model.k)
    g = gx.full_poly(model.n, model.k)
    ts, res = shell_series(model, f, g, x, t_schedule, cfg)
    vals = [r.value for r in res]
    last = vals[-1]
    converged = True
    if len(vals) >= 2:
        scale = max(abs(last), abs(closed), 1e-300)
        converged = abs(vals[-1] - vals[-2]) / scale < CONVERGENCE_RTOL
    return MetricValue(
        value=last,
        shell_estimates=list(zip(ts, vals)),
        extrapolated=last,
        closed_form=closed,
        tolerance=tolerance,
        converged=converged,
        errors=[r.error for r in res],
    )


def pointwise_metric(f: JetSection, g: JetSection, model: Model, X):
    """Closed-form ⟨f(x), g(x)⟩_J at many base points X (M, n-k), vectorized."""
    X = _as_base_points(model, X)
    fc, gc = f.components(), g.components()
    total = np.zeros(X.shape[0], dtype=complex)
    for a in set(fc) & set(gc):
        total += fc[a](X) * np.conj(gc[a](X)) * sphere_monomial_integral(a)
    return _prefactor(model, X) * total


def section_inner(f: JetSection, g: JetSection, model: Model, cfg=None):
    """∫_S ⟨f, g⟩_J dV_S by tangential quadrature of the closed-form metric."""
    if f.is_zero() or g.is_zero():
        return 0j
    f.check(model)
    g.check(model)
    X, w = tangential_rule(model.geometry, cfg or QuadratureConfig())
    return complex(np.sum(w * pointwise_metric(f, g, model, X)))


def section_norm(f: JetSection, model: Model, cfg=None) -> float:
    """‖f‖²_J = ∫_S |f|²_J dV_S."""
    return float(section_inner(f, f, model, cfg).real)


def verify_perturbation_invariance(fx: JetElement, remainder: Poly, model: Model,
                                   t_schedule=(-10.0, -15.0, -20.0), cfg=None, tol=1e-6):
    """Adding terms of normal order >= p to f_x leaves the metric limit unchanged."""
    k = model.k
    if remainder.n != model.n:
        raise ContractViolation("remainder must be a polynomial in all n variables")
    low = [a for a in remainder.coeffs if normal_degree(a, k) < model.p]
    if low:
        raise ContractViolation(f"remainder terms {low} have normal order < p")
    x = fx.base_point
    f = fx.full_poly(model.n, k)
    ft = f + remainder
    ts, base = shell_series(model, f, f, x, t_schedule, cfg)
    _, pert = shell_series(model, ft, ft, x, t_schedule, cfg)
    gaps = [abs(b.value - a.value) for a, b in zip(base, pert)]
    return {
        "t_schedule": ts,
        "base": [a.value.real for a in base],
        "perturbed": [b.value.real for b in pert],
        "gaps": gaps,
        "final_gap": gaps[-1],
        "tolerance": tol,
        "passed": gaps[-1] <= tol,
    }


def rotate(fx: JetElement, unitary, k) -> JetElement:
    """f ∘ U on the normal variables."""
    U = np.asarray(unitary, dtype=complex)
    if U.shape != (k, k) or not np.allclose(U.conj().T @ U, np.eye(k), atol=1e-10):
        raise ContractViolation("expected a k x k unitary matrix")
    composed = fx.normal_poly(k).compose_linear(U, k)
    return JetElement(dict(composed.coeffs), fx.base_point)


def mc_sphere_metric(fx: JetElement, gx: JetElement, model: Model, samples, seed=0):
    """Monte Carlo version of the closed form: sphere integral by random directions.

    Returns (estimate, standard error).
    """
    k = model.k
    v = sphere_mc_points(k, samples, seed)
    if len(v) > samples:
        v = v[:samples]
    vals = fx.normal_poly(k)(v) * np.conj(gx.normal_poly(k)(v))
    pre = _prefactor(model, [fx.base_point])[0] * sphere_area(k)
    return complex(pre * vals.mean()), float(abs(pre) * vals.std(ddof=1) / np.sqrt(len(v)))


def verify_rotation_invariance(fx: JetElement, unitary, model: Model, t=-20.0, cfg=None,
                               mc_samples=10 ** 6, tol=1e-4):
    """Unitary changes of the normal coordinates leave the metric unchanged."""
    if not model.phi.is_normal_radial():
        raise ContractViolation("rotation check needs phi radial in z'")
    k = model.k
    gx = rotate(fx, unitary, k)
    closed = (metric_closed_form(fx, fx, model).real, metric_closed_form(gx, gx, model).real)
    shells = (metric_shell(fx, fx, model, [t], cfg).value.real,
              metric_shell(gx, gx, model, [t], cfg).value.real)
    mc = (mc_sphere_metric(fx, fx, model, mc_samples), mc_sphere_metric(gx, gx, model, mc_samples))
    scale = max(abs(closed[0]), 1e-300)
    gap = max(abs(closed[1] - closed[0]), abs(shells[1] - shells[0]),
              abs(shells[0] - closed[0])) / scale
    return {
        "closed_form": list(closed),
        "shell": list(shells),
        "monte_carlo": [m[0].real for m in mc],
        "monte_carlo_stderr": [m[1] for m in mc],
        "relative_gap": gap,
        "tolerance": tol,
        "passed": gap <= tol,
    }


def verify_fubini(g: JetSection, extension: Poly, model: Model,
                  t_schedule=(-10.0, -15.0, -20.0), cfg=None, tol=1e-3):
    """∫_S |g|²_J dV_S against the limit of full-domain shell integrals of |g̃|²."""
    k = model.k
    if extension.n != model.n:
        raise ContractViolation("extension must be a polynomial in all n variables")
    low = [a for a in extension.coeffs if normal_degree(a, k) < model.p - 1]
    lead = Poly(model.n, {a: c for a, c in extension.coeffs.items()
                          if normal_degree(a, k) == model.p - 1})
    if low or not (lead - g.poly).is_zero():
        raise ContractViolation("extension does not restrict to g modulo I_S^p")
    lhs = section_norm(g, model, cfg)
    cfg = cfg or QuadratureConfig()
    ts = [float(t) for t in t_schedule]
    t_max = shell_t_max(model)
    if ts[0] > t_max:
        raise RangeError(f"t={ts[0]} exceeds t_max={t_max:.6g}", t_max=t_max)

    def integrand(Z):
        return np.abs(extension(Z)) ** 2 * np.exp(-model.log_weight(Z, extra=1))

    rhs = [integrate_band(model, t, t + 1.0, integrand, cfg).value.real for t in ts]
    scale = max(abs(lhs), 1e-300)
    gap = abs(rhs[-1] - lhs) / scale if lhs else abs(rhs[-1])
    return {
        "lhs": lhs,
        "t_schedule": ts,
        "rhs": rhs,
        "relative_gap": gap,
        "tolerance": tol,
        "passed": gap <= tol,
    }
