"""Integration over normal slices, shells {t < G < t+1}, spheres and S.

Normal slices are integrated in polar form z' = e^{u/2} v with the log-radius
u = log|z'|^2, so that

    dλ(z') = (1/2) e^{k u} du dσ(v).

Powers of |z'| become exponentials in u and the logarithmic pole of G along S
is pushed to u = -inf, where the integrands of interest decay exponentially.
The u-axis is cut into Gauss-Legendre panels graded toward anchor points (the
slice boundary, shell ends, and the kink G = s of the family weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import ConfigError, ContractViolation, NumericalError, RangeError
from .geometry import FiberSlice, ModelGeometry, tangential_layout
from .polynomial import Poly, multi_factorial


@dataclass(frozen=True)
class QuadratureConfig:
    radial_order: int = 12
    angular_order: int = 32
    tangential_order: int = 12
    panel_count: int = 2          # panels per unit log-radius next to an anchor
    mc_samples: int = 2 ** 16     # sphere samples for k >= 3
    mc_replicates: int = 8
    seed: int = 0
    depth: float = 40.0           # log-radius span kept below the lowest anchor
    growth: float = 0.5           # panel width gain per unit distance from an anchor
    max_panel: float = 4.0

    def __post_init__(self):
        for name in ("radial_order", "angular_order", "tangential_order", "panel_count"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be >= 2")
        if self.mc_samples < 10_000:
            raise ConfigError("mc_samples must be >= 1e4")
        if self.mc_replicates < 2:
            raise ConfigError("mc_replicates must be >= 2")

    def refined(self, extra=4):
        return QuadratureConfig(**{**self.__dict__,
                                   "radial_order": self.radial_order + extra,
                                   "angular_order": self.angular_order + extra,
                                   "tangential_order": self.tangential_order + extra})


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True)
class ShellSpec:
    t: float
    width: float = 1.0

    def __post_init__(self):
        if self.width != 1.0:
            raise ContractViolation("shells have width exactly 1; use integrate_band")


# -- 1-D rules ---------------------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss(breaks, order):
    """Gauss-Legendre nodes and weights on consecutive panels [breaks[i], breaks[i+1]]."""
    b = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    a, c = b[:-1, None], b[1:, None]
    nodes = 0.5 * (a + c) + 0.5 * (c - a) * x
    weights = 0.5 * (c - a) * w
    return nodes.ravel(), weights.ravel()


def graded_breaks(lo, hi, anchors, widths, growth=0.5, max_panel=4.0):
    """Panel breakpoints on [lo, hi]; width h_a + growth*|u - a| near anchor a."""
    if not hi > lo:
        return np.array([lo, lo])
    anchors = [(min(max(a, lo), hi), h) for a, h in zip(anchors, widths) if np.isfinite(a)]

    def width(u):
        best = max_panel
        for a, h in anchors:
            best = min(best, h + growth * abs(u - a))
        return best

    fixed = sorted({lo, hi, *(a for a, _ in anchors)})
    out = [lo]
    for left, right in zip(fixed[:-1], fixed[1:]):
        u = left
        while right - u > 1e-12 * max(1.0, abs(right)):
            h = width(u)
            for _ in range(50):
                h_new = min(h, width(min(u + h, right)))
                if h_new >= h * 0.999:
                    break
                h = h_new
            u = right if u + h >= right - 1e-9 * h else u + h
            out.append(u)
    return np.asarray(out)


def periodic_rule(m):
    """Trapezoid rule on [0, 2π): exact for trigonometric degree < m."""
    theta = 2 * np.pi * np.arange(m) / m
    return theta, np.full(m, 2 * np.pi / m)


def circle_rule(m, breaks=()):
    if not breaks:
        return periodic_rule(m)
    pts = sorted({0.0, 2 * np.pi, *[b % (2 * np.pi) for b in breaks]})
    return composite_gauss(pts, m)


# -- spheres -----------------------------------------------------------------

def sphere_area(k):
    return 2 * np.pi ** k / math.factorial(k - 1)


def sphere_monomial_integral(alpha):
    """∫_{S^{2k-1}} |u^alpha|^2 dσ = 2 π^k alpha! / (k-1+|alpha|)!."""
    k = len(alpha)
    return 2 * np.pi ** k * multi_factorial(alpha) / math.factorial(k - 1 + sum(alpha))


def sphere_integral(f: Poly, g: Poly):
    """∫_{S^{2k-1}} f conj(g) dσ for homogeneous f, g of equal degree in k variables.

    Distinct monomials are σ-orthogonal, so only matching exponents contribute.
    """
    if f.n != g.n:
        raise ContractViolation("f and g must live in the same number of variables")
    degrees = {sum(a) for a in f.coeffs} | {sum(a) for a in g.coeffs}
    if len(degrees) > 1:
        raise ContractViolation(f"non-homogeneous input (degrees {sorted(degrees)})")
    total = 0j
    for alpha, c in f.coeffs.items():
        d = g.coeffs.get(alpha)
        if d is not None:
            total += c * np.conj(d) * sphere_monomial_integral(alpha)
    return total


def sphere_mc_points(k, count, seed, replicate=0):
    """Scrambled-Sobol points on S^{2k-1} (Gaussian map, then normalize)."""
    m = max(1, int(math.ceil(math.log2(count))))
    ss = np.random.SeedSequence([seed, replicate, k])
    sampler = qmc.Sobol(d=2 * k, scramble=True, seed=np.random.default_rng(ss))
    u = sampler.random_base2(m)
    u = np.clip(u, 1e-16, 1 - 1e-16)
    g = ndtri(u)
    v = g[:, :k] + 1j * g[:, k:]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def hopf_rule(eta_breaks, eta_order, theta_order):
    """Tensor rule on S^3 in Hopf coordinates v = (cos η e^{iθ1}, sin η e^{iθ2})."""
    eta, we = composite_gauss(eta_breaks, eta_order)
    th, wt = periodic_rule(theta_order)
    E, T1, T2 = np.meshgrid(eta, th, th, indexing="ij")
    v = np.stack([np.cos(E) * np.exp(1j * T1), np.sin(E) * np.exp(1j * T2)], axis=-1)
    w = (we * np.sin(eta) * np.cos(eta))[:, None, None] * wt[None, :, None] * wt[None, None, :]
    return v.reshape(-1, 2), w.ravel()


def sphere_rule(k, cfg: QuadratureConfig, breaks=(), replicate=None):
    """Directions v on S^{2k-1} and weights summing to the sphere area.

    k = 1: periodic trapezoid (or Gauss panels split at ``breaks``);
    k = 2: Hopf coordinates v = (cos η e^{iθ1}, sin η e^{iθ2}), dσ = sin η cos η;
    k >= 3: randomized quasi-Monte Carlo, replicate ``replicate`` (all when None).
    """
    m = cfg.angular_order
    if k == 1:
        th, w = circle_rule(m, breaks)
        return np.exp(1j * th)[:, None], w
    if k == 2:
        return hopf_rule(sorted({0.0, np.pi / 2, *breaks}), max(2, m // 2), m)
    reps = range(cfg.mc_replicates) if replicate is None else [replicate]
    per = cfg.mc_samples // cfg.mc_replicates
    v = np.concatenate([sphere_mc_points(k, per, cfg.seed, r) for r in reps])
    return v, np.full(len(v), sphere_area(k) / len(v))


# -- normal slices -----------------------------------------------------------

def fiber_rule(fiber: FiberSlice, cfg: QuadratureConfig, u_range=(-np.inf, np.inf),
               kinks=(), kink_widths=(), directions=None):
    """Nodes z' (N, k) and weights for ∫_{slice ∩ {u_lo < u < u_hi}} F dλ(z').

    ``kinks`` are log-radii where the integrand has a derivative jump; panel
    edges are placed on them and graded with ``kink_widths``.
    """
    k = fiber.k
    if directions is None:
        directions = sphere_rule(k, cfg, fiber.angular_breaks())
    v, wv = directions
    u_top = 2 * np.log(fiber.radius(v))
    top_lo, top_hi = 2 * math.log(fiber.inradius()), 2 * math.log(fiber.outradius())
    u_lo, u_hi = u_range
    hi_g = min(u_hi, top_hi)
    kinks = [u for u in kinks if np.isfinite(u)]
    if np.isfinite(u_lo):
        lo_g = u_lo
    else:
        lo_g = min([top_lo, hi_g, *kinks]) - cfg.depth
    h0 = 1.0 / cfg.panel_count
    anchors = [top_lo, top_hi, u_lo, u_hi, *kinks]
    widths = [h0] * 4 + list(kink_widths or [h0] * len(kinks))
    breaks = graded_breaks(lo_g, hi_g, anchors, widths, cfg.growth, cfg.max_panel)

    x, wx = gauss_legendre(cfg.radial_order)
    hi_d = np.minimum(u_top, hi_g)[:, None]
    A = np.clip(breaks[:-1][None, :], lo_g, hi_d)
    B = np.clip(breaks[1:][None, :], lo_g, hi_d)
    u = 0.5 * (A + B)[..., None] + 0.5 * (B - A)[..., None] * x
    wu = 0.5 * (B - A)[..., None] * wx
    r = np.exp(0.5 * u)
    zp = r[..., None] * v[:, None, None, :]
    w = wu * 0.5 * np.exp(k * u) * wv[:, None, None]
    zp = zp.reshape(-1, k)
    w = w.ravel()
    keep = w > 0
    zp, w = zp[keep], w[keep]
    return zp, w * fiber.density(zp)


def _check_finite(vals):
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand returned non-finite values off S")
    return vals


def _integrate_on_fiber(fiber, integrand, cfg, u_range=(-np.inf, np.inf), kinks=(), kink_widths=()):
    k = fiber.k
    if k >= 3:
        vals = []
        for rep in range(cfg.mc_replicates):
            dirs = sphere_rule(k, cfg, replicate=rep)
            zp, w = fiber_rule(fiber, cfg, u_range, kinks, kink_widths, directions=dirs)
            vals.append(np.sum(w * _check_finite(integrand(fiber.full_points(zp)))))
        vals = np.asarray(vals)
        return QuadResult(complex(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))))
    results = []
    for c in (cfg, cfg.refined()):
        zp, w = fiber_rule(fiber, c, u_range, kinks, kink_widths)
        results.append(np.sum(w * _check_finite(integrand(fiber.full_points(zp)))))
    return QuadResult(complex(results[1]), float(abs(results[1] - results[0])))


def integrate_fiber(fiber: FiberSlice, integrand, cfg: QuadratureConfig | None = None):
    """∫_{U_x} F dV_{U_x}; ``integrand`` maps full points (N, n) to values (N,)."""
    return _integrate_on_fiber(fiber, integrand, cfg or QuadratureConfig())


# -- S itself ----------------------------------------------------------------

def _tangential_sphere(dim, cfg: QuadratureConfig):
    """Directions for the ball base, sized by ``tangential_order``.

    Every base point needs its own fiber rule, so the normal-direction sphere
    rule (``angular_order``, ``mc_samples``) would be far too dense here.
    """
    m = cfg.tangential_order
    if dim == 1:
        return sphere_rule(1, cfg)
    if dim == 2:
        return hopf_rule([0.0, np.pi / 2], m, m)
    v = sphere_mc_points(dim, m ** 3, cfg.seed)
    return v, np.full(len(v), sphere_area(dim) / len(v))


def tangential_rule(geom: ModelGeometry, cfg: QuadratureConfig):
    """Base points x (M, n-k) of S and weights for dV_S (unit mass if S is a point)."""
    layout = tangential_layout(geom)
    m = cfg.tangential_order
    if layout[0] == "point":
        return np.zeros((1, 0), dtype=complex), np.ones(1)
    if layout[0] == "ball":
        dim = layout[1]
        rho, wr = composite_gauss([0.0, 1.0], m)
        v, wv = _tangential_sphere(dim, cfg)
        X = (rho[:, None, None] * v[None, :, :]).reshape(-1, dim)
        W = (wr * rho ** (2 * dim - 1))[:, None] * wv[None, :]
        return X, W.ravel()
    per_coord = []
    for kind, data in layout[1]:
        if kind == "disc":
            rho, wr = composite_gauss([0.0, data], m)
            th, wt = periodic_rule(cfg.angular_order)
            z = (rho[:, None] * np.exp(1j * th)[None, :]).ravel()
            w = (wr * rho)[:, None] * wt[None, :]
        else:
            (a, b), (c, d) = data
            xr, wr = composite_gauss([a, b], m)
            yi, wi = composite_gauss([c, d], m)
            z = (xr[:, None] + 1j * yi[None, :]).ravel()
            w = wr[:, None] * wi[None, :]
        per_coord.append((z, w.ravel()))
    grids = np.meshgrid(*[z for z, _ in per_coord], indexing="ij")
    wgrid = np.ones(())
    for _, w in per_coord:
        wgrid = np.multiply.outer(wgrid, w)
    X = np.stack([g.ravel() for g in grids], axis=-1)
    return X, wgrid.ravel()


def integrate_tangential(geom: ModelGeometry, func, cfg: QuadratureConfig | None = None):
    """∫_S func(x) dV_S with ``func`` vectorized over base points (M, n-k)."""
    X, w = tangential_rule(geom, cfg or QuadratureConfig())
    return complex(np.sum(w * func(X)))


# -- shells and bands of G ----------------------------------------------------

def _band_u_range(model, x, lo, hi):
    return model.u_of_G(lo, x), model.u_of_G(hi, x)


def _kink_data(model, x, kinks, sharpness):
    us = [model.u_of_G(s, x) for s in kinks]
    h0 = 1.0
    widths = [min(h0, 3.0 / q) if q > 0 else h0 for q in sharpness] if sharpness else []
    return us, widths


def integrate_band(model, lo, hi, integrand, cfg: QuadratureConfig | None = None, x=None,
                   kinks=(), sharpness=()):
    """∫ over {lo < G < hi} of ``integrand``, on the slice through ``x`` or over D.

    ``x=None`` integrates over all of D (fiberwise, then over S); otherwise over
    the slice U_x with its own measure.  ``kinks`` are G-levels where the
    integrand has a derivative jump, with ``sharpness`` the slope change
    (q of the family weight) used to size the panels next to them.
    """
    cfg = cfg or QuadratureConfig()
    geom = model.geometry
    if x is not None:
        fiber = FiberSlice(geom, geom.base_point(x))
        kus, kws = _kink_data(model, fiber.base_point, kinks, sharpness)
        return _integrate_on_fiber(fiber, integrand, cfg, _band_u_range(model, fiber.base_point, lo, hi),
                                   kus, kws)
    X, wx = tangential_rule(geom, cfg)
    err = 0.0
    parts = []
    for xi, w in zip(X, wx):
        fiber = FiberSlice(geom, tuple(xi))
        kus, kws = _kink_data(model, fiber.base_point, kinks, sharpness)
        r = _integrate_on_fiber(fiber, integrand, cfg, _band_u_range(model, fiber.base_point, lo, hi),
                                kus, kws)
        parts.append(w * r.value)
        err += w * r.error
    total = complex(np.sum(np.asarray(parts)))
    return QuadResult(total, float(err))


def shell_t_max(model, x=None):
    """Largest admissible shell floor at base point ``x`` (centre of S when None)."""
    geom = model.geometry
    if x is None:
        x = (0j,) * (geom.n - geom.k)
    fiber = FiberSlice(geom, geom.base_point(x))
    return model.t_max(fiber)


def integrate_shell(model, shell: ShellSpec, integrand, cfg: QuadratureConfig | None = None,
                    x=None, kinks=(), sharpness=()):
    """∫ over {t < G < t+1}, fiberwise at ``x`` or over D ∩ shell when ``x`` is None."""
    t_max = shell_t_max(model, x)
    if shell.t > t_max:
        raise RangeError(f"shell floor t={shell.t} exceeds t_max={t_max:.6g}", t_max=t_max)
    return integrate_band(model, shell.t, shell.t + 1.0, integrand, cfg, x, kinks, sharpness)
