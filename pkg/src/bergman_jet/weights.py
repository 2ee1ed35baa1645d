"""Weights: the Green-type function G = log|z'|^2 + gamma, the psh weight phi,
the jet order p, and the one-parameter family psi(s, z) = max(G(z) - s, 0).

All catalog corrections gamma depend on z only through |z|^2, hence are radial
in z' at every base point.  Along a normal ray z' = e^{u/2} v the Green
function is then a function G(u, x) of the log-radius u = log|z'|^2 alone,
which the quadrature relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from .errors import ConfigError, DomainError
from .geometry import FiberSlice, ModelGeometry

GAMMA_KINDS = ("zero", "constant", "scaled-norm", "bump")
PHI_KINDS = ("zero", "norm2", "weighted-norm2", "max-log")


@dataclass(frozen=True)
class GreenSpec:
    k: int
    kind: str = "zero"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GAMMA_KINDS:
            raise ConfigError(f"unknown gamma kind {self.kind!r}")
        need = {"constant": ("c",), "scaled-norm": ("eps",), "bump": ("a", "width")}
        for key in need.get(self.kind, ()):
            if key not in self.params:
                raise ConfigError(f"gamma {self.kind!r} needs parameter {key!r}")
        if self.kind == "bump" and self.params["width"] <= 0:
            raise ConfigError("bump width must be positive")

    def gamma_of_norm2(self, r2):
        """gamma as a function of |z|^2."""
        r2 = np.asarray(r2, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r2)
        if self.kind == "constant":
            return np.full_like(r2, float(self.params["c"]))
        if self.kind == "scaled-norm":
            return float(self.params["eps"]) * r2
        a, w = float(self.params["a"]), float(self.params["width"])
        return a * np.exp(-r2 / w ** 2)

    def gamma(self, z):
        z = np.asarray(z, dtype=complex)
        return self.gamma_of_norm2(np.sum(np.abs(z) ** 2, axis=-1))

    def is_constant(self):
        return self.kind in ("zero", "constant")

    def to_json(self):
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class WeightSpec:
    kind: str = "zero"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PHI_KINDS:
            raise ConfigError(f"unknown phi kind {self.kind!r}")
        if self.kind == "norm2" and "c" not in self.params:
            raise ConfigError("phi 'norm2' needs parameter 'c'")
        if self.kind == "weighted-norm2":
            coeffs = self.params.get("coeffs")
            if coeffs is None or min(coeffs) < 0:
                raise ConfigError("phi 'weighted-norm2' needs nonnegative 'coeffs'")
        if self.kind == "max-log":
            terms = self.params.get("terms")
            if not terms:
                raise ConfigError("phi 'max-log' needs a nonempty 'terms' list")
            for t in terms:
                # psh by construction: b >= 0 and eps > 0 keeps each term continuous
                if t.get("b", 0) < 0 or t.get("eps", 0) <= 0:
                    raise ConfigError("max-log terms need b >= 0 and eps > 0")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a2 = np.abs(z) ** 2
        if self.kind == "zero":
            return np.zeros(z.shape[:-1])
        if self.kind == "norm2":
            return float(self.params["c"]) * np.sum(a2, axis=-1)
        if self.kind == "weighted-norm2":
            c = np.asarray(self.params["coeffs"], dtype=float)
            if c.shape[0] != z.shape[-1]:
                raise ConfigError("weighted-norm2 needs one coefficient per coordinate")
            return a2 @ c
        vals = []
        for t in self.params["terms"]:
            coord = t.get("coord")
            base = np.sum(a2, axis=-1) if coord is None else a2[..., int(coord)]
            vals.append(t.get("c", 0.0) + t["b"] * np.log(t["eps"] + base))
        return np.max(vals, axis=0)

    def is_normal_radial(self):
        """True when phi depends on z' only through |z'| (rotation checks need it)."""
        if self.kind in ("zero", "norm2"):
            return True
        if self.kind == "weighted-norm2":
            return len(set(self.params["coeffs"])) == 1
        return all(t.get("coord") is None for t in self.params["terms"])

    def to_json(self):
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class FamilyParams:
    s: float = 0.0
    q: float = 0.0
    p: int = 2

    def __post_init__(self):
        if self.s > 0:
            raise ConfigError("s must be <= 0")
        if self.q < 0:
            raise ConfigError("q must be >= 0")
        if int(self.p) != self.p or self.p < 2:
            raise ConfigError("jet order p must be an integer >= 2")


def _require_in_domain(geom, z):
    z = np.asarray(z, dtype=complex)
    if not np.all(geom.domain.contains(z)):
        raise DomainError("point outside D")
    return z


def green_value(g: GreenSpec, z, geom: ModelGeometry | None = None):
    """G(z) = log(|z_1|^2 + ... + |z_k|^2) + gamma(z); -inf exactly on S."""
    z = np.asarray(z, dtype=complex)
    if geom is not None:
        _require_in_domain(geom, z)
    r2 = np.sum(np.abs(z[..., : g.k]) ** 2, axis=-1)
    with np.errstate(divide="ignore"):
        return np.log(r2) + g.gamma(z)


def psi(G, s):
    """max(G - s, 0); zero on {G <= s}, including S."""
    G = np.asarray(G, dtype=float)
    return np.where(G > s, G - s, 0.0)


def family_weight(g: GreenSpec, w: WeightSpec, fp: FamilyParams, z,
                  geom: ModelGeometry | None = None):
    """phi + (p+k-2) G + q psi(s, .); +inf on S when p + k - 2 > 0."""
    G = green_value(g, z, geom)
    c = fp.p + g.k - 2
    with np.errstate(invalid="ignore"):
        base = w(z) + (c * G if c else 0.0)
    return base + fp.q * psi(G, fp.s)


def sobol_points(dom, count, seed):
    """Quasi-random points of D (rejection from the bounding box)."""
    n = dom.n
    bound = dom.bounding_radius()
    sampler = qmc.Sobol(d=2 * n, scramble=True, seed=seed)
    out = []
    have = 0
    while have < count:
        u = sampler.random(2 ** int(math.ceil(math.log2(max(count, 2)))))
        z = (2 * u[:, :n] - 1) * bound + 1j * (2 * u[:, n:] - 1) * bound
        z = z[dom.contains(z, tol=0.0)]
        out.append(z)
        have += len(z)
    return np.concatenate(out)[:count]


@dataclass(frozen=True)
class Model:
    """Geometry plus weights: D, S, G, phi and the jet order p."""

    geometry: ModelGeometry
    green: GreenSpec
    phi: WeightSpec
    p: int = 2

    def __post_init__(self):
        if self.green.k != self.geometry.k:
            raise ConfigError("GreenSpec codimension differs from the submanifold")
        if int(self.p) != self.p or self.p < 2:
            raise ConfigError("jet order p must be an integer >= 2")

    @property
    def n(self):
        return self.geometry.n

    @property
    def k(self):
        return self.geometry.k

    def G(self, z):
        return green_value(self.green, z)

    def base_coefficient(self):
        return self.p + self.k - 2

    def log_weight(self, z, s=0.0, q=0.0, extra=0):
        """phi + (p+k-2+extra) G + q psi(s, .) at points z (no domain check)."""
        G = self.G(z)
        c = self.base_coefficient() + extra
        with np.errstate(invalid="ignore"):
            out = self.phi(z) + (c * G if c else 0.0)
        if q:
            out = out + q * psi(G, s)
        return out

    def check_negative(self, samples=10_000, seed=0):
        """Reject configurations where sampling finds G >= 0 on D."""
        pts = sobol_points(self.geometry.domain, samples, seed)
        with np.errstate(divide="ignore"):
            G = self.G(pts)
        worst = float(np.max(G))
        if worst >= 0:
            raise ConfigError(f"G must be negative on D; sampled max G = {worst:.3g}")
        return worst

    # -- radial structure along normal rays ---------------------------------

    def G_on_ray(self, u, x):
        """G at log-radius u = log|z'|^2 over base point x."""
        u = np.asarray(u, dtype=float)
        x2 = sum(abs(v) ** 2 for v in x)
        return u + self.green.gamma_of_norm2(np.exp(u) + x2)

    def u_of_G(self, level, x, u_hi=None):
        """Inverse of u -> G(u, x); G is strictly increasing on catalog rays."""
        if level == -np.inf:
            return -np.inf
        if self.green.is_constant():
            return level - float(self.green.gamma_of_norm2(0.0))
        f = lambda u: float(self.G_on_ray(u, x)) - level
        lo, hi = level - 1.0, level + 1.0
        while f(lo) > 0:
            lo -= 2 * (hi - lo)
        while f(hi) < 0:
            hi += 2 * (hi - lo)
        return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def t_max(self, fiber: FiberSlice):
        """Largest shell floor t with {G < t+1} inside the slice."""
        u_edge = 2 * math.log(fiber.inradius()) if fiber.inradius() > 0 else -np.inf
        return float(self.G_on_ray(u_edge, fiber.base_point)) - 1.0

    def fingerprint(self):
        return {
            "domain": self.geometry.domain.to_json(),
            "k": self.k,
            "p": self.p,
            "gamma": self.green.to_json(),
            "phi": self.phi.to_json(),
        }
