"""Model domains D in C^n, the coordinate submanifold S = {z_1 = ... = z_k = 0},
and the normal slices U_x through points of S.

Every catalog domain is convex and contains the origin of each normal slice,
so a slice is star-shaped about z' = 0 and is described by its radial
function ``radius(v)`` on unit directions v in C^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError

MEMBERSHIP_TOL = 1e-12

DOMAIN_KINDS = ("unit-disc", "unit-ball", "polydisc", "box")


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    n: int
    radii: tuple[float, ...] = ()
    # box: one ((re_lo, re_hi), (im_lo, im_hi)) rectangle per coordinate
    extents: tuple = ()

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.kind == "unit-disc" and self.n != 1:
            raise ConfigError("unit-disc has n = 1")
        if self.kind == "polydisc":
            if len(self.radii) != self.n or min(self.radii) <= 0:
                raise ConfigError("polydisc needs n positive radii")
        if self.kind == "box":
            if len(self.extents) != self.n:
                raise ConfigError("box needs one rectangle per coordinate")
            for (a, b), (c, d) in self.extents:
                if not (b > a and d > c):
                    raise ConfigError("box rectangles must have positive extent")

    @classmethod
    def unit_disc(cls):
        return cls("unit-disc", 1)

    @classmethod
    def unit_ball(cls, n):
        return cls("unit-ball", n)

    @classmethod
    def polydisc(cls, radii):
        radii = tuple(float(r) for r in radii)
        return cls("polydisc", len(radii), radii=radii)

    @classmethod
    def box(cls, extents):
        ext = tuple(tuple(tuple(float(v) for v in side) for side in rect) for rect in extents)
        return cls("box", len(ext), extents=ext)

    def contains(self, z, tol=MEMBERSHIP_TOL):
        """Vectorized membership test for points of shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise DomainError(f"expected points with {self.n} coordinates")
        if self.kind in ("unit-disc", "unit-ball"):
            return np.sum(np.abs(z) ** 2, axis=-1) < 1 + tol
        if self.kind == "polydisc":
            return np.all(np.abs(z) < np.asarray(self.radii) + tol, axis=-1)
        ok = np.ones(z.shape[:-1], dtype=bool)
        for i, ((a, b), (c, d)) in enumerate(self.extents):
            x, y = z[..., i].real, z[..., i].imag
            ok &= (x > a - tol) & (x < b + tol) & (y > c - tol) & (y < d + tol)
        return ok

    def bounding_radius(self):
        """Max |z_i| over D for each coordinate."""
        if self.kind in ("unit-disc", "unit-ball"):
            return np.ones(self.n)
        if self.kind == "polydisc":
            return np.asarray(self.radii)
        return np.array([math.hypot(max(abs(a), abs(b)), max(abs(c), abs(d)))
                         for (a, b), (c, d) in self.extents])

    def to_json(self):
        out = {"kind": self.kind, "n": self.n}
        if self.radii:
            out["radii"] = list(self.radii)
        if self.extents:
            out["extents"] = [[list(s) for s in r] for r in self.extents]
        return out


@dataclass(frozen=True)
class SubmanifoldSpec:
    k: int

    def check(self, dom: DomainSpec):
        if not 1 <= self.k <= dom.n:
            raise ConfigError(f"codimension k={self.k} must lie in [1, n={dom.n}]")
        if dom.kind == "box":
            for (a, b), (c, d) in dom.extents[: self.k]:
                if not (a < 0 < b and c < 0 < d):
                    raise ConfigError("S is empty: normal box sides must straddle 0")


@dataclass(frozen=True)
class ModelGeometry:
    domain: DomainSpec
    sub: SubmanifoldSpec

    def __post_init__(self):
        self.sub.check(self.domain)

    @property
    def n(self):
        return self.domain.n

    @property
    def k(self):
        return self.sub.k

    def base_point(self, x) -> tuple[complex, ...]:
        """Normalize ``x`` (full n-point with z' = 0, or tangential part) to z''."""
        x = tuple(complex(v) for v in np.atleast_1d(np.asarray(x, dtype=complex)).ravel()) \
            if np.size(x) else ()
        n, k = self.n, self.k
        if len(x) == n:
            if max((abs(v) for v in x[:k]), default=0.0) > MEMBERSHIP_TOL:
                raise DomainError(f"point {x} is not on S (normal part nonzero)")
            x = x[k:]
        elif len(x) != n - k:
            raise DomainError(f"expected a point of S with {n - k} or {n} coordinates")
        full = np.array((0j,) * k + x)
        if not bool(self.domain.contains(full)):
            raise DomainError(f"point {x} is not in S ∩ D")
        return x


@dataclass(frozen=True)
class FiberSlice:
    """Normal slice U_x = {z' : (z', x) in D} with dV_{U_x} = density * dλ(z')."""

    geometry: ModelGeometry
    base_point: tuple[complex, ...]

    @property
    def k(self):
        return self.geometry.k

    def full_points(self, zp):
        """Append the base point to normal coordinates of shape (..., k)."""
        zp = np.asarray(zp, dtype=complex)
        x = np.broadcast_to(np.asarray(self.base_point, dtype=complex),
                            zp.shape[:-1] + (len(self.base_point),))
        return np.concatenate([zp, x], axis=-1)

    def contains(self, zp, tol=MEMBERSHIP_TOL):
        return self.geometry.domain.contains(self.full_points(zp), tol)

    def density(self, zp):
        return np.ones(np.asarray(zp).shape[:-1])

    def _ball_radius(self):
        return math.sqrt(max(0.0, 1.0 - sum(abs(v) ** 2 for v in self.base_point)))

    def radius(self, v):
        """Largest r with r*v in the slice, for unit directions v of shape (..., k)."""
        v = np.asarray(v, dtype=complex)
        dom = self.geometry.domain
        if dom.kind in ("unit-disc", "unit-ball"):
            return np.full(v.shape[:-1], self._ball_radius())
        with np.errstate(divide="ignore", invalid="ignore"):
            if dom.kind == "polydisc":
                radii = np.asarray(dom.radii[: self.k])
                return np.min(np.where(np.abs(v) > 0, radii / np.abs(v), np.inf), axis=-1)
            bounds = []
            for i, ((a, b), (c, d)) in enumerate(dom.extents[: self.k]):
                re, im = v[..., i].real, v[..., i].imag
                bounds.append(np.where(re > 0, b / re, np.where(re < 0, a / re, np.inf)))
                bounds.append(np.where(im > 0, d / im, np.where(im < 0, c / im, np.inf)))
            return np.min(bounds, axis=0)

    def inradius(self):
        dom = self.geometry.domain
        if dom.kind in ("unit-disc", "unit-ball"):
            return self._ball_radius()
        if dom.kind == "polydisc":
            return min(dom.radii[: self.k])
        return min(min(abs(a), b, abs(c), d) for (a, b), (c, d) in dom.extents[: self.k])

    def outradius(self):
        dom = self.geometry.domain
        if dom.kind in ("unit-disc", "unit-ball"):
            return self._ball_radius()
        if dom.kind == "polydisc":
            return math.sqrt(sum(r * r for r in dom.radii[: self.k]))
        return math.sqrt(sum(max(abs(a), b) ** 2 + max(abs(c), d) ** 2
                             for (a, b), (c, d) in dom.extents[: self.k]))

    def angular_breaks(self):
        """Kinks of the radial function: theta angles (k = 1) or Hopf eta angles (k = 2)."""
        dom = self.geometry.domain
        if dom.kind == "box" and self.k == 1:
            (a, b), (c, d) = dom.extents[0]
            return sorted(math.atan2(y, x) % (2 * math.pi)
                          for x, y in ((b, d), (a, d), (a, c), (b, c)))
        if dom.kind == "polydisc" and self.k == 2:
            r1, r2 = dom.radii[:2]
            return [math.atan2(r2, r1)]
        return []

    def normal_extent(self):
        dom = self.geometry.domain
        if dom.kind in ("unit-disc", "unit-ball"):
            return {"kind": "ball", "k": self.k, "radius": self._ball_radius()}
        if dom.kind == "polydisc":
            return {"kind": "polydisc", "radii": list(dom.radii[: self.k])}
        return {"kind": "box", "extents": [[list(s) for s in r] for r in dom.extents[: self.k]]}


def fiber_slice(dom: DomainSpec, sub: SubmanifoldSpec, x) -> FiberSlice:
    geom = ModelGeometry(dom, sub)
    return FiberSlice(geom, geom.base_point(x))


def submanifold_volume(dom: DomainSpec, sub: SubmanifoldSpec) -> float:
    """Euclidean volume of S; a point (k = n) carries unit counting mass."""
    sub.check(dom)
    m = dom.n - sub.k
    if m == 0:
        return 1.0
    if dom.kind in ("unit-disc", "unit-ball"):
        return math.pi ** m / math.factorial(m)
    if dom.kind == "polydisc":
        return math.prod(math.pi * r * r for r in dom.radii[sub.k:])
    return math.prod((b - a) * (d - c) for (a, b), (c, d) in dom.extents[sub.k:])


def tangential_layout(geom: ModelGeometry):
    """Shape of S for tangential quadrature: ('point',), ('ball', m) or ('product', parts)."""
    dom, k = geom.domain, geom.k
    m = dom.n - k
    if m == 0:
        return ("point",)
    if dom.kind == "unit-ball":
        return ("ball", m)
    if dom.kind == "polydisc":
        return ("product", [("disc", r) for r in dom.radii[k:]])
    return ("product", [("rect", rect) for rect in dom.extents[k:]])


def decompose(geom: ModelGeometry, z: Sequence[complex]):
    """Split a point of D into (z', z''), so that z' lies in the slice through z''."""
    z = np.asarray(z, dtype=complex)
    return z[..., : geom.k], z[..., geom.k:]
