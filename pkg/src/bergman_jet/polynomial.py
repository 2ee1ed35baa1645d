"""Multi-indices and sparse complex polynomials in z = (z', z'').

The first ``k`` coordinates are the normal variables z' (S = {z' = 0}), the
remaining ``n - k`` are tangential.  A multi-index is a plain tuple of ``n``
nonnegative ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import factorial, prod
from typing import Iterable, Mapping

import numpy as np


def normal_degree(alpha, k):
    return sum(alpha[:k])


def tangential_degree(alpha, k):
    return sum(alpha[k:])


def multi_factorial(alpha):
    return prod(factorial(a) for a in alpha)


def exponents_of_degree(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponent tuples of length ``n`` with total degree ``d``, graded-lex order."""
    if n == 0:
        return [()] if d == 0 else []
    out = []
    for combo in combinations_with_replacement(range(n), d):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    # lexicographically largest first: z1^d, z1^{d-1} z2, ...
    return sorted(out, reverse=True)


def graded_lex(n: int, max_degree: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(max_degree + 1):
        out.extend(exponents_of_degree(n, d))
    return out


@dataclass(frozen=True)
class Poly:
    """Sparse polynomial sum_a c_a z^a in ``n`` complex variables."""

    n: int
    coeffs: Mapping[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for alpha, c in self.coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n or min(alpha, default=0) < 0:
                raise ValueError(f"bad exponent {alpha} for n={self.n}")
            c = complex(c)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def monomial(cls, alpha, coeff=1.0):
        return cls(len(alpha), {tuple(alpha): coeff})

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    def is_zero(self):
        return not self.coeffs

    def degree(self):
        return max((sum(a) for a in self.coeffs), default=-1)

    def normal_degrees(self, k):
        return {normal_degree(a, k) for a in self.coeffs}

    def __call__(self, z):
        """Evaluate at points ``z`` of shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for alpha, c in self.coeffs.items():
            term = np.full(z.shape[:-1], c, dtype=complex)
            for i, a in enumerate(alpha):
                if a:
                    term = term * z[..., i] ** a
            out += term
        return out

    def __add__(self, other):
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        merged = dict(self.coeffs)
        for a, c in other.coeffs.items():
            merged[a] = merged.get(a, 0) + c
        return Poly(self.n, merged)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return Poly(self.n, {a: scalar * c for a, c in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return other * self
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        out = {}
        for a, c in self.coeffs.items():
            for b, d in other.coeffs.items():
                ab = tuple(x + y for x, y in zip(a, b))
                out[ab] = out.get(ab, 0) + c * d
        return Poly(self.n, out)

    def __pow__(self, m: int):
        out = Poly(self.n, {(0,) * self.n: 1.0})
        for _ in range(m):
            out = out * self
        return out

    def conj_coeffs(self):
        return Poly(self.n, {a: np.conj(c) for a, c in self.coeffs.items()})

    def split_normal(self, k) -> dict[tuple[int, ...], "Poly"]:
        """Group terms by normal exponent: {alpha': polynomial in z''}."""
        groups: dict[tuple[int, ...], dict] = {}
        for a, c in self.coeffs.items():
            groups.setdefault(a[:k], {})[a[k:]] = c
        return {a: Poly(self.n - k, g) for a, g in groups.items()}

    def compose_linear(self, matrix, k):
        """Substitute z' -> M z' in the first ``k`` variables."""
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (k, k):
            raise ValueError("matrix must be k x k")
        rows = []
        for i in range(k):
            rows.append(Poly(self.n, {
                tuple(1 if t == j else 0 for t in range(self.n)): m[i, j]
                for j in range(k)
            }))
        out = Poly.zero(self.n)
        for a, c in self.coeffs.items():
            term = Poly(self.n, {(0,) * k + a[k:]: c})
            for i in range(k):
                if a[i]:
                    term = term * rows[i] ** a[i]
            out = out + term
        return out

    def to_json(self):
        return [
            {"exponent": list(a), "re": c.real, "im": c.imag}
            for a, c in sorted(self.coeffs.items())
        ]

    @classmethod
    def from_json(cls, n, terms: Iterable[dict]):
        coeffs: dict = {}
        for t in terms:
            a = tuple(t["exponent"])
            coeffs[a] = coeffs.get(a, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(n, coeffs)
