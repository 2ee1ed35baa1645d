"""Numerical checks of the auxiliary one-variable and comparison lemmas.

Limits as s -> -inf (or u -> 0+) are replaced by extrema over finite grids;
every report records the grid floor and the extremal witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ContractViolation
from .polynomial import Poly
from .quadrature import QuadratureConfig, ShellSpec, integrate_band, integrate_shell
from .weights import Model

PASS, FAIL, CONTRACT = "PASS", "FAIL", "CONTRACT-VIOLATION"


@dataclass
class SweepTable:
    rows: list            # (s, value) with s strictly increasing
    q: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = [(float(s), float(v)) for s, v in self.rows]
        s = [r[0] for r in self.rows]
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ContractViolation("sweep table s values must be strictly increasing")

    def s_values(self):
        return np.array([r[0] for r in self.rows])

    def values(self):
        return np.array([r[1] for r in self.rows])

    def scaled(self):
        """e^s v(s)."""
        return np.exp(self.s_values()) * self.values()

    @classmethod
    def from_function(cls, func, s_grid, q=0.0, meta=None):
        return cls([(s, func(s)) for s in s_grid], q, meta or {})


@dataclass
class Report:
    name: str
    status: str
    witness: object = None
    margin: float = float("nan")
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status == PASS

    def to_json(self):
        return {"name": self.name, "status": self.status, "witness": self.witness,
                "margin": self.margin, **self.details}


@dataclass(frozen=True)
class OneDFunction:
    """F(t) = a e^{bt}, a polynomial Σ c_j t^j, or a piecewise-linear table."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("exponential", "polynomial", "tabulated"):
            raise ContractViolation(f"unknown function kind {self.kind!r}")
        if self.kind == "tabulated":
            t = np.asarray(self.params["t"], dtype=float)
            if len(t) < 2 or np.any(np.diff(t) <= 0) or len(self.params["values"]) != len(t):
                raise ContractViolation("tabulated function needs increasing t and matching values")

    @classmethod
    def exponential(cls, a=1.0, b=1.0):
        return cls("exponential", {"a": a, "b": b})

    @classmethod
    def polynomial(cls, coeffs):
        return cls("polynomial", {"coeffs": list(coeffs)})

    @classmethod
    def tabulated(cls, t, values):
        return cls("tabulated", {"t": list(t), "values": list(values)})

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            return self.params["a"] * np.exp(self.params["b"] * t)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(t, self.params["coeffs"])
        # zero outside the table
        return np.interp(t, self.params["t"], self.params["values"], left=0.0, right=0.0)

    def integral(self, lo, hi):
        """∫_lo^hi F; lo may be -inf."""
        if self.kind == "exponential":
            a, b = self.params["a"], self.params["b"]
            if a == 0:
                return 0.0
            if b == 0:
                return math.inf if lo == -math.inf else a * (hi - lo)
            if lo == -math.inf:
                return a * math.exp(b * hi) / b if b > 0 else math.inf
            return a * (math.exp(b * hi) - math.exp(b * lo)) / b
        if self.kind == "polynomial":
            c = self.params["coeffs"]
            if lo == -math.inf:
                return 0.0 if not any(c) else math.inf
            P = np.polynomial.polynomial.polyint(c)
            return float(np.polynomial.polynomial.polyval(hi, P) - np.polynomial.polynomial.polyval(lo, P))
        t = np.asarray(self.params["t"], dtype=float)
        lo = max(lo, t[0])
        hi = min(hi, t[-1])
        if hi <= lo:
            return 0.0
        grid = np.concatenate([[lo], t[(t > lo) & (t < hi)], [hi]])
        return float(np.trapezoid(self(grid), grid))

    def breakpoints(self):
        return list(self.params["t"]) if self.kind == "tabulated" else []


# -- sweep-table checks -------------------------------------------------------

def check_log_convexity(table: SweepTable, tol=1e-5) -> Report:
    """log v(s) <= (log v(s-h) + log v(s+h))/2 + tol on equally spaced triples."""
    if len(table.rows) < 3:
        raise ContractViolation("log-convexity needs at least 3 rows")
    s, v = table.s_values(), table.values()
    if np.any(v <= 0):
        raise ContractViolation("sweep values must be positive")
    lv = np.log(v)
    worst, witness = -math.inf, None
    for i in range(1, len(s) - 1):
        h1, h2 = s[i] - s[i - 1], s[i + 1] - s[i]
        if abs(h1 - h2) > 1e-9 * max(1.0, abs(h1)):
            continue
        excess = lv[i] - 0.5 * (lv[i - 1] + lv[i + 1])
        if excess > worst:
            worst, witness = excess, float(s[i])
    if witness is None:
        raise ContractViolation("no equally spaced triple in the table")
    status = PASS if worst <= tol else FAIL
    return Report("log_convexity", status, witness, float(tol - worst),
                  {"worst_violation": float(max(worst, 0.0)), "tol": tol, "q": table.q})


def check_increasing_es(table: SweepTable, tol=1e-5) -> Report:
    """e^s v(s) nondecreasing within ``tol`` (relative), with its supremum reported."""
    if len(table.rows) < 2:
        raise ContractViolation("monotonicity needs at least 2 rows")
    s, e = table.s_values(), table.scaled()
    drops = (e[:-1] - e[1:]) / np.abs(e[:-1])
    i = int(np.argmax(drops))
    worst = float(drops[i])
    top_ok = e[-1] >= e[0] * (1 - tol)
    status = PASS if worst <= tol and top_ok else FAIL
    return Report("increasing_es", status, float(s[i + 1]), float(tol - worst),
                  {"worst_drop": max(worst, 0.0), "supremum": float(np.max(e)),
                   "floor_estimate": float(e[0]), "s_floor": float(s[0]), "tol": tol,
                   "q": table.q})


def check_limit_bound(table: SweepTable, jet_norm2, C=None, tol=1e-4) -> Report:
    """e^s v at the grid floor against jet_norm2 (1 - delta).

    delta is bounded through the decomposition estimate e^{-s}‖g'‖² <= J + C/(q-1):
    delta_bound = (C/(q-1)) / (J + C/(q-1)); with C = J this is 1/q.
    """
    q = table.q
    if q <= 1:
        raise ContractViolation("the limit bound needs q > 1")
    C = jet_norm2 if C is None else C
    floor = float(table.scaled()[0])
    excess = C / (q - 1)
    delta_bound = excess / (jet_norm2 + excess)
    delta_obs = 1 - floor / jet_norm2
    margin = floor - jet_norm2 * (1 - delta_bound) + tol
    status = PASS if margin >= 0 else FAIL
    return Report("limit_bound", status, float(table.s_values()[0]), float(margin),
                  {"q": q, "floor_estimate": floor, "jet_norm2": jet_norm2, "C": C,
                   "delta_bound": delta_bound, "delta_observed": delta_obs})


# -- one-variable lemmas ------------------------------------------------------

def _quad(f, a, b, points=None):
    val, _ = quad(f, a, b, limit=200, epsabs=1e-14, epsrel=1e-12,
                  points=[p for p in (points or []) if a < p < b] or None)
    return val


def kernel_H(F: OneDFunction, q, s):
    """H(s) = e^{-s} ∫_s^0 F(t) e^{-q(t-s)} dt."""
    return _quad(lambda t: float(F(t)) * math.exp(-q * (t - s) - s), s, 0.0, F.breakpoints())


def check_kernel_limit(F: OneDFunction, C, q, s_grid, tol=1e-3) -> Report:
    """min over the grid of H(s) against C/(q-1), after checking ∫_{-inf}^s F <= C e^s."""
    if q <= 1:
        raise ContractViolation("the kernel limit needs q > 1")
    s_grid = sorted(float(s) for s in s_grid)
    bound = C / (q - 1)
    for s in s_grid:
        mass = F.integral(-math.inf, s)
        if mass > C * math.exp(s) * (1 + 1e-12):
            return Report("kernel_limit", CONTRACT, s, float(C * math.exp(s) - mass),
                          {"q": q, "C": C, "reason": "integral of F exceeds C e^s"})
    H = [kernel_H(F, q, s) for s in s_grid]
    i = int(np.argmin(H))
    margin = bound * (1 + tol) - H[i]
    return Report("kernel_limit", PASS if margin >= 0 else FAIL, s_grid[i], float(margin),
                  {"q": q, "C": C, "bound": bound, "H_min": H[i], "s_floor": s_grid[0],
                   "H_floor": H[0], "floor_gap": abs(H[0] - bound)})


def check_averaging_inequality(P: OneDFunction, u_grid, s_grid, tol=1e-9) -> Report:
    """min_s (1/s)∫_0^s P <= max_u ∫_u^{eu} P(t)/t dt, for small positive s and u."""
    if min(u_grid) <= 0 or min(s_grid) <= 0:
        raise ContractViolation("averaging grids must be positive")
    pts = P.breakpoints()
    lhs = [_quad(lambda t: float(P(t)), 0.0, s, pts) / s for s in s_grid]
    rhs = [_quad(lambda t: float(P(t)) / t, u, math.e * u, pts) for u in u_grid]
    i, j = int(np.argmin(lhs)), int(np.argmax(rhs))
    margin = rhs[j] - lhs[i] + tol
    return Report("averaging", PASS if margin >= 0 else FAIL, {"s": float(s_grid[i]), "u": float(u_grid[j])},
                  float(margin), {"lhs": lhs[i], "rhs": rhs[j]})


# -- comparison and decomposition on a model ----------------------------------

def shell_value(h: Poly, model: Model, t, cfg=None):
    """∫_{t<G<t+1} |h|² e^{-phi-(p+k-1)G} over D."""
    def f(Z):
        return np.abs(h(Z)) ** 2 * np.exp(-model.log_weight(Z, extra=1))
    return integrate_shell(model, ShellSpec(t), f, cfg).value.real


def sublevel_value(h: Poly, model: Model, s, cfg=None):
    """e^{-s} ∫_{G<s} |h|² e^{-phi-(p+k-2)G} over D."""
    def f(Z):
        return np.abs(h(Z)) ** 2 * np.exp(-model.log_weight(Z))
    return math.exp(-s) * integrate_band(model, -np.inf, s, f, cfg).value.real


def check_compare_lemma(h: Poly, model: Model, s, t_schedule, C=None, cfg=None) -> Report:
    """Shell limit of h against C times its rescaled mass on {G < s}; reports the smallest C."""
    shells = [shell_value(h, model, t, cfg) for t in t_schedule]
    lhs = max(shells)
    rhs = sublevel_value(h, model, s, cfg)
    if rhs <= 0:
        raise ContractViolation("h vanishes identically on {G < s}")
    c_min = lhs / rhs
    margin = float("nan") if C is None else float(C * (1 + 1e-9) - c_min)
    ok = C is None or margin >= 0
    return Report("compare", PASS if ok else FAIL, float(t_schedule[int(np.argmax(shells))]),
                  margin,
                  {"s": s, "shell_limit": lhs, "sublevel": rhs, "C_min": c_min, "C": C,
                   "shells": shells})


def decomposition_terms(h: Poly, model: Model, s, q, cfg=None):
    """Inner e^{-s}∫_{D_s} and outer e^{-s}∫_{D minus D_s} terms of e^{-s}‖h‖²_{s,q}."""
    def inner(Z):
        return np.abs(h(Z)) ** 2 * np.exp(-model.log_weight(Z))

    def outer(Z):
        return np.abs(h(Z)) ** 2 * np.exp(-model.log_weight(Z, s, q))
    a = integrate_band(model, -np.inf, s, inner, cfg).value.real
    b = integrate_band(model, s, np.inf, outer, cfg, kinks=(s,), sharpness=(q,)).value.real
    return math.exp(-s) * a, math.exp(-s) * b


def check_decomposition(h: Poly, model: Model, q, s_grid, jet_norm2, cfg=None, tol=1e-6) -> Report:
    """liminf of inner + outer against jet_norm2 + C/(q-1), C the sup of the inner term."""
    if q <= 1:
        raise ContractViolation("the decomposition bound needs q > 1")
    terms = [decomposition_terms(h, model, s, q, cfg) for s in s_grid]
    inner = [a for a, _ in terms]
    total = [a + b for a, b in terms]
    C = max(inner)
    bound = jet_norm2 + C / (q - 1)
    i = int(np.argmin(total))
    margin = bound * (1 + tol) - total[i]
    return Report("decomposition", PASS if margin >= 0 else FAIL, float(s_grid[i]), float(margin),
                  {"q": q, "inner": inner, "outer": [b for _, b in terms], "C": C,
                   "bound": bound, "liminf_total": total[i]})


# -- default battery ----------------------------------------------------------

def default_battery(cfg: QuadratureConfig | None = None):
    """Reports for the standard examples: kernel, averaging, comparison, decomposition."""
    from .geometry import DomainSpec, ModelGeometry, SubmanifoldSpec
    from .weights import GreenSpec, WeightSpec

    reports = []
    floor = [-20.0, -15.0, -10.0]
    for q in (2.0, 3.0):
        reports.append(check_kernel_limit(OneDFunction.exponential(), 1.0, q, floor))
    reports.append(check_kernel_limit(OneDFunction.polynomial([0.0]), 1.0, 2.0, floor))
    grid = [10.0 ** -e for e in range(1, 7)]
    for P in (OneDFunction.polynomial([1.0]), OneDFunction.polynomial([0.0, 1.0]),
              OneDFunction.polynomial([0.0, 0.0, 1.0])):
        reports.append(check_averaging_inequality(P, grid, grid))
    disc = ModelGeometry(DomainSpec.unit_disc(), SubmanifoldSpec(1))
    for p in (2, 3):
        for green in (GreenSpec(1), GreenSpec(1, "constant", {"c": -0.1})):
            model = Model(disc, green, WeightSpec(), p)
            r = check_compare_lemma(Poly.monomial((p - 1,)), model, -1.0, (-20.0, -25.0, -30.0), 1.0, cfg)
            reports.append(r)
            reports.append(check_compare_lemma(Poly.monomial((p,)), model, -1.0, (-20.0, -25.0, -30.0),
                                               1.0, cfg))
    model = Model(disc, GreenSpec(1), WeightSpec(), 2)
    reports.append(check_decomposition(Poly.monomial((1,)), model, 3.0, [-20.0, -10.0, -5.0],
                                       math.pi, cfg))
    return reports
