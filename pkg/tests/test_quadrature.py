import math

import numpy as np
import pytest

from bergman_jet import DomainSpec, ModelGeometry, Poly, SubmanifoldSpec
from bergman_jet.errors import ConfigError, ContractViolation, RangeError
from bergman_jet.geometry import FiberSlice
from bergman_jet.quadrature import (QuadratureConfig, ShellSpec, circle_rule, composite_gauss,
                                    integrate_band, integrate_fiber, integrate_shell,
                                    integrate_tangential, periodic_rule, sphere_area,
                                    sphere_integral, sphere_mc_points, sphere_monomial_integral,
                                    sphere_rule, tangential_rule)
from conftest import make_model


def one(Z):
    return np.ones(len(Z))


def _slice(dom, k, x=()):
    geom = ModelGeometry(dom, SubmanifoldSpec(k))
    return FiberSlice(geom, geom.base_point(x))


@pytest.mark.parametrize("dom,k,expected", [
    (DomainSpec.unit_disc(), 1, math.pi),
    (DomainSpec.unit_ball(2), 2, math.pi ** 2 / 2),
    (DomainSpec.polydisc((1.0, 1.0)), 2, math.pi ** 2),
    (DomainSpec.polydisc((1.0, 2.0)), 2, 4 * math.pi ** 2),
    (DomainSpec.box([((-1.0, 2.0), (-0.5, 1.0))]), 1, 4.5),
])
def test_slice_volumes(dom, k, expected):
    r = integrate_fiber(_slice(dom, k), one)
    assert r.value.real == pytest.approx(expected, rel=1e-12)


def test_ball_c3_volume_by_qmc():
    r = integrate_fiber(_slice(DomainSpec.unit_ball(3), 3), one)
    assert r.value.real == pytest.approx(math.pi ** 3 / 6, rel=1e-12)


def test_sphere_identity():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(2 * math.pi ** 2)
    # 2 pi^k alpha! / (k-1+|alpha|)!
    assert sphere_monomial_integral((1, 2)) == pytest.approx(2 * math.pi ** 2 * 2 / math.factorial(4))
    f = Poly(2, {(1, 0): 1.0, (0, 1): 1.0})
    # each |v_i|^2 integrates to half the area of S^3
    assert sphere_integral(f, f) == pytest.approx(2 * math.pi ** 2)
    with pytest.raises(ContractViolation):
        sphere_integral(Poly(1, {(1,): 1.0, (2,): 1.0}), f)


def test_sphere_rule_exact_on_monomials():
    cfg = QuadratureConfig()
    v, w = sphere_rule(2, cfg)
    val = np.sum(w * np.abs(v[:, 0]) ** 2 * np.abs(v[:, 1]) ** 4)
    assert val == pytest.approx(sphere_monomial_integral((1, 2)), rel=1e-12)
    # distinct monomials are orthogonal
    assert abs(np.sum(w * v[:, 0] * np.conj(v[:, 1]))) < 1e-14


def test_mc_agrees_with_tensor_rule_within_three_sigma():
    pts = np.concatenate([sphere_mc_points(2, 20000, seed=3, replicate=r) for r in range(8)])
    vals = np.abs(pts[:, 0]) ** 2 * np.abs(pts[:, 1]) ** 2 * sphere_area(2)
    blocks = vals.reshape(8, -1).mean(axis=1)
    se = blocks.std(ddof=1) / math.sqrt(8)
    exact = sphere_monomial_integral((1, 1))
    assert abs(blocks.mean() - exact) <= 3 * se + 1e-12


def test_periodic_and_circle_rules():
    th, w = periodic_rule(16)
    assert np.sum(w * np.cos(3 * th) ** 2) == pytest.approx(math.pi)
    th, w = circle_rule(12, [0.3, 2.0])
    assert np.sum(w) == pytest.approx(2 * math.pi)
    x, w = composite_gauss([0.0, 0.5, 2.0], 6)
    assert np.sum(w * x ** 5) == pytest.approx(2.0 ** 6 / 6)


def test_shell_of_log_measure():
    # ∫_{t<log|z|^2<t+1} |z|^{-2} dλ = π on the disc
    m = make_model("disc")
    f = lambda Z: 1.0 / np.abs(Z[:, 0]) ** 2
    r = integrate_shell(m, ShellSpec(-10.0), f)
    assert r.value.real == pytest.approx(math.pi, rel=1e-12)


def test_band_with_kink_oracle():
    # 2π ∫ r e^{-2 max(log r^2 + 1, 0)} dr; frozen from a 30-digit 1-D quadrature
    m = make_model("disc")
    f = lambda Z: np.exp(-2 * np.maximum(np.log(np.abs(Z[:, 0]) ** 2) + 1.0, 0.0))
    r = integrate_band(m, -np.inf, 0.0, f, kinks=(-1.0,), sharpness=(2.0,))
    assert r.value.real == pytest.approx(1.8862863679942071, rel=1e-12)


def test_shell_range_and_width_contracts():
    m = make_model("disc")
    with pytest.raises(RangeError) as err:
        integrate_shell(m, ShellSpec(-0.5), one)
    assert err.value.t_max == pytest.approx(-1.0)
    with pytest.raises(ContractViolation):
        ShellSpec(-5.0, width=0.5)


def test_tangential_volume_and_config_validation():
    geom = ModelGeometry(DomainSpec.polydisc((1.0, 2.0)), SubmanifoldSpec(1))
    assert integrate_tangential(geom, lambda X: np.ones(len(X))).real == pytest.approx(4 * math.pi)
    ball = ModelGeometry(DomainSpec.unit_ball(3), SubmanifoldSpec(1))
    vol = integrate_tangential(ball, lambda X: np.ones(len(X))).real
    assert vol == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    with pytest.raises(ConfigError):
        QuadratureConfig(radial_order=1)
    with pytest.raises(ConfigError):
        QuadratureConfig(mc_samples=100)


def test_ball_tangential_rule_is_compact_and_exact():
    # S = {z1 = 0} in the unit ball of C^3 is the unit ball of C^2.
    ball = ModelGeometry(DomainSpec.unit_ball(3), SubmanifoldSpec(1))
    cfg = QuadratureConfig()
    X, w = tangential_rule(ball, cfg)
    assert len(X) <= cfg.tangential_order ** 4
    # ∫_{B^2} |x1|^4 |x2|^2 = π²/6 (sphere moment) times ∫_0^1 ρ^9 dρ = π²/60
    f = np.abs(X[:, 0]) ** 4 * np.abs(X[:, 1]) ** 2
    expected = math.pi ** 2 / 60
    assert sphere_monomial_integral((2, 1)) / 10.0 == pytest.approx(expected, rel=1e-14)
    assert np.sum(w * f) == pytest.approx(expected, rel=1e-12)
