import math

import numpy as np
import pytest

from bergman_jet import JetSection, Poly
from bergman_jet.bergman import (BasisTruncation, GramMatrix, disc_scaled_dual_norm, dual_norm,
                                 dual_norm_sweep, functional_moments, gram)
from bergman_jet.errors import ConditioningError, ContractViolation
from bergman_jet.weights import FamilyParams
from conftest import disc_jet, make_model, polydisc_jet

# 1-D radial oracles, evaluated once at 30 digits and frozen
GRAM11_S1_Q2 = 1.8862863679942071
DISC_SCALED = {
    (2, 0): 3.1415926535897932, (2, -1): 1.9248533060845995,
    (2, -5): 1.5761061867705921, (2, -20): 1.5707963284137229,
    (3, 0): 3.1415926535897932, (3, -1): 2.1933405575918778,
    (3, -5): 2.0944267980030362, (3, -20): 2.0943951023931955,
    (5, 0): 3.1415926535897932, (5, -1): 2.5225144154970085,
    (5, -5): 2.5132741239078834, (5, -20): 2.5132741228718346,
}


def test_truncation_indices():
    tr = BasisTruncation(2, 1, 3, 4)
    assert all(a[0] >= 2 for a in tr.indices)
    assert tr.indices == BasisTruncation(2, 1, 3, 4).indices
    assert [tr.indices[i] for i in tr.fixed()] == [(2, 0), (2, 1), (2, 2)]
    assert len(tr.free()) == len(tr.indices) - 3
    with pytest.raises(ContractViolation):
        BasisTruncation(1, 1, 4, 2)


def test_disc_gram_examples():
    m = make_model("disc")
    tr = BasisTruncation.for_model(m)
    G = gram(tr, m).entries
    pos = tr.position()
    assert G[pos[(1,)], pos[(1,)]].real == pytest.approx(math.pi, rel=1e-13)
    assert G[pos[(2,)], pos[(2,)]].real == pytest.approx(math.pi / 2, rel=1e-13)
    assert abs(G[pos[(1,)], pos[(2,)]]) < 1e-14
    Gs = gram(tr, m, FamilyParams(-1.0, 2.0, 2)).entries
    assert Gs[0, 0].real == pytest.approx(GRAM11_S1_Q2, rel=1e-12)


def test_radial_orthogonality_polydisc():
    m = make_model("polydisc", p=3, phi_c=0.5)
    G = gram(BasisTruncation.for_model(m, 6), m, verify=True).entries
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) <= 1e-8 * np.max(np.abs(np.diag(G)))
    assert np.allclose(G, G.conj().T, atol=0)


def test_gram_positive_definite_offcentre_weight():
    from bergman_jet import WeightSpec, Model
    base = make_model("polydisc")
    m = Model(base.geometry, base.green, WeightSpec("weighted-norm2", {"coeffs": [0.3, 0.7]}), 2)
    gm = gram(BasisTruncation.for_model(m, 5), m)
    assert gm.min_pivot() > 0


def test_functional_moments():
    m = make_model("disc")
    tr = BasisTruncation.for_model(m)
    xi = functional_moments(disc_jet(2), tr, m)
    pos = tr.position()
    assert xi.moments[pos[(1,)]] == pytest.approx(math.pi)
    assert xi.moments[pos[(2,)]] == 0
    mp = make_model("polydisc")
    trp = BasisTruncation.for_model(mp, 4)
    xip = functional_moments(JetSection(Poly.monomial((1, 0)), 1), trp, mp)
    posp = trp.position()
    # odd tangential moment vanishes
    assert abs(xip.moments[posp[(1, 1)]]) < 1e-14
    assert xip.moments[posp[(1, 0)]].real == pytest.approx(math.pi ** 2)
    nonzero = [trp.indices[i] for i in np.flatnonzero(np.abs(xip.moments) > 1e-14)]
    assert all(a[0] == 1 for a in nonzero)


def test_dual_norm_examples():
    m = make_model("disc")
    tr = BasisTruncation.for_model(m)
    xi = functional_moments(disc_jet(2), tr, m)
    assert dual_norm(xi, gram(tr, m)) == pytest.approx(math.pi, rel=1e-13)
    zero = functional_moments(JetSection(Poly.zero(1), 1), tr, m)
    assert dual_norm(zero, gram(tr, m)) == 0.0
    v = dual_norm(xi, gram(tr, m, FamilyParams(-1.0, 2.0, 2)))
    assert v == pytest.approx(math.pi * math.e / (2 - math.exp(-1)), rel=1e-12)


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("s", [0, -1, -5, -20])
def test_disc_closed_form_against_oracle(q, s):
    assert disc_scaled_dual_norm(s, q) == pytest.approx(DISC_SCALED[(q, s)], rel=1e-14)
    m = make_model("disc", 2)
    tr = BasisTruncation.for_model(m)
    xi = functional_moments(disc_jet(2), tr, m)
    v = math.exp(s) * dual_norm(xi, gram(tr, m, FamilyParams(s, q, 2)))
    assert v == pytest.approx(DISC_SCALED[(q, s)], rel=1e-10)


def test_q1_limit_formula():
    assert disc_scaled_dual_norm(-2.0, 1.0) == pytest.approx(math.pi / 3)
    assert disc_scaled_dual_norm(-2.0, 1.0 + 1e-7) == pytest.approx(math.pi / 3, rel=1e-6)


def test_cholesky_failure_reports_pivot():
    G = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 2.0], [0.0, 2.0, 1.0]], dtype=complex)
    with pytest.raises(ConditioningError) as err:
        GramMatrix(G, [(0,), (1,), (2,)]).cholesky()
    assert err.value.pivot == 2


def test_truncation_monotonicity():
    m = make_model("polydisc", p=2, phi_c=0.25)
    g = JetSection(Poly(2, {(1, 0): 1.0, (1, 1): 0.5}), 1)
    vals = []
    for N in (2, 4, 6):
        tr = BasisTruncation.for_model(m, N)
        fp = FamilyParams(-2.0, 3.0, 2)
        vals.append(dual_norm(functional_moments(g, tr, m), gram(tr, m, fp)))
    assert vals[0] <= vals[1] * (1 + 1e-12) and vals[1] <= vals[2] * (1 + 1e-12)


def test_degenerate_family_is_flat():
    m = make_model("polydisc", p=2)
    tr = BasisTruncation.for_model(m, 4)
    xi = functional_moments(polydisc_jet(2), tr, m)
    tab = dual_norm_sweep(xi, m, tr, [-10.0, -3.0, 0.0], 0.0)
    assert np.ptp(tab.values()) <= 1e-12 * tab.values()[0]


def test_sweep_limits():
    m = make_model("disc")
    tr = BasisTruncation.for_model(m)
    xi = functional_moments(disc_jet(2), tr, m)
    tab = dual_norm_sweep(xi, m, tr, [-20.0, 0.0], 2.0)
    assert tab.scaled()[1] == pytest.approx(math.pi)
    assert tab.scaled()[0] == pytest.approx(math.pi / 2, rel=1e-6)
    tab = dual_norm_sweep(xi, m, tr, [-30.0], 1.5)
    assert tab.scaled()[0] == pytest.approx(disc_scaled_dual_norm(-30.0, 1.5), rel=1e-10)
    assert tab.scaled()[0] == pytest.approx(math.pi / 3, rel=1e-6)
    with pytest.raises(ContractViolation):
        dual_norm_sweep(xi, m, tr, [0.0, -1.0], 2.0)


def test_thread_count_does_not_change_gram(monkeypatch):
    m = make_model("polydisc", p=2, phi_c=0.25)
    tr = BasisTruncation.for_model(m, 4)
    fp = FamilyParams(-1.0, 2.0, 2)
    G1 = gram(tr, m, fp).entries
    monkeypatch.setenv("BERGMAN_JET_THREADS", "3")
    G3 = gram(tr, m, fp).entries
    assert np.array_equal(G1, G3)
