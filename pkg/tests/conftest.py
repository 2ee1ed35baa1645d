import pytest

from bergman_jet import (DomainSpec, GreenSpec, JetSection, Model, ModelGeometry, Poly,
                         SubmanifoldSpec, WeightSpec)


def make_model(domain="disc", p=2, phi_c=0.0, gamma_c=0.0, k=1):
    if domain == "disc":
        dom = DomainSpec.unit_disc()
    elif domain == "polydisc":
        dom = DomainSpec.polydisc((1.0, 1.0))
    elif domain == "ball2":
        dom = DomainSpec.unit_ball(2)
    elif domain == "bidisc-k2":
        dom = DomainSpec.polydisc((1.0, 1.0))
    else:
        raise ValueError(domain)
    geom = ModelGeometry(dom, SubmanifoldSpec(k))
    green = GreenSpec(k) if gamma_c == 0 else GreenSpec(k, "constant", {"c": gamma_c})
    phi = WeightSpec() if phi_c == 0 else WeightSpec("norm2", {"c": phi_c})
    return Model(geom, green, phi, p)


def disc_jet(p):
    return JetSection(Poly.monomial((p - 1,)), 1)


def polydisc_jet(p):
    """z1^{p-1} (1 + w/2) on the bidisc with S = {z1 = 0}."""
    return JetSection(Poly(2, {(p - 1, 0): 1.0, (p - 1, 1): 0.5}), 1)


@pytest.fixture
def disc2():
    return make_model("disc", 2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", {}) if mod else {}
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
