import numpy as np
import pytest

from casimir_aqft.algebra import (PairingKind, RegularFunctional, ccr_causality_check,
                                  commutator, generator, sigma_c_pairing, star_product,
                                  symplectic_witness)
from casimir_aqft.fields import image_N, make_bump

F = make_bump((0, 0, 0, 0.5), (0.3, 0.2, 0.2, 0.2))
G = make_bump((0.5, 0.1, 0, 0.4), (0.3, 0.2, 0.2, 0.2))
K = make_bump((0.2, 0.0, 0.1, 0.55), (0.2, 0.2, 0.2, 0.2))
FAR = make_bump((0, 1.5, 0, 0.5), 0.2)


class CountingPairing(PairingKind):
    """Synthetic antisymmetric pairing with exact values, for bookkeeping tests."""

    def __init__(self):
        super().__init__("minkowski")

    def _compute(self, f, g):
        from casimir_aqft.kernels import SmearedValue
        v = (f.center.t - g.center.t) + 0.1 * (f.center.z - g.center.z)
        return SmearedValue(v, 0.0)


def test_unit_and_linear_structure():
    P = CountingPairing()
    one = RegularFunctional.constant(1.0)
    f = generator(F)
    assert (star_product(f, one, P) - f).is_zero()
    prod = star_product(generator(F), generator(G), P)
    assert prod.coefficient(F, G).value == 1.0
    assert prod.scalar().value == pytest.approx(0.5j * P(F, G).value)
    assert prod.degree == 2


def test_self_commutator_vanishes_exactly():
    C = commutator(generator(F), generator(F), CountingPairing())
    assert all(c == 0 for c, _ in C.terms.values())


def test_quadratic_star_linear_terminates():
    P = CountingPairing()
    Q = RegularFunctional.quadratic(F, G)
    out = star_product(Q, generator(K), P)
    assert out.degree == 3
    assert out.coefficient(G).value == pytest.approx(0.5j * P(F, K).value)
    assert out.coefficient(F).value == pytest.approx(0.5j * P(G, K).value)
    QQ = star_product(Q, Q, P)
    assert QQ.degree == 4
    with pytest.raises(ValueError):
        star_product(QQ, Q, P)


def test_associativity_and_hermiticity_exact_pairing():
    P = CountingPairing()
    a, b, c = generator(F), generator(G), generator(K)
    lhs = star_product(star_product(a, b, P), c, P)
    rhs = star_product(a, star_product(b, c, P), P)
    assert (lhs - rhs).is_zero(1e-15)
    left = star_product(a, b, P).star()
    right = star_product(b.star(), a.star(), P)
    assert (left - right).is_zero(1e-15)


def test_evaluation_on_configuration():
    f = generator(F)
    one = lambda p: np.ones(p.shape[:-1])
    assert (f * f)(one) == pytest.approx(F.integral() ** 2, rel=1e-10)
    assert RegularFunctional.constant(2.0)(one) == 2.0


def test_ccr_with_minkowski_and_deformed():
    mink = ccr_causality_check(F, G, PairingKind.minkowski())
    deformed = ccr_causality_check(F, G, PairingKind.deformed())
    assert mink.structure_ok and deformed.structure_ok
    assert abs(mink.commutator_scalar.value.real) == 0.0
    diff = abs(mink.commutator_scalar.value - deformed.commutator_scalar.value)
    assert diff <= 10 * (mink.commutator_scalar.err + deformed.commutator_scalar.err
                         + mink.pairing_value.err + deformed.pairing_value.err)


def test_spacelike_commutator_vanishes():
    r = ccr_causality_check(F, FAR, PairingKind.slab(1.0))
    assert r.spacelike
    assert r.deviation <= 1e-8 * 1e-3


def test_slab_equals_minkowski_on_small_region():
    f = make_bump((0, 0, 0, 0.5), 0.08)
    g = make_bump((0.15, 0.05, 0, 0.5), 0.08)
    a = PairingKind.slab(1.0)(f, g)
    b = PairingKind.minkowski()(f, g)
    assert abs(a.value - b.value) <= 1e-6 * abs(b.value)


def test_associativity_numeric_pairing():
    P = PairingKind.minkowski()
    a, b, c = generator(F), generator(G), generator(K)
    res = star_product(star_product(a, b, P), c, P) - star_product(a, star_product(b, c, P), P)
    assert all(abs(v) <= e + 1e-30 for v, e in res.terms.values())


def test_sigma_antisymmetric_and_witness():
    d = 1.0
    w = symplectic_witness(d)
    assert w.separated
    r = sigma_c_pairing(image_N(w.f, d), image_N(w.f_prime, d), d)
    s = sigma_c_pairing(image_N(w.f_prime, d), image_N(w.f, d), d)
    assert abs(r.value.value + s.value.value) <= 1e-12 * abs(r.value.value)
    assert r.asymmetry <= 10 * r.value.err + 1e-6 * abs(r.value.value)


def test_pairing_kind_validation():
    with pytest.raises(ValueError):
        PairingKind("other")
    with pytest.raises(ValueError):
        PairingKind("slab")
