import math

import numpy as np
import pytest

from casimir_aqft._numerics import DomainError
from casimir_aqft.fields import make_bump
from casimir_aqft.kernels import (FreeProfile, SmearedValue, StateSpec, causal_pairing,
                                  hadamard_parametrix, kirchhoff_apply, kms_kernel, smear2,
                                  thermal_remainder, vacuum_kernel)

# Matsubara sums sum_m k0(a + i m beta, rho) at 30 digits (mpmath nsum), beta = 1.3
MATSUBARA = [
    (0.3 - 0.01j, 0.5, 0.199875746129314374749896191178 - 0.00571674012127070281304114445498j),
    (1.2 - 0.2j, 0.1, -0.00105334970204327141330383677584 - 0.00154443785927539721298110537596j),
]


def k0(a, rho):
    return 1.0 / (4 * math.pi ** 2 * (rho * rho - a * a))


@pytest.mark.parametrize("a, rho, ref", MATSUBARA)
def test_thermal_profile_matches_matsubara_sum(a, rho, ref):
    assert abs(FreeProfile(1.3)(a, rho) - ref) <= 1e-13 * abs(ref)


def test_thermal_profile_matches_hyperbolic_form():
    beta = 1.3
    p = FreeProfile(beta)
    for a, r in [(0.05 - 0.6j, 2.0), (3 - 0.01j, 2.9), (0.2 - 0.001j, 1e-4)]:
        x = 2 * math.pi * r / beta
        ref = np.sinh(x) / (np.cosh(x) - np.cosh(2 * math.pi * a / beta)) / (4 * math.pi * beta * r)
        assert abs(p(a, r) - ref) <= 1e-12 * abs(ref)


def test_vacuum_profile_and_remainder_split():
    p0 = FreeProfile()
    assert p0(0.3 - 0.01j, 0.7) == pytest.approx(k0(0.3 - 0.01j, 0.7), rel=1e-15)
    beta, a, r = 2.0, 0.4 - 0.05j, 0.9
    total = FreeProfile(beta)(a, r)
    assert abs(total - k0(a, r) - thermal_remainder(a, r, beta)) <= 1e-14 * abs(total)


def test_thermal_remainder_at_origin():
    beta = 1.7
    w0, wtt, wii = FreeProfile(beta).remainder_at_origin()
    assert w0 == pytest.approx(1 / (12 * beta ** 2), rel=1e-12)
    assert wtt == pytest.approx(-math.pi ** 2 / (30 * beta ** 4), rel=1e-10)
    assert wii == pytest.approx(-math.pi ** 2 / (90 * beta ** 4), rel=1e-10)


def test_strip_check():
    p = FreeProfile(1.0)
    with pytest.raises(DomainError):
        p.check_dt(0.1 - 1.5j)
    with pytest.raises(DomainError):
        p.check_dt(0.1 + 0.2j)
    with pytest.raises(ValueError):
        StateSpec.kms(-1.0)


def test_smeared_value_arithmetic():
    a, b = SmearedValue(1.0, 0.1), SmearedValue(2.0j, 0.2)
    c = (a + b).scale(2.0)
    assert c.value == 2 + 4j and c.err == pytest.approx(0.6)
    assert (a - b).err == pytest.approx(0.3)


F = make_bump((0, 0, 0, 0), 0.5)
G = make_bump((0.3, 1.5, 0.2, 0.1), (0.5, 0.4, 0.5, 0.6))


def test_smear2_hermitian_and_commutator_routes():
    K = vacuum_kernel()
    fg, gf = smear2(K, F, G), smear2(K, G, F)
    assert abs(fg.value - np.conj(gf.value)) <= 10 * (fg.err + gf.err)
    E_kernel = (-1j * (fg.value - gf.value)).real
    E_kirch = causal_pairing(F, G, route="kirchhoff")
    assert abs(E_kernel - E_kirch.value) <= 1e-4 * abs(E_kirch.value)


def test_kms_imaginary_shift_swaps_order():
    beta = 1.0
    K = kms_kernel(beta)
    shifted = smear2(K, F, G, imag_shift=beta)
    swapped = smear2(K, G, F)
    assert abs(shifted.value - swapped.value) <= 10 * (shifted.err + swapped.err) + 1e-12


def test_thermal_commutator_is_state_independent():
    v = smear2(vacuum_kernel(), F, G)
    v_ = smear2(vacuum_kernel(), G, F)
    t = smear2(kms_kernel(2.0), F, G)
    t_ = smear2(kms_kernel(2.0), G, F)
    E0 = v.value - v_.value
    ET = t.value - t_.value
    assert abs(E0 - ET) <= 1e-5 * abs(E0)


def test_hadamard_parametrix_flag():
    assert hadamard_parametrix().is_hadamard_parametrix
    assert not vacuum_kernel().is_hadamard_parametrix


def test_kirchhoff_solves_wave_equation():
    f = make_bump((0, 0, 0, 0), 1.0)
    h = 1 / 64
    for x0 in (np.array([3.0, 1.5, 0.3, 0.2]), np.array([0.2, 0.1, 0.0, 0.1])):
        pts = [x0]
        for mu in range(4):
            for s in (1, -1):
                e = np.zeros(4)
                e[mu] = s * h
                pts.append(x0 + e)
        v = kirchhoff_apply("retarded", f, np.array(pts))
        box = (-(v[1] + v[2] - 2 * v[0])
               + sum(v[2 * m + 1] + v[2 * m + 2] - 2 * v[0] for m in (1, 2, 3))) / h ** 2
        assert abs(box + f(x0)) <= 1e-4


def test_kirchhoff_retarded_vanishes_in_past():
    f = make_bump((0, 0, 0, 0), 0.5)
    x = np.array([[-1.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0]])
    np.testing.assert_array_equal(kirchhoff_apply("retarded", f, x), 0.0)


def test_low_temperature_approaches_vacuum():
    # relative thermal correction is pi^2 (r^2 - a^2) / (3 beta^2) to leading order
    a, r = 0.2 - 0.01j, 0.6
    for beta in (50 * r, 200 * r):
        rel = FreeProfile(beta)(a, r) / k0(a, r) - 1
        lead = math.pi ** 2 * (r * r - a * a) / (3 * beta ** 2)
        assert abs(rel - lead) <= 0.02 * abs(lead)
