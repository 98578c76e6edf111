import math

import numpy as np
import pytest

from casimir_aqft._numerics import DomainError
from casimir_aqft.fields import Geometry, make_bump
from casimir_aqft.kernels import StateSpec
from casimir_aqft.observables import (density_profile, polygamma3, reference_formulas,
                                      remainder_kernel, smear_density, stress_tensor,
                                      stress_tensor_fd, wick_square_density)

H = Geometry.half_space()
S = Geometry.slab(1.0)
CASIMIR = np.diag([-1.0, 1.0, 1.0, -3.0]) * math.pi ** 2 / 1440


def lattice_wick(z, d=1.0):
    """Direct image-lattice value (1/4 pi^2)[pi^2/12 - pi^2/(4 sin^2(pi z/d))]/d^2."""
    return (math.pi ** 2 / 12 - math.pi ** 2 / (4 * np.sin(math.pi * z / d) ** 2)) / (
        4 * math.pi ** 2 * d * d)


@pytest.mark.parametrize("z", [0.25, 0.5, 1.0, 3.0])
def test_half_space_wick_square(z):
    assert wick_square_density(H, None, z) == pytest.approx(-1 / (32 * math.pi ** 2 * z * z),
                                                            rel=1e-12)
    assert wick_square_density(H, None, z, "direct") == pytest.approx(
        -1 / (16 * math.pi ** 2 * z * z), rel=1e-12)


def test_half_space_stress_conformal_and_minimal():
    for z in (0.3, 1.0):
        T = stress_tensor(H, None, z, 1 / 6)
        assert np.max(np.abs(T)) <= 1e-10 / (32 * math.pi ** 2 * z ** 4)
    T = stress_tensor(H, None, 0.7, 0.0)
    R = reference_formulas(H, "stress", 0.7, 0.0)
    np.testing.assert_allclose(np.diag(T)[:3], np.diag(R)[:3], rtol=1e-10)
    assert abs(T[3, 3]) <= 1e-12 * abs(T[0, 0])
    direct = stress_tensor(H, None, 0.7, 0.0, "direct")
    np.testing.assert_allclose(direct, -2 * T, rtol=1e-12, atol=1e-18)


def test_slab_wick_square_midpoint_and_lattice():
    assert wick_square_density(S, None, 0.5) == pytest.approx(-1 / 24, rel=1e-12)
    z = np.linspace(0.05, 0.95, 10)
    np.testing.assert_allclose(wick_square_density(S, None, z), lattice_wick(z), rtol=1e-10)
    np.testing.assert_allclose(reference_formulas(S, "wick", z), lattice_wick(z), rtol=1e-13)


def test_slab_wick_approaches_single_plate():
    z = 1e-3
    assert wick_square_density(S, None, z) == pytest.approx(-1 / (16 * math.pi ** 2 * z * z),
                                                            rel=1e-6)


@pytest.mark.parametrize("z", [0.1, 0.3, 0.5, 0.85])
def test_slab_conformal_stress_is_uniform(z):
    np.testing.assert_allclose(stress_tensor(S, None, z, 1 / 6), CASIMIR, rtol=1e-9, atol=1e-14)


def test_slab_stress_fd_second_order():
    z = 0.3
    exact = stress_tensor(S, None, z, 0.0)
    errs = [np.max(np.abs(stress_tensor_fd(S, None, z, 0.0, h) - exact)) for h in (0.04, 0.02, 0.01)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.9


def test_fd_step_must_stay_inside():
    with pytest.raises(DomainError):
        stress_tensor_fd(S, None, 0.05, 0.0, 0.04)


def test_points_outside_rejected():
    with pytest.raises(DomainError):
        wick_square_density(S, None, 1.2)
    with pytest.raises(DomainError):
        wick_square_density(H, None, -0.1)


def test_thermal_half_space_far_from_plate():
    beta = 1.0
    st = StateSpec.kms(beta)
    z = 0.5
    # direct thermal term minus the thermal kernel at the mirror separation 2z
    rho = 2 * z
    mirror = 1 / (4 * math.pi * beta * rho * math.tanh(math.pi * rho / beta))
    assert wick_square_density(H, st, z, "direct") == pytest.approx(
        1 / (12 * beta ** 2) - mirror, rel=1e-9)
    T = stress_tensor(H, st, 200.0, 1 / 6, "direct")
    assert T[0, 0] == pytest.approx(math.pi ** 2 / 30, rel=1e-8)
    assert T[3, 3] == pytest.approx(math.pi ** 2 / 90, rel=1e-8)


def test_thermal_slab_stress_matches_fd():
    st = StateSpec.kms(1.0)
    a = stress_tensor(S, st, 0.5, 1 / 6)
    errs = [np.max(np.abs(stress_tensor_fd(S, st, 0.5, 1 / 6, h) - a)) for h in (0.04, 0.02)]
    assert errs[1] <= 4e-3 * np.max(np.abs(a))
    assert math.log2(errs[0] / errs[1]) >= 1.9


def test_remainder_kernel_coincidence():
    K = remainder_kernel(S)
    x = np.array([0.0, 0.0, 0.0, 0.4])
    assert float(K(x, x)) == pytest.approx(wick_square_density(S, None, 0.4), rel=1e-9)


def test_polygamma3_values():
    assert polygamma3(1.0) == pytest.approx(math.pi ** 4 / 15, rel=1e-14)
    assert polygamma3(0.5) == pytest.approx(math.pi ** 4, rel=1e-14)


def test_smeared_density_and_profile():
    f = make_bump((0, 0, 0, 0.5), (0.2, 0.2, 0.2, 0.1))
    v = smear_density((S, None, "wick"), f)
    ref = smear_density((S, None, "reference_wick"), f)
    assert abs(v.value - ref.value) <= 1e-10 * abs(ref.value)
    prof = density_profile(S, None, "wick", np.array([0.25, 0.5]))
    assert prof.values[1] == pytest.approx(-1 / 24, rel=1e-12)
    assert np.all(prof.errors >= 0)
    with pytest.raises(ValueError):
        smear_density((S, None, "wick"), make_bump((0, 0, 0, 0.05), 0.1))


def test_slab_boundary_blow_up_exponents():
    z = np.geomspace(1e-2, 1e-1, 9)
    wick = [abs(wick_square_density(S, None, x)) for x in z]
    t00 = [abs(stress_tensor(S, None, x, 0.0)[0, 0]) for x in z]
    assert np.polyfit(np.log(z), np.log(wick), 1)[0] == pytest.approx(-2.0, rel=1e-2)
    assert np.polyfit(np.log(z), np.log(t00), 1)[0] == pytest.approx(-4.0, rel=1e-2)
