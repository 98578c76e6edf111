import math

import numpy as np
import pytest

from casimir_aqft._numerics import AccuracyError, DomainError
from casimir_aqft.boundary import (BoundaryState, ImageSeriesConfig, casimir_kernel_closed,
                                   casimir_pairing, casimir_propagator, cp_kernel, cp_propagator,
                                   fourier_coefficients, half_space_pairing, hypothesis_check,
                                   image_series, kms_condition_check, positivity_form,
                                   slab_kernel)
from casimir_aqft.fields import Geometry, make_bump
from casimir_aqft.kernels import StateSpec, smear2

# direct lattice sums of the image series at 30 digits (mpmath nsum)
LATTICE = [
    ((0.3, 0.1, -0.2, 0.25), (0.0, 0.4, 0.1, 0.7), 1e-3, 1.0,
     0.0506808533475705197064609137812 - 0.000154109810249110083169906376637j),
    ((0.0, 0.0, 0.0, 0.5), (0.9, 0.1, 0.0, 0.5), 1e-2, 1.0,
     -0.271064097148030855160285933116 - 0.021801087060130154130227599249j),
    ((1.2, 0.0, 0.0, 0.1), (0.0, 0.0, 0.3, 0.85), 1e-3, 2.0,
     0.0240834564366353434446964661547 + 0.000205765165196245865804709432838j),
]


@pytest.mark.parametrize("x, xp, eps, d, ref", LATTICE)
def test_closed_form_matches_lattice_sum(x, xp, eps, d, ref):
    assert abs(casimir_kernel_closed(np.array(x), np.array(xp), eps, d) - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("x, xp, eps, d, ref", LATTICE)
def test_image_series_matches_lattice_sum(x, xp, eps, d, ref):
    st = BoundaryState(Geometry.slab(d), StateSpec.vacuum(), ImageSeriesConfig(400, 1e-8))
    res = image_series(st, x, xp, eps)
    assert abs(res.value - ref) <= 1e-9 * abs(ref)
    assert res.err <= 1e-8 * abs(res.value)
    assert res.tail_exponent > 1.8


def test_paired_truncation_consistent_with_tail_model():
    st = BoundaryState(Geometry.slab(1.0), StateSpec.vacuum(), ImageSeriesConfig(400, 1e-8))
    x, xp, eps, d, ref = LATTICE[0]
    res = image_series(st, x, xp, eps)
    # pairs decay like n^-p with p > 1, so the error of S_N shrinks like N^(1-p)
    e_half = abs(res.partial_sums[200] - ref)
    e_full = abs(res.partial_sums[400] - ref)
    ratio = e_half / e_full
    assert ratio == pytest.approx(2 ** (res.tail_exponent - 1), rel=0.05)


def test_series_tolerance_raises():
    st = BoundaryState(Geometry.slab(1.0), StateSpec.vacuum(), ImageSeriesConfig(8, 1e-14))
    with pytest.raises(AccuracyError):
        image_series(st, (0, 0, 0, 0.5), (0.3, 0, 0, 0.4), 1e-3)


def test_kernels_vanish_on_plates():
    d = 1.0
    xp = np.array([0.2, 0.1, 0.0, 0.4])
    for z in (0.0, d):
        x = np.array([0.0, 0.0, 0.3, z])
        assert abs(casimir_kernel_closed(x, xp, 1e-3, d)) <= 1e-15
        assert abs(slab_kernel(StateSpec.kms(1.0), d).evaluator(x, xp, 1e-3)) <= 1e-12
    H = cp_kernel()
    assert abs(H.evaluator(np.array([0.1, 0.2, 0.0, 0.0]), xp, 1e-3)) == 0.0


def test_slab_domain_error():
    with pytest.raises(DomainError):
        casimir_kernel_closed(np.array([0, 0, 0, 1.2]), np.array([0, 0, 0, 0.5]), 1e-3, 1.0)


def test_half_space_kernel_is_image_difference():
    x, xp, eps = np.array([0.3, 0.1, 0.0, 0.7]), np.array([0.0, 0.0, 0.2, 0.4]), 1e-2
    a = x[0] - xp[0] - 1j * eps

    def k0(r2):
        return 1 / (4 * math.pi ** 2 * (r2 - a * a))
    s2 = np.sum((x[1:3] - xp[1:3]) ** 2)
    ref = k0(s2 + (x[3] - xp[3]) ** 2) - k0(s2 + (x[3] + xp[3]) ** 2)
    assert abs(cp_kernel().evaluator(x, xp, eps) - ref) <= 1e-14 * abs(ref)


def test_kms_slab_vacuum_limit():
    d = 1.0
    K0, KT = slab_kernel(StateSpec.vacuum(), d), slab_kernel(StateSpec.kms(50.0), d)
    x, xp = np.array([0.3, 0.1, 0.0, 0.3]), np.array([0.0, 0.2, 0.1, 0.6])
    v0, vT = K0.evaluator(x, xp, 1e-3), KT.evaluator(x, xp, 1e-3)
    assert abs(vT - v0) <= 1e-6 * abs(v0)


def test_kms_slab_matches_thermal_image_series():
    d, beta = 1.0, 1.0
    st = BoundaryState(Geometry.slab(d), StateSpec.kms(beta), ImageSeriesConfig(4000, 1e-6))
    x, xp = (0.2, 0.0, 0.1, 0.3), (0.0, 0.3, 0.0, 0.55)
    s = image_series(st, x, xp, 1e-3)
    k = slab_kernel(StateSpec.kms(beta), d).evaluator(np.array(x), np.array(xp), 1e-3)
    assert abs(s.value - k) <= 1e-9 * abs(k)


def test_fourier_coefficients_match_quadrature():
    d = 1.0
    f = make_bump((0, 0, 0, 0.4), (0.3, 0.3, 0.3, 0.2))
    n, fn = fourier_coefficients(f, d, 8)
    z, w = np.polynomial.legendre.leggauss(400)
    z = 0.4 + 0.2 * z
    w = 0.2 * w
    for k, c in zip(n, fn):
        direct = np.sum(w * f.factor(3, z) * np.exp(-1j * k * math.pi * z / d))
        assert abs(c - direct) <= 1e-11 * abs(fn[8])


def test_positivity_matches_position_space():
    st = BoundaryState(Geometry.slab(1.0))
    f = make_bump((0, 0, 0, 0.4), (0.3, 0.3, 0.3, 0.2))
    p = positivity_form(st, f)
    s = smear2(slab_kernel(d=1.0), f, f)
    assert p > 0
    assert abs(p - s.value.real) <= 1e-4 * abs(p)


def test_casimir_propagator_boundary_and_causality():
    d = 1.0
    f = make_bump((0, 0, 0, 0.4), 0.2)
    x = np.array([[1.0, 0.1, 0.0, 0.0], [1.0, 0.1, 0.0, d], [0.9, 0.0, 0.2, 0.0]])
    v = casimir_propagator(f, x, d)
    inner = casimir_propagator(f, np.array([[0.9, 0.0, 0.2, 0.5]]), d)
    assert np.max(np.abs(v)) <= 1e-6 * max(abs(inner[0]), 1e-3)
    g = make_bump((0.0, 2.0, 0.0, 0.5), 0.15)
    assert casimir_pairing(f, g, d).value == 0.0


def test_cp_propagator_vanishes_on_plate():
    h = make_bump((0, 0, 0, 0.5), 0.2)
    v = cp_propagator(h, np.array([[0.8, 0.0, 0.1, 0.0]]))
    assert abs(v[0]) <= 1e-12


def test_half_space_pairing_antisymmetric():
    f = make_bump((0, 0, 0, 0.5), 0.2)
    g = make_bump((0.6, 0.1, 0, 0.4), 0.2)
    a, b = half_space_pairing(f, g), half_space_pairing(g, f)
    assert abs(a.value + b.value) <= 10 * (a.err + b.err) + 1e-14


def test_kms_condition_spacelike_pair():
    st = BoundaryState(Geometry.slab(1.0), StateSpec.kms(1.0))
    f = make_bump((0, 0, 0, 0.4), (0.1, 0.15, 0.15, 0.15))
    g = make_bump((0.0, 0.8, 0.0, 0.5), (0.1, 0.15, 0.15, 0.15))
    r = kms_condition_check(st, f, g)
    assert abs(r.value) <= 1e-8 * 1e-3


def test_hypothesis_check_passes_for_kms():
    rep = hypothesis_check(BoundaryState(Geometry.slab(1.0), StateSpec.kms(1.0)))
    assert rep.passed
    assert rep.bounded and np.all(np.isfinite(rep.mode_w))
