"""Image-method states and propagators for a single plate and for two plates.

Half-space (single plate at z = 0): K(x, x') = K_free(x, x') - K_free(i x, x').
Slab (plates at z = 0 and z = d): the doubly infinite image sum

    sum_n [K_free(x, x' + 2nd e_z) - K_free(x, i x' + 2nd e_z)]

which for the vacuum has the closed form of :func:`casimir_kernel_closed`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._correlation import box_distance_range
from ._numerics import AccuracyError, DomainError, UniformTable, fsum_complex, gauss_panels
from .fields import (Geometry, PeriodicizedFunction, TestFunction, antisymmetrize, as_points,
                     as_sum, bump, isometry_apply, odd_extension)
from .kernels import (FOUR_PI2, EpsilonKernel, FreeProfile, ImageTerm, SmearedValue,
                      SmearPlan, SmoothTerm, StateSpec, free_evaluator, kirchhoff_apply,
                      kirchhoff_pairing, smear2)

__all__ = [
    "ImageSeriesConfig", "BoundaryState", "SeriesResult", "ModeCoefficients",
    "cp_kernel", "cp_propagator", "slab_kernel", "casimir_kernel_series",
    "image_series", "casimir_kernel_closed", "casimir_propagator", "casimir_pairing",
    "mode_coefficients", "fourier_coefficients", "positivity_form", "HypothesisReport",
    "hypothesis_check", "kms_condition_check", "boundary_kernel", "causal_images",
]


@dataclass(frozen=True)
class ImageSeriesConfig:
    n_max: int = 200
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max < 4:
            raise ValueError("n_max must be at least 4")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")


@dataclass(frozen=True)
class BoundaryState:
    geometry: Geometry
    base: StateSpec = field(default_factory=StateSpec.vacuum)
    series: ImageSeriesConfig = field(default_factory=ImageSeriesConfig)

    @property
    def d(self) -> float | None:
        return self.geometry.d

    @property
    def beta(self) -> float | None:
        return self.base.beta


def _profile(base: StateSpec, with_remainder: bool = True) -> FreeProfile:
    return FreeProfile(base.beta, with_remainder) if base.is_kms else FreeProfile()


# ---------------------------------------------------------------------------
# half-space


def _reflected_images(f, g):
    return (ImageTerm(1.0, False, 0.0), ImageTerm(-1.0, True, 0.0))


def cp_kernel(base: StateSpec | None = None) -> EpsilonKernel:
    """Half-space kernel K(x, x') - K(i_z x, x') built from a free kernel."""
    base = StateSpec.vacuum() if base is None else base
    profile = _profile(base)
    free = free_evaluator(profile)

    def evaluate(x, xp, eps, dt_shift=0.0):
        return free(x, xp, eps, dt_shift) - free(_reflect(x), xp, eps, dt_shift)

    return EpsilonKernel(evaluate, f"half_space[{base.kind}]", z_translation_invariant=False,
                         plan=SmearPlan(profile, _reflected_images))


def _reflect(x):
    pts = np.array(as_points(x), dtype=float)
    pts[..., 3] = -pts[..., 3]
    return pts


def cp_propagator(h, x) -> np.ndarray:
    """Causal propagator of the half-space: antisymmetrized Kirchhoff solution of
    the odd extension of h."""
    odd = odd_extension(h)
    field_ = antisymmetrize(lambda p: kirchhoff_apply("causal", odd, p))
    return field_(x)


# ---------------------------------------------------------------------------
# slab: closed form


def _sin2_half(w, d):
    return np.sin(0.5 * math.pi * np.asarray(w, dtype=float) / d) ** 2


def _family(a, sigma, w, d):
    """sum_n 1/(4 pi^2 (sigma^2 - a^2 + (w + 2nd)^2)) in closed form."""
    a = np.asarray(a, dtype=complex)
    chi = np.sqrt(np.asarray(sigma, dtype=float) ** 2 - a * a + 0j)
    y = math.pi * chi / d
    e = np.exp(-y)
    with np.errstate(invalid="ignore", divide="ignore"):
        num = np.where(y == 0, 2.0, -np.expm1(-2 * y) / np.where(y == 0, 1.0, y))
    den = np.expm1(-y) ** 2 + 4.0 * _sin2_half(w, d) * e
    return num / den / (8.0 * d * d)


def _family_tail(a, sigma, w, d):
    """_family minus its w-independent part (pi/d)/(8 pi d chi); decays like exp(-pi chi/d).

    Only meaningful away from chi = 0 (used for the imaginary-time copies)."""
    a = np.asarray(a, dtype=complex)
    chi = np.sqrt(np.asarray(sigma, dtype=float) ** 2 - a * a + 0j)
    y = math.pi * chi / d
    e = np.exp(-y)
    s2 = _sin2_half(w, d)
    den = np.expm1(-y) ** 2 + 4.0 * s2 * e
    return 2.0 * e * (1.0 - 2.0 * s2 - e) / (y * den) / (8.0 * d * d)


def _slab_closed(a, sigma, z, zp, d):
    return _family(a, sigma, z - zp, d) - _family(a, sigma, z + zp, d)


def _matsubara_count(beta: float, d: float) -> int:
    return int(math.ceil(40.0 * d / (math.pi * beta))) + 2


def _slab_thermal_copies(a_s, sigma, w, d, beta):
    """sum over m != 0 of _family_tail at a_s + i m beta."""
    total = 0.0
    for m in range(1, _matsubara_count(beta, d) + 1):
        total = total + _family_tail(a_s + 1j * m * beta, sigma, w, d)
        total = total + _family_tail(a_s - 1j * m * beta, sigma, w, d)
    return total


def _check_slab(points, d):
    z = as_points(points)[..., 3]
    if np.any(z < 0) or np.any(z > d):
        raise DomainError("points must lie in the slab 0 <= z <= d")


def casimir_kernel_closed(x, xp, eps: float, d: float) -> np.ndarray:
    """Closed-form vacuum slab kernel."""
    if not d > 0:
        raise ValueError("d must be positive")
    x, xp = np.broadcast_arrays(as_points(x), as_points(xp))
    _check_slab(x, d)
    _check_slab(xp, d)
    a = x[..., 0] - xp[..., 0] - 1j * eps
    sigma = np.hypot(x[..., 1] - xp[..., 1], x[..., 2] - xp[..., 2])
    return _slab_closed(a, sigma, x[..., 3], xp[..., 3], d)


def _slab_evaluator(base: StateSpec, d: float):
    profile = _profile(base)

    def evaluate(x, xp, eps, dt_shift=0.0):
        x, xp = np.broadcast_arrays(as_points(x), as_points(xp))
        _check_slab(x, d)
        _check_slab(xp, d)
        dt = x[..., 0] - xp[..., 0] + dt_shift
        profile.check_dt(dt)
        a_s = profile.reduce(dt - 1j * eps)
        sigma = np.hypot(x[..., 1] - xp[..., 1], x[..., 2] - xp[..., 2])
        z, zp = x[..., 3], xp[..., 3]
        out = _slab_closed(a_s, sigma, z, zp, d)
        if base.is_kms:
            out = out + (_slab_thermal_copies(a_s, sigma, z - zp, d, base.beta)
                         - _slab_thermal_copies(a_s, sigma, z + zp, d, base.beta))
        return out

    return evaluate


def _box_gap(f: TestFunction, g: TestFunction, gz: float) -> float:
    lo = f.support()[1:, 0] - np.array([g.c[1], g.c[2], gz]) - g.r[1:]
    hi = f.support()[1:, 1] - np.array([g.c[1], g.c[2], gz]) + g.r[1:]
    return box_distance_range(lo, hi)[0]


def _near_slab_images(f: TestFunction, g: TestFunction, d: float):
    """Image indices whose light cones can cross the supports, per family."""
    tau_max = abs(f.center.t - g.center.t) + f.radii[0] + g.radii[0]
    reach = tau_max + 0.5 * max(max(f.radii), max(g.radii))
    n_range = int(math.ceil((reach + abs(f.center.z) + abs(g.center.z)) / (2 * d))) + 2
    periodic, reflected = [], []
    for n in range(-n_range, n_range + 1):
        if _box_gap(f, g, g.center.z - 2 * n * d) < reach:
            periodic.append(n)
        if _box_gap(f, g, -g.center.z - 2 * n * d) < reach:
            reflected.append(n)
    return periodic, reflected


def _slab_plan(base: StateSpec, d: float) -> SmearPlan:
    profile = FreeProfile(base.beta, with_remainder=False) if base.is_kms else FreeProfile()
    beta = base.beta

    def images(f, g):
        per, ref = _near_slab_images(f, g, d)
        return ([ImageTerm(1.0, False, -2.0 * n * d) for n in per]
                + [ImageTerm(-1.0, True, -2.0 * n * d) for n in ref])

    def smooth(f, g):
        per, ref = _near_slab_images(f, g, d)

        def make(near, sign):
            shifts = np.array([2.0 * n * d for n in near])

            def func(a_s, sigma, w):
                val = _family(a_s, sigma, w, d)
                for s in shifts:
                    val = val - 1.0 / (FOUR_PI2 * (sigma * sigma + (w + s) ** 2 - a_s * a_s))
                if beta is not None:
                    val = val + _slab_thermal_copies(a_s, sigma, w, d, beta)
                return sign * val

            return func

        return (SmoothTerm(False, make(per, 1.0)), SmoothTerm(True, make(ref, -1.0)))

    return SmearPlan(profile, images, smooth)


def slab_kernel(base: StateSpec | None = None, d: float = 1.0) -> EpsilonKernel:
    """Slab kernel: closed form for the vacuum, Matsubara sum of closed forms for KMS."""
    base = StateSpec.vacuum() if base is None else base
    if not d > 0:
        raise ValueError("d must be positive")
    return EpsilonKernel(_slab_evaluator(base, d), f"slab[{base.kind}, d={d:g}]",
                         z_translation_invariant=False, plan=_slab_plan(base, d))


def boundary_kernel(state: BoundaryState) -> EpsilonKernel:
    if state.geometry.is_slab:
        return slab_kernel(state.base, state.d)
    return cp_kernel(state.base)


# ---------------------------------------------------------------------------
# slab: image series


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    err: float
    n_used: int
    partial_sums: np.ndarray   # S_N for N = 0..n_used
    tail_exponent: float


def image_series(state: BoundaryState, x, xp, eps: float) -> SeriesResult:
    """Paired (n, -n) image sum of the free kernel with a fitted power-law tail."""
    if not state.geometry.is_slab:
        raise ValueError("image series needs a slab geometry")
    d = state.d
    n_max = state.series.n_max
    x, xp = as_points(x), as_points(xp)
    if x.ndim != 1 or xp.ndim != 1:
        raise ValueError("image_series takes single points")
    _check_slab(x, d)
    _check_slab(xp, d)
    profile = _profile(state.base)
    a = complex(x[0] - xp[0] - 1j * eps)
    profile.check_dt(a + 1j * eps)
    s2 = (x[1] - xp[1]) ** 2 + (x[2] - xp[2]) ** 2
    z, zp = x[3], xp[3]
    n = np.arange(1, n_max + 1)

    def k(w):
        return profile(a, np.sqrt(s2 + w * w))

    first = complex(k(np.array(z - zp)) - k(np.array(z + zp)))
    pairs = (k(z - zp + 2 * n * d) + k(z - zp - 2 * n * d)
             - k(z + zp + 2 * n * d) - k(z + zp - 2 * n * d))
    partial = np.concatenate([[first], first + np.cumsum(pairs)])
    value, expo = _tail_corrected(first, pairs, n_max)
    quarter = _tail_corrected(first, pairs[: n_max // 2], n_max // 2)[0]
    # disagreement of the extrapolated sums at n_max and n_max/2
    err = abs(value - quarter) + 1e-15 * abs(value)
    if err > state.series.tail_tol * max(abs(value), 1e-300):
        raise AccuracyError(f"image series error {err:.3g} above tolerance", value, err)
    return SeriesResult(complex(value), float(err), n_max, partial, float(expo))


def _tail_corrected(first, pairs, n):
    """Sum of the first n pairs plus a fitted C m^-p tail (p from pairs n/2 and n)."""
    total = first + fsum_complex(pairs[:n])
    half = n // 2
    p_half, p_last = abs(pairs[half - 1]), abs(pairs[n - 1])
    if p_last == 0.0 or p_half == 0.0:
        return total, math.inf
    expo = math.log(p_half / p_last) / math.log(n / half)
    if expo <= 1.05:
        raise AccuracyError("image series does not converge fast enough", total, math.inf)
    # sum_{m > n} C m^-p ~ C (n + 1/2)^(1 - p) / (p - 1)
    coef = pairs[n - 1] * n ** expo
    return total + coef * (n + 0.5) ** (1.0 - expo) / (expo - 1.0), expo


def casimir_kernel_series(state: BoundaryState, x, xp, eps: float) -> complex:
    """Slab two-point kernel as a truncated image series (see :func:`image_series`)."""
    return image_series(state, x, xp, eps).value


# ---------------------------------------------------------------------------
# propagators


def causal_images(f: TestFunction, g, d: float):
    """Signed slab images of g that can be causally connected to supp f."""
    out = []
    for coef, gj in as_sum(g):
        reach = abs(f.center.t - gj.center.t) + f.radii[0] + gj.radii[0]
        window = int(math.ceil((reach + abs(f.center.z) + abs(gj.center.z)
                                + f.radii[3] + gj.radii[3]) / (2 * d))) + 1
        for c, img in PeriodicizedFunction(gj, d, window).images():
            if _box_gap(f, img, img.center.z) <= reach:
                out.append((coef * c, img))
    return out


def casimir_propagator(f, x, d: float, restrict: bool = True) -> np.ndarray:
    """E_Z f at x: Kirchhoff causal solution of the odd 2d-periodic image sum N(f)."""
    for _, g in as_sum(f):
        if g.center.z - g.radii[3] <= 0 or g.center.z + g.radii[3] >= d:
            raise ValueError("supp f must lie inside the open slab")
    pts = as_points(x)
    if restrict:
        _check_slab(pts, d)
    flat = pts.reshape(-1, 4)
    out = np.zeros(flat.shape[0])
    for coef, g in as_sum(f):
        for i, p in enumerate(flat):
            reach = abs(p[0] - g.center.t) + g.radii[0]
            window = int(math.ceil((reach + abs(p[3]) + abs(g.center.z) + g.radii[3])
                                   / (2 * d))) + 1
            for c, img in PeriodicizedFunction(g, d, window).images():
                out[i] += coef * c * float(kirchhoff_apply("causal", img, p))
    return out.reshape(pts.shape[:-1])


def casimir_pairing(f, g, d: float) -> SmearedValue:
    """E_Z(f, g) = <f, E_Z g> through the light-cone route, image by image."""
    total = SmearedValue(0.0, 0.0)
    for cf, fi in as_sum(f):
        for c, img in causal_images(fi, g, d):
            total = total + kirchhoff_pairing(fi, img).scale(cf * c)
    return total


def half_space_pairing(f, g) -> SmearedValue:
    """E_H(f, g) = E(f, g) - E(f, i_z g) through the light-cone route."""
    total = SmearedValue(0.0, 0.0)
    for cf, fi in as_sum(f):
        for cg, gj in as_sum(g):
            total = total + kirchhoff_pairing(fi, gj).scale(cf * cg)
            total = total - kirchhoff_pairing(fi, isometry_apply("reflect_z", gj)).scale(cf * cg)
    return total


def geometry_pairing(geometry: Geometry, f, g) -> SmearedValue:
    if geometry.is_slab:
        return casimir_pairing(f, g, geometry.d)
    return half_space_pairing(f, g)


# ---------------------------------------------------------------------------
# mode representation

_KAPPA_MAX = 80.0


class _BumpFourier:
    """Tabulated b_hat(kappa) = int b(u) cos(kappa u) du on [0, _KAPPA_MAX]."""

    _table: UniformTable | None = None

    @classmethod
    def get(cls) -> UniformTable:
        if cls._table is None:
            u, w = gauss_panels(np.linspace(-1.0, 1.0, 33), 24)
            bw = bump(u) * w

            def direct(k):
                return np.cos(np.multiply.outer(k, u)) @ bw

            cls._table = UniformTable(direct, 0.0, _KAPPA_MAX, n=8193, left="even")
        return cls._table


def _axis_fourier(f: TestFunction, axis: int, k) -> np.ndarray:
    """|int f_axis(s) e^{-iks} ds| for the unit-height factor (bumps are even)."""
    r = f.radii[axis]
    return r * _BumpFourier.get()(np.abs(np.asarray(k, dtype=float)) * r)


def _axis_fourier_complex(f: TestFunction, axis: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return _axis_fourier(f, axis, k) * np.exp(-1j * k * f.c[axis])


@dataclass(frozen=True)
class ModeCoefficients:
    xi: np.ndarray
    values: np.ndarray
    f_perp: TestFunction
    g_perp: TestFunction
    d: float


class _TransverseModes:
    """Angular and time data for w(xi) = int d^2k (...) / ((2 pi)^3 2 omega)."""

    def __init__(self, f: TestFunction, g: TestFunction, n_phi: int = 512):
        self.f, self.g = f, g
        r_min = min(f.radii[1], f.radii[2], g.radii[1], g.radii[2])
        r_max = max(f.radii[1], f.radii[2], g.radii[1], g.radii[2])
        self.k_max = _KAPPA_MAX / r_min
        self.panel = 0.5 / r_max
        phi = 2 * math.pi * np.arange(n_phi) / n_phi
        self.cos, self.sin = np.cos(phi), np.sin(phi)
        self.dphi = 2 * math.pi / n_phi
        qphi, self.qw = gauss_panels(np.linspace(0.0, 0.5 * math.pi, 9), n_phi // 32)
        self.qcos, self.qsin = np.cos(qphi), np.sin(qphi)

    def angular(self, k):
        """int dphi fx(k cos) conj(gx(k cos)) fy(k sin) conj(gy(k sin))."""
        f, g = self.f, self.g
        if f.radii[1:3] == g.radii[1:3] and np.array_equal(f.c[1:3], g.c[1:3]):
            # |f_hat|^2 is even in each component: integrate a quarter circle
            kx = np.multiply.outer(k, self.qcos)
            ky = np.multiply.outer(k, self.qsin)
            vals = (_axis_fourier(f, 1, kx) * _axis_fourier(f, 2, ky)) ** 2
            return 4.0 * (vals @ self.qw)
        kx = np.multiply.outer(k, self.cos)
        ky = np.multiply.outer(k, self.sin)
        vals = (_axis_fourier_complex(f, 1, kx) * np.conj(_axis_fourier_complex(g, 1, kx))
                * _axis_fourier_complex(f, 2, ky) * np.conj(_axis_fourier_complex(g, 2, ky)))
        return vals.sum(axis=-1) * self.dphi

    def time_factor(self, omega):
        if self.f.radii[0] == self.g.radii[0] and self.f.c[0] == self.g.c[0]:
            # the phases cancel
            return _axis_fourier(self.f, 0, omega) ** 2 + 0j
        return (_axis_fourier_complex(self.f, 0, omega)
                * np.conj(_axis_fourier_complex(self.g, 0, omega)))

    def k_rule(self, xi_min: float, n: int = 16):
        breaks = list(np.arange(0.0, self.k_max + self.panel, self.panel))
        if xi_min > 0:
            grade = [xi_min * 2.0 ** j for j in range(-4, 40) if xi_min * 2.0 ** j < self.panel]
            breaks = sorted(set(breaks) | set(grade))
        return gauss_panels(np.array(breaks), n)

    def w(self, xi, beta: float | None, part: str = "full"):
        """Transverse mode weight; ``part='thermal'`` keeps only the thermal excess."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        pos = np.abs(xi[xi != 0])
        k, wk = self.k_rule(float(pos.min()) if pos.size else 0.0)
        ang = self.angular(k) * k * wk
        omega = np.sqrt(np.add.outer(xi * xi, k * k))
        with np.errstate(divide="ignore", invalid="ignore"):
            T = self.time_factor(omega)
            if beta is None:
                if part == "thermal":
                    return np.zeros(xi.shape)
                weight = T
            else:
                nb = 1.0 / np.expm1(beta * omega)
                thermal = nb * (T + np.conj(T))
                weight = thermal if part == "thermal" else T + thermal
            integrand = np.where(omega > 0, weight / (2 * omega), 0.0)
        amp = self.f.amplitude * self.g.amplitude
        return amp * (integrand @ ang) / (2 * math.pi) ** 3


def mode_coefficients(base: StateSpec, f_perp: TestFunction, g_perp: TestFunction,
                      N: int, d: float) -> ModeCoefficients:
    """w_hat(n pi/d) = (pi/d) w(n pi/d) for n = 0..N.

    Only the (t, x, y) factors and amplitudes of ``f_perp``/``g_perp`` are used.
    """
    xi = math.pi * np.arange(N + 1) / d
    modes = _TransverseModes(f_perp, g_perp)
    vals = (math.pi / d) * modes.w(xi, base.beta)
    return ModeCoefficients(xi, vals, f_perp, g_perp, d)


def fourier_coefficients(f: TestFunction, d: float, N: int, k: int | None = None):
    """f_n = int_{-d}^{d} f_z(z) exp(-i n pi z/d) dz for n = -N..N via FFT."""
    if k is None:
        k = max(10, int(math.ceil(math.log2(8 * N + 64))))
    M = 2 ** k
    z = -d + 2 * d * np.arange(M) / M
    fz = f.factor(3, z)
    spec = np.fft.fft(fz) * (2 * d / M)
    n = np.arange(-N, N + 1)
    return n, spec[n % M] * np.exp(1j * math.pi * n)


def _mode_count(f: TestFunction, d: float) -> int:
    return int(math.ceil(_KAPPA_MAX * d / (math.pi * f.radii[3]))) + 1


def positivity_form(state: BoundaryState, f: TestFunction, N: int | None = None) -> float:
    """sum_{n >= 1} w_hat(n pi/d) |f_n - f_-n|^2 for a factorized f."""
    if not state.geometry.is_slab:
        raise ValueError("positivity_form needs a slab geometry")
    if not isinstance(f, TestFunction):
        raise TypeError("positivity_form takes one factorized test function")
    d = state.d
    N = _mode_count(f, d) if N is None else N
    n, fn = fourier_coefficients(f, d, N)
    diff = fn[N + 1:] - fn[N - 1::-1]
    modes = mode_coefficients(state.base, f, f, N, d)
    return float(np.real(np.sum(modes.values[1:] * np.abs(diff) ** 2)))


@dataclass(frozen=True)
class HypothesisReport:
    xi: np.ndarray
    w_thermal: np.ndarray
    small_xi: np.ndarray
    xi_w_small: np.ndarray
    log_coefficient: float
    log_coefficient_refined: float
    predicted_log_coefficient: float
    mode_xi: np.ndarray
    mode_w: np.ndarray
    continuity_max_jump: float
    decreasing_to_zero: bool
    coefficient_stable: bool
    bounded: bool

    @property
    def passed(self) -> bool:
        return self.decreasing_to_zero and self.coefficient_stable and self.bounded


def _fit_log(xi, vals):
    A = np.stack([xi * np.log(xi), xi], axis=1)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    return float(coef[0])


def hypothesis_check(state: BoundaryState, f: TestFunction | None = None,
                     n_small: int = 12, n_modes: int = 40) -> HypothesisReport:
    """Behaviour of the transverse transform of W = omega_beta - omega_0.

    w^T(xi) should stay finite for xi >= pi/d and satisfy xi w^T(xi) -> 0 with a
    logarithmic law a xi log xi + b xi as xi -> 0.
    """
    d = state.d if state.geometry.is_slab else 1.0
    if f is None:
        f = TestFunction((0.0, 0.0, 0.0, 0.5 * d), (0.3 * d,) * 4)
    modes = _TransverseModes(f, f)
    lo, hi = 1e-3 * math.pi / d, 1e-1 * math.pi / d
    xi_s = np.geomspace(lo, hi, n_small)
    xi_r = np.geomspace(lo, hi, 2 * n_small)
    mode_xi = math.pi * np.arange(1, n_modes + 1) / d
    beta = state.beta
    if beta is None:
        zeros = np.zeros
        return HypothesisReport(mode_xi, zeros(n_modes), xi_s, zeros(n_small), 0.0, 0.0, 0.0,
                                mode_xi, zeros(n_modes), 0.0, True, True, True)
    ws = np.real(modes.w(xi_s, beta, "thermal"))
    wr = np.real(modes.w(xi_r, beta, "thermal"))
    wm = np.real(modes.w(mode_xi, beta, "thermal"))
    a1 = _fit_log(xi_s, xi_s * ws)
    a2 = _fit_log(xi_r, xi_r * wr)
    s0 = (f.amplitude ** 2 * float(_axis_fourier(f, 0, 0.0) * _axis_fourier(f, 1, 0.0)
                                   * _axis_fourier(f, 2, 0.0)) ** 2)
    predicted = -s0 / (4 * math.pi ** 2 * beta)
    xw = np.abs(xi_s * ws)
    jumps = np.abs(np.diff(wm))
    scale = max(float(np.max(np.abs(wm))), 1e-300)
    return HypothesisReport(
        mode_xi, wm, xi_s, xi_s * ws, a1, a2, predicted, mode_xi, wm,
        float(jumps.max() / scale) if jumps.size else 0.0,
        bool(np.all(np.diff(xw[::-1]) < 0)),
        bool(abs(a1 - a2) <= 0.1 * abs(a2)),
        bool(np.all(np.isfinite(wm))),
    )


# ---------------------------------------------------------------------------
# KMS condition


def kms_condition_check(state: BoundaryState, f: TestFunction, g: TestFunction,
                        tol: float = 1e-6) -> SmearedValue:
    """[omega(t_{i beta} f, g) - omega(f, g)] + i E_geom(f, g), with error estimate."""
    if not state.base.is_kms:
        raise ValueError("kms_condition_check needs a KMS base state")
    geo = state.geometry
    for _, h in list(as_sum(f)) + list(as_sum(g)):
        lo = h.center.z - h.radii[3]
        hi = h.center.z + h.radii[3]
        if lo <= 0 or (geo.is_slab and hi >= geo.d):
            raise ValueError("supports must lie in the open region")
    K = boundary_kernel(state)
    shifted = smear2(K, f, g, imag_shift=state.beta, tol=tol)
    plain = smear2(K, f, g, tol=tol)
    E = geometry_pairing(geo, f, g)
    return (shifted - plain) + E.scale(1j)
