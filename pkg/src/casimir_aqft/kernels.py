"""Free-space two-point kernels, their smearing, and the causal propagator.

Conventions used throughout the package:

* a kernel K(x, x', eps) depends on Delta t = t - t' through a = Delta t - i eps;
* the antisymmetric part of every state kernel is (i/2) E with
  omega(f, g) - omega(g, f) = i E(f, g);
* E = E_adv - E_ret as an operator and E(f, g) = <f, E g>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import bernoulli

from ._correlation import (AxisCorrelation, SphericalAverage, TransverseAverage,
                           sphere_average_direct)
from ._numerics import AccuracyError, DomainError, gauss_panels, richardson_zero
from .fields import TestFunction, as_points, as_sum

FOUR_PI2 = 4.0 * math.pi ** 2

__all__ = [
    "AccuracyError", "DomainError", "StateSpec", "SmearedValue", "FreeProfile",
    "EpsilonKernel", "ImageTerm", "SmoothTerm", "SmearPlan", "vacuum_kernel",
    "kms_kernel", "hadamard_parametrix", "smear2", "kirchhoff_apply",
    "kirchhoff_pairing", "causal_pairing", "thermal_remainder",
]


@dataclass(frozen=True)
class StateSpec:
    """Vacuum, or KMS at inverse temperature beta (massless field)."""

    kind: str = "vacuum"
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("vacuum", "kms"):
            raise ValueError(f"unknown state {self.kind!r}")
        if self.kind == "kms":
            if self.beta is None or not self.beta > 0:
                raise ValueError("KMS state needs beta > 0")
        elif self.beta is not None:
            raise ValueError("vacuum state takes no beta")

    @classmethod
    def vacuum(cls) -> "StateSpec":
        return cls("vacuum")

    @classmethod
    def kms(cls, beta: float) -> "StateSpec":
        return cls("kms", float(beta))

    @property
    def is_kms(self) -> bool:
        return self.kind == "kms"


@dataclass(frozen=True)
class SmearedValue:
    value: complex
    err: float

    def __add__(self, other: "SmearedValue") -> "SmearedValue":
        return SmearedValue(self.value + other.value, self.err + other.err)

    def __sub__(self, other: "SmearedValue") -> "SmearedValue":
        return SmearedValue(self.value - other.value, self.err + other.err)

    def scale(self, c: complex) -> "SmearedValue":
        return SmearedValue(c * self.value, abs(c) * self.err)

    def conj(self) -> "SmearedValue":
        return SmearedValue(np.conj(self.value), self.err)

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    @property
    def imag(self) -> float:
        return float(np.imag(self.value))


# ---------------------------------------------------------------------------
# thermal remainder

_NSERIES = 30
_B = bernoulli(2 * _NSERIES)
# coth x - 1/x = sum_j a_j x^(2j-1)
_COTH_SERIES = np.array([2.0 ** (2 * j) * _B[2 * j] / math.factorial(2 * j)
                         for j in range(1, _NSERIES + 1)])


def _g_minus(x):
    """coth x - 1/x, with the power series near the origin."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < 1.0
    xs = x[small]
    acc = np.zeros_like(xs)
    x2 = xs * xs
    for coef in _COTH_SERIES[::-1]:
        acc = acc * x2 + coef
    out[small] = acc * xs
    xl = x[~small]
    out[~small] = 1.0 / np.tanh(xl) - 1.0 / xl
    return out


def _divided_difference(m, h):
    """D = [g(m+h) - g(m-h)] / (2h) for g(x) = coth x - 1/x."""
    m, h = np.broadcast_arrays(np.asarray(m, dtype=complex), np.asarray(h, dtype=float))
    out = np.empty(m.shape, dtype=complex)
    series = (np.abs(m) + h) < 1.0
    tiny_h = (~series) & (h < 0.5)
    general = ~(series | tiny_h)

    if series.any():
        x, y = m[series] + h[series], m[series] - h[series]
        q = np.ones_like(x)          # (x^p - y^p)/(x - y) for p = 1
        ypow = y.copy()
        acc = _COTH_SERIES[0] * q
        for j in range(1, _NSERIES):
            # advance p by two
            q = x * q + ypow
            ypow = ypow * y
            q = x * q + ypow
            ypow = ypow * y
            acc = acc + _COTH_SERIES[j] * q
        out[series] = acc

    if tiny_h.any():
        mm, hh = m[tiny_h], h[tiny_h]
        big = np.abs(mm.real) > 300.0
        first = np.zeros_like(mm)
        ok = ~big
        sinc2h = np.where(hh > 0, np.sinh(2 * hh) / np.where(hh > 0, 2 * hh, 1.0), 1.0)
        first[ok] = -sinc2h[ok] / (np.sinh(mm[ok] + hh[ok]) * np.sinh(mm[ok] - hh[ok]))
        out[tiny_h] = first + 1.0 / (mm * mm - hh * hh)

    if general.any():
        mm, hh = m[general], h[general]
        out[general] = (_g_minus(mm + hh) - _g_minus(mm - hh)) / (2.0 * hh)
    return out


def thermal_remainder(a, rho, beta: float):
    """Smooth part of the thermal kernel, k_beta - k_vac, at complex a = Delta t - i eps.

    ``a`` must already be reduced to |Im a| <= beta/2.
    """
    a = np.asarray(a, dtype=complex)
    rho = np.asarray(rho, dtype=float)
    scale = math.pi / beta
    return _divided_difference(scale * a, scale * rho) / (4.0 * beta * beta)


# ---------------------------------------------------------------------------
# free profiles


@dataclass(frozen=True)
class FreeProfile:
    """Massless free kernel as a function of a = Delta t - i eps and rho = |Delta x|.

    ``beta = None`` is the vacuum.  For thermal profiles the kernel is
    i beta-periodic in a; ``reduce`` moves a into |Im a| <= beta/2, where it
    splits into the vacuum singular part plus a smooth remainder.
    ``with_remainder = False`` keeps only the singular part (used when the
    remainder is summed in closed form elsewhere).
    """

    beta: float | None = None
    with_remainder: bool = True

    @property
    def is_thermal(self) -> bool:
        return self.beta is not None

    def check_dt(self, dt):
        if not self.is_thermal:
            if np.any(np.imag(dt) != 0):
                raise DomainError("complex times need a thermal kernel")
            return
        im = np.imag(dt)
        if np.any(im > 0) or np.any(im <= -self.beta):
            raise DomainError("Im(Delta t) must lie in (-beta, 0]")

    def reduce(self, a):
        a = np.asarray(a, dtype=complex)
        if not self.is_thermal:
            return a
        return np.where(a.imag < -0.5 * self.beta, a + 1j * self.beta, a)

    @staticmethod
    def singular(a, rho):
        a = np.asarray(a, dtype=complex)
        rho = np.asarray(rho, dtype=float)
        return 1.0 / (FOUR_PI2 * (rho * rho - a * a))

    def remainder(self, a_s, rho):
        if not (self.is_thermal and self.with_remainder):
            return None
        return thermal_remainder(a_s, rho, self.beta)

    def __call__(self, a, rho):
        a_s = self.reduce(a)
        out = self.singular(a_s, rho)
        rem = self.remainder(a_s, rho)
        return out if rem is None else out + rem

    def coincidence_derivatives(self, rho):
        """k, d^2k/dtau^2, dk/drho, d^2k/drho^2 at tau = 0 for rho > 0."""
        rho = np.asarray(rho, dtype=float)
        if not (self.is_thermal and self.with_remainder):
            c = 1.0 / FOUR_PI2
            r2 = rho * rho
            return c / r2, 2 * c / r2 ** 2, -2 * c / (r2 * rho), 6 * c / r2 ** 2
        b = self.beta
        x = math.pi * rho / b
        e2 = np.exp(-2.0 * x)
        one_minus = -np.expm1(-2.0 * x)
        coth = (1.0 + e2) / one_minus
        csch2 = 4.0 * e2 / one_minus ** 2
        k = coth / (4 * b * b * x)
        k_tt = math.pi ** 2 / (2 * b ** 4 * x) * coth * csch2
        k_r = math.pi / (4 * b ** 3) * (-csch2 / x - coth / x ** 2)
        k_rr = (math.pi / b) ** 2 / (4 * b * b) * (
            2 * csch2 * coth / x + 2 * csch2 / x ** 2 + 2 * coth / x ** 3)
        return k, k_tt, k_r, k_rr

    def remainder_at_origin(self):
        """Remainder value and its second derivatives (tau, spatial) at u = 0."""
        if not (self.is_thermal and self.with_remainder):
            return 0.0, 0.0, 0.0
        b = self.beta
        return 1.0 / (12 * b * b), -math.pi ** 2 / (30 * b ** 4), -math.pi ** 2 / (90 * b ** 4)


# ---------------------------------------------------------------------------
# kernels and smearing plans


@dataclass(frozen=True)
class ImageTerm:
    """sign * K_free(x, T x') with T z' = (-z' if reflect else z') + shift."""

    sign: float
    reflect: bool
    shift: float

    def map_z(self, z):
        return (-z if self.reflect else z) + self.shift


@dataclass(frozen=True)
class SmoothTerm:
    """Smooth kernel piece F(a, sigma, w) with w = z - z' or z + z'."""

    reflect: bool
    func: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class SmearPlan:
    """How a kernel decomposes into free image terms plus smooth pieces."""

    profile: FreeProfile
    image_terms: Callable[[TestFunction, TestFunction], Sequence[ImageTerm]]
    smooth_terms: Callable[[TestFunction, TestFunction], Sequence[SmoothTerm]] = (
        lambda f, g: ())


@dataclass(frozen=True)
class EpsilonKernel:
    """epsilon-regularized two-point kernel (x, x', eps) -> complex."""

    evaluator: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    name: str
    z_reflection_invariant: bool = True
    z_translation_invariant: bool = True
    time_translation_invariant: bool = True
    is_hadamard_parametrix: bool = False
    plan: SmearPlan | None = field(default=None, compare=False)

    def __call__(self, x, xp, eps: float):
        if not eps > 0:
            raise ValueError("eps must be positive")
        return self.evaluator(as_points(x), as_points(xp), eps)


def _separation(x, xp):
    x, xp = np.broadcast_arrays(as_points(x), as_points(xp))
    dt = x[..., 0] - xp[..., 0]
    rho = np.sqrt(np.sum((x[..., 1:] - xp[..., 1:]) ** 2, axis=-1))
    return dt, rho


def free_evaluator(profile: FreeProfile):
    def evaluate(x, xp, eps, dt_shift=0.0):
        dt, rho = _separation(x, xp)
        dt = dt + dt_shift
        profile.check_dt(dt)
        return profile(dt - 1j * eps, rho)

    return evaluate


def _identity_images(f, g):
    return (ImageTerm(1.0, False, 0.0),)


def vacuum_kernel() -> EpsilonKernel:
    """1/(4 pi^2 (-(Delta t - i eps)^2 + |Delta x|^2))."""
    profile = FreeProfile()
    return EpsilonKernel(free_evaluator(profile), "vacuum",
                         plan=SmearPlan(profile, _identity_images))


def kms_kernel(beta: float) -> EpsilonKernel:
    """Thermal kernel at inverse temperature beta.

    Closed form (1/(4 pi beta r)) sinh(2 pi r/beta)/(cosh(2 pi r/beta) - cosh(2 pi a/beta)),
    evaluated as the vacuum pole plus a smooth remainder.  The evaluator
    accepts complex Delta t with Im(Delta t) in (-beta, 0]; see
    :meth:`EpsilonKernel.evaluator` with ``dt_shift``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    profile = FreeProfile(float(beta))
    return EpsilonKernel(free_evaluator(profile), f"kms(beta={beta:g})",
                         plan=SmearPlan(profile, _identity_images))


def hadamard_parametrix() -> EpsilonKernel:
    """Massless flat-space parametrix: the vacuum kernel itself."""
    profile = FreeProfile()
    return EpsilonKernel(free_evaluator(profile), "hadamard", is_hadamard_parametrix=True,
                         plan=SmearPlan(profile, _identity_images))


# ---------------------------------------------------------------------------
# smearing engine

_TAU_PANELS, _TAU_NODES = 4, 24
_RHO_PANELS, _RHO_NODES = 8, 24
_CAUCHY_NODES = 16


def _cauchy_nodes(t0: float, width: float, rho_lo: float, R: float):
    """Breakpoints over [-R, R] graded geometrically toward t0."""
    base = [-R, R]
    if rho_lo > 0:
        base += [-rho_lo, rho_lo]
    pieces = sorted(base)
    breaks = []
    for a, b in zip(pieces[:-1], pieces[1:]):
        n = max(1, int(math.ceil((b - a) / (R / 8.0))))
        breaks.extend(np.linspace(a, b, n + 1))
    if -R - width < t0 < R + width:
        step = width / 4.0
        while step < 2 * R:
            breaks.extend((t0 - step, t0 + step))
            step *= 2.0
    breaks = np.unique(np.clip(breaks, -R, R))
    return breaks


class _ImageIntegral:
    """Reduced (tau, rho) integral of one free image term for a fixed pair."""

    def __init__(self, ct: AxisCorrelation, sph: SphericalAverage, profile: FreeProfile,
                 tau_nodes: int = _TAU_NODES, rho_nodes: int = _RHO_NODES,
                 cauchy_nodes: int = _CAUCHY_NODES):
        self.ct, self.sph, self.profile = ct, sph, profile
        self.cauchy_nodes = cauchy_nodes
        self.tau, wt = gauss_panels(np.linspace(ct.lo, ct.hi, _TAU_PANELS + 1), tau_nodes)
        self.wct = wt * ct(self.tau)
        lo, hi = sph.rho_lo, sph.rho_hi
        self.rho, self.wrho = gauss_panels(np.linspace(lo, hi, _RHO_PANELS + 1), rho_nodes)
        self.B = self.rho ** 2 * sph(self.rho)
        margin = 0.25 * (hi - lo)
        self.singular_tau = (np.abs(self.tau) > lo - margin) & (np.abs(self.tau) < hi + margin)

    def _B(self, rho):
        return rho * rho * self.sph(np.abs(rho))

    def _dB(self, rho):
        return 2 * rho * self.sph(np.abs(rho)) + rho * rho * self.sph.derivative(rho)

    def _cauchy(self, a_s: np.ndarray) -> np.ndarray:
        """(1/(4 pi^2)) int rho^2 A/(rho^2 - a^2) via the even Cauchy transform."""
        R = self.sph.rho_hi
        lo = self.sph.rho_lo
        nodes, weights, owner = [], [], []
        for i, a in enumerate(a_s):
            breaks = _cauchy_nodes(a.real, max(abs(a.imag), 1e-300), lo, R)
            x, w = gauss_panels(breaks, self.cauchy_nodes)
            nodes.append(x)
            weights.append(w)
            owner.append(np.full(x.size, i))
        x = np.concatenate(nodes)
        w = np.concatenate(weights)
        owner = np.concatenate(owner)
        t0 = a_s.real
        inside = np.abs(t0) <= R
        b0 = np.where(inside, self._B(t0), 0.0)
        b1 = np.where(inside, self._dB(t0), 0.0)
        a_o = a_s[owner]
        F = self._B(x) - b0[owner] - b1[owner] * (x - t0[owner])
        vals = w * F / (x - a_o)
        integral = (np.bincount(owner, vals.real, minlength=a_s.size)
                    + 1j * np.bincount(owner, vals.imag, minlength=a_s.size))
        L = np.log(R - a_s) - np.log(-R - a_s)
        integral += b0 * L + b1 * (2 * R + (a_s - t0) * L)
        return integral / (8 * math.pi ** 2 * a_s)

    def values(self, eps_list, imag_shift: float = 0.0) -> np.ndarray:
        out = []
        for eps in eps_list:
            a = self.tau - 1j * eps
            if imag_shift:
                a = a - 1j * imag_shift + 2j * eps
            a_s = self.profile.reduce(a)
            J = (self.wrho * self.B * self.profile.singular(a_s[:, None], self.rho)).sum(axis=1)
            sing = self.singular_tau
            if sing.any():
                J[sing] = self._cauchy(a_s[sing])
            rem = self.profile.remainder(a_s[:, None], self.rho)
            if rem is not None:
                J = J + (self.wrho * self.B * rem).sum(axis=1)
            out.append(np.dot(self.wct, J))
        return np.array(out)


class _SmoothIntegral:
    """(tau, sigma, w) product rule for smooth pieces of a kernel."""

    def __init__(self, ct, perp: TransverseAverage, cz: AxisCorrelation, profile,
                 n: int = 20, panels: int = 3):
        self.profile = profile
        self.tau, wt = gauss_panels(np.linspace(ct.lo, ct.hi, panels + 1), n)
        self.wct = wt * ct(self.tau)
        self.sig, ws = gauss_panels(np.linspace(perp.s_lo, perp.s_hi, panels + 1), n)
        self.wsig = ws * self.sig * perp(self.sig)
        self.w, ww = gauss_panels(np.linspace(cz.lo, cz.hi, panels + 1), n)
        self.ww = ww * cz(self.w)

    def values(self, func, eps_list, imag_shift=0.0):
        out = []
        for eps in eps_list:
            a = self.tau - 1j * eps
            if imag_shift:
                a = a - 1j * imag_shift + 2j * eps
            a_s = self.profile.reduce(a)
            F = func(a_s[:, None, None], self.sig[None, :, None], self.w[None, None, :])
            out.append(np.einsum("i,j,k,ijk->", self.wct, self.wsig, self.ww, F))
        return np.array(out)


def _pair_scale(f: TestFunction, g: TestFunction) -> float:
    dist = float(np.linalg.norm(f.c - g.c))
    ell = max(dist, float(max(f.radii)), float(max(g.radii)))
    return abs(f.integral() * g.integral()) / (FOUR_PI2 * ell * ell)


def _pair_values(plan: SmearPlan, f: TestFunction, g: TestFunction, eps_list,
                 imag_shift: float, fine: bool = True) -> np.ndarray:
    kw = {} if fine else dict(tau_nodes=16, rho_nodes=16, cauchy_nodes=12)
    corr = [AxisCorrelation((f.c[i], f.radii[i]), (g.c[i], g.radii[i])) for i in range(3)]
    ct = corr[0]
    if ct.empty or corr[1].empty or corr[2].empty:
        return np.zeros(len(eps_list), dtype=complex)
    perp = TransverseAverage(corr[1], corr[2])
    total = np.zeros(len(eps_list), dtype=complex)
    for term in plan.image_terms(f, g):
        cz = AxisCorrelation((f.c[3], f.radii[3]), (term.map_z(g.c[3]), g.radii[3]))
        if cz.empty:
            continue
        sph = SphericalAverage(perp, cz)
        total += term.sign * _ImageIntegral(ct, sph, plan.profile, **kw).values(
            eps_list, imag_shift)
    for term in plan.smooth_terms(f, g):
        gz = -g.c[3] if term.reflect else g.c[3]
        cz = AxisCorrelation((f.c[3], f.radii[3]), (gz, g.radii[3]))
        n = 20 if fine else 14
        total += _SmoothIntegral(ct, perp, cz, plan.profile, n=n).values(
            term.func, eps_list, imag_shift)
    return total * f.amplitude * g.amplitude


def default_eps0(f: TestFunction, g: TestFunction) -> float:
    return 0.1 * min(min(f.radii), min(g.radii))


def smear2(K: EpsilonKernel, f, g, eps0: float | None = None, levels: int = 5,
           tol: float = 1e-6, imag_shift: float = 0.0) -> SmearedValue:
    """Pair integral of K against f(x) g(x'), extrapolated to eps -> 0.

    The kernel is evaluated on the ladder eps_k = eps0 2^-k, k < levels, and
    the values are extrapolated polynomially to eps = 0.  ``err`` adds the
    extrapolation gap to a quadrature check at coarser resolution.
    ``imag_shift = beta`` evaluates the kernel at Delta t - i beta (approached
    from inside the analyticity strip), i.e. the pairing of t_{i beta} f with g.
    """
    if K.plan is None:
        raise TypeError("smear2 needs a kernel built by this package")
    if imag_shift:
        if not K.plan.profile.is_thermal:
            raise DomainError("imaginary time shifts need a thermal kernel")
        if not 0 < imag_shift <= K.plan.profile.beta:
            raise DomainError("imaginary shift outside the analyticity strip")
    value, err, scale = 0.0 + 0.0j, 0.0, 0.0
    for cf, fi in as_sum(f):
        for cg, gj in as_sum(g):
            e0 = default_eps0(fi, gj) if eps0 is None else eps0
            eps_list = [e0 * 2.0 ** (-k) for k in range(levels)]
            vals = _pair_values(K.plan, fi, gj, eps_list, imag_shift)
            best, extrap_err = richardson_zero(eps_list, vals)
            coarse = _pair_values(K.plan, fi, gj, eps_list[-1:], imag_shift, fine=False)[0]
            quad_err = abs(coarse - vals[-1])
            value += cf * cg * best
            err += abs(cf * cg) * (extrap_err + quad_err)
            scale += abs(cf * cg) * _pair_scale(fi, gj)
    result = SmearedValue(complex(value), float(err))
    if err > tol * max(abs(value), scale):
        raise AccuracyError(f"smear2 error {err:.3g} above tolerance", result.value, err)
    return result


# ---------------------------------------------------------------------------
# Kirchhoff (light-cone) route


def _kirchhoff_single(side: str, f: TestFunction, x: np.ndarray,
                      n_r: int = 24, n_theta: int = 24, n_phi: int = 24) -> float:
    t, pos = x[0], x[1:]
    box = f.support()[1:]
    ct, rt = f.center.t, f.radii[0]
    lo_s = np.maximum(box[:, 0] - pos, 0.0)
    hi_s = np.maximum(pos - box[:, 1], 0.0)
    r_min = float(np.sqrt(np.sum(np.maximum(lo_s, hi_s) ** 2)))
    r_max = float(np.sqrt(np.sum(np.maximum(np.abs(box[:, 0] - pos),
                                            np.abs(box[:, 1] - pos)) ** 2)))
    if side == "retarded":
        r_lo, r_hi = t - ct - rt, t - ct + rt
    else:
        r_lo, r_hi = ct - rt - t, ct + rt - t
    r_lo, r_hi = max(r_lo, r_min, 0.0), min(r_hi, r_max)
    if not r_hi > r_lo:
        return 0.0
    center = f.c[1:] - pos
    dist = float(np.linalg.norm(center))
    circ = float(np.linalg.norm(f.r[1:]))
    if dist > circ * 1.0000001:
        axis = center / dist
        cos_max = math.sqrt(1.0 - (circ / dist) ** 2)
        c_breaks = np.linspace(cos_max, 1.0, 5)
    else:
        axis = np.array([0.0, 0.0, 1.0])
        c_breaks = np.linspace(-1.0, 1.0, 9)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    R, wR = gauss_panels(np.linspace(r_lo, r_hi, 5), n_r)
    cth, wc = gauss_panels(c_breaks, n_theta)
    phi, wp = gauss_panels(np.linspace(0.0, 2 * math.pi, 17), n_phi)
    sth = np.sqrt(np.maximum(0.0, 1.0 - cth * cth))
    dirs = (cth[:, None, None] * axis
            + (sth[:, None] * np.cos(phi))[..., None] * e1
            + (sth[:, None] * np.sin(phi))[..., None] * e2)
    ang_w = (wc[:, None] * wp[None, :])
    tt = t - R if side == "retarded" else t + R
    time_part = f.factor(0, tt) * f.amplitude
    total = 0.0
    for Ri, wRi, tpi in zip(R, wR, time_part):
        if tpi == 0.0:
            continue
        q = pos + Ri * dirs
        spatial = f.factor(1, q[..., 0]) * f.factor(2, q[..., 1]) * f.factor(3, q[..., 2])
        total += wRi * Ri * tpi * float(np.sum(ang_w * spatial))
    return total / (4.0 * math.pi)


def kirchhoff_apply(side: str, f, x) -> np.ndarray:
    """Retarded, advanced or causal (advanced minus retarded) solution at x.

    (E_ret f)(x) = int f(t - |x - y|, y) / (4 pi |x - y|) d^3y, advanced with t + |x - y|.
    """
    if side not in ("retarded", "advanced", "causal"):
        raise ValueError(f"unknown side {side!r}")
    pts = as_points(x)
    flat = pts.reshape(-1, 4)
    out = np.zeros(flat.shape[0])
    for coef, g in as_sum(f):
        for i, p in enumerate(flat):
            if side == "causal":
                v = _kirchhoff_single("advanced", g, p) - _kirchhoff_single("retarded", g, p)
            else:
                v = _kirchhoff_single(side, g, p)
            out[i] += coef * v
    return out.reshape(pts.shape[:-1])


def _light_cone_integral(f: TestFunction, g: TestFunction, z_window, n_rho: int,
                         n_ang: int = 24) -> float:
    corr = [AxisCorrelation((f.c[i], f.radii[i]), (g.c[i], g.radii[i]),
                            z_window if i == 3 else None) for i in range(4)]
    if any(c.empty for c in corr):
        return 0.0
    ct, cx, cy, cz = corr
    from ._correlation import box_distance_range
    rho_lo, rho_hi = box_distance_range([cx.lo, cy.lo, cz.lo], [cx.hi, cy.hi, cz.hi])
    total = 0.0
    for sgn in (-1.0, 1.0):
        # c_t(-rho) enters with +, c_t(rho) with -
        t_lo, t_hi = (-ct.hi, -ct.lo) if sgn < 0 else (ct.lo, ct.hi)
        lo, hi = max(rho_lo, t_lo, 0.0), min(rho_hi, t_hi)
        if not hi > lo:
            continue
        rho, w = gauss_panels(np.linspace(lo, hi, 5), n_rho)
        A = sphere_average_direct(cx, cy, cz, rho, n_u=n_ang, n_phi=n_ang)
        total += -sgn * float(np.sum(w * rho * A * ct(sgn * rho)))
    return total / (4.0 * math.pi) * f.amplitude * g.amplitude


def kirchhoff_pairing(f, g, z_window: tuple[float, float] | None = None) -> SmearedValue:
    """E(f, g) = <f, E g> by integrating over the light cone.

    With ``z_window`` the f-integration is restricted to window[0] <= z <= window[1].
    """
    fine, coarse = 0.0, 0.0
    for cf, fi in as_sum(f):
        for cg, gj in as_sum(g):
            fine += cf * cg * _light_cone_integral(fi, gj, z_window, 16)
            coarse += cf * cg * _light_cone_integral(fi, gj, z_window, 12, 16)
    return SmearedValue(fine, abs(fine - coarse) + 1e-15 * abs(fine))


def causal_pairing(f, g, route: str = "kernel", **smear_kw) -> SmearedValue:
    """E(f, g) from the vacuum commutator (``kernel``) or the light cone (``kirchhoff``)."""
    if route == "kirchhoff":
        return kirchhoff_pairing(f, g)
    if route != "kernel":
        raise ValueError(f"unknown route {route!r}")
    K = vacuum_kernel()
    fg = smear2(K, f, g, **smear_kw)
    gf = smear2(K, g, f, **smear_kw)
    diff = fg - gf
    return SmearedValue(float(np.real(-1j * diff.value)), diff.err)
