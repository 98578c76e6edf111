"""Point-split observables: Wick square and stress-energy densities.

The remainder W = omega_2 - H is a sum of free kernels evaluated at image
separations (the Hadamard subtraction removes the direct term), plus the smooth
thermal remainder for KMS states.  Each image term is a function G(u) of
u = x - T x' for an isometry T, so the stress tensor follows from the Hessian
of G at the coincidence separation:

* d_mu d'_nu W = S_nu M_mu,nu, with S the diagonal of -dT;
* derivatives of W(x, x) along the diagonal pick up (1 + S_mu)(1 + S_nu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import zeta

from ._numerics import DomainError, gauss_panels
from .boundary import _tail_corrected
from .fields import Geometry, as_points, as_sum
from .kernels import FreeProfile, SmearedValue, StateSpec

__all__ = [
    "RemainderKernel", "DensityProfile", "remainder_kernel", "wick_square_density",
    "stress_density", "stress_tensor", "stress_tensor_fd", "smear_density",
    "reference_formulas", "density_profile", "polygamma3", "ETA",
]

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
_TRANSLATION = np.array([-1.0, -1.0, -1.0, -1.0])
_REFLECTION = np.array([-1.0, -1.0, -1.0, 1.0])
_N_IMAGES = 2048
NORMALIZATIONS = ("reference", "direct")


def _base_of(state) -> StateSpec:
    return StateSpec.vacuum() if state is None else state


def _scale_length(geometry: Geometry) -> float:
    return geometry.d if geometry.is_slab else 1.0


def _check_interior(geometry: Geometry, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    margin = 1e-6 * _scale_length(geometry)
    if np.any(z < margin) or (geometry.is_slab and np.any(z > geometry.d - margin)):
        raise DomainError("point too close to (or outside) the boundary")
    return z


def _normalization(geometry: Geometry, normalization: str, kind: str) -> float:
    """Overall factor applied to the physical point-split value.

    The single-plate reference convention is 1/2 for the Wick square and
    -1/2 for the stress tensor, which reproduces the single-plate closed forms
    quoted with this package; ``direct`` returns the plain point-split value.
    The slab always uses the plain value.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    if geometry.is_slab or normalization == "direct":
        return 1.0
    return 0.5 if kind == "wick" else -0.5


# ---------------------------------------------------------------------------
# image sums of radial data


def _radial_data(profile: FreeProfile, rho):
    """(k, k_tt, k_r/rho, k_rr) at tau = 0."""
    k, ktt, kr, krr = profile.coincidence_derivatives(rho)
    return np.stack([k, ktt, kr / rho, krr], axis=-1)


def _family_sums(geometry: Geometry, profile: FreeProfile, z: float):
    """Summed radial data of the periodic (n != 0) and reflected image families."""
    if not geometry.is_slab:
        ref = _radial_data(profile, np.array(2.0 * z))
        return np.array([-ref[0], 0.0, 0.0, 0.0]), np.r_[0.0, ref[1:]], 0.0
    d = geometry.d
    n = np.arange(1, _N_IMAGES + 1)
    periodic = 2.0 * _radial_data(profile, 2.0 * n * d)
    reflected_first = _radial_data(profile, np.array(2.0 * z))
    reflected = (_radial_data(profile, np.abs(2.0 * z + 2.0 * n * d))
                 + _radial_data(profile, np.abs(2.0 * z - 2.0 * n * d)))
    # the combined families decay fastest; the value column (index 0) only
    # converges in combination for thermal kernels, so it is not split
    total_per, total_ref, err = np.zeros(4), np.zeros(4), 0.0
    for j in range(4):
        combined = periodic[:, j] - reflected[:, j]
        full, _ = _tail_corrected(-reflected_first[j], combined, _N_IMAGES)
        half, _ = _tail_corrected(-reflected_first[j], combined[: _N_IMAGES // 2],
                                  _N_IMAGES // 2)
        err = max(err, abs(full - half))
        if j == 0:
            total_per[0] = np.real(full)
            continue
        ref_full, _ = _tail_corrected(reflected_first[j], reflected[:, j], _N_IMAGES)
        total_ref[j] = np.real(ref_full)
        total_per[j] = np.real(full) + total_ref[j]
    return total_per, total_ref, err


def _hessian(data) -> np.ndarray:
    k, ktt, kr_over_r, krr = data
    return np.diag([ktt, kr_over_r, kr_over_r, krr])


def _stress_from_hessian(S: np.ndarray, M: np.ndarray, xi: float) -> np.ndarray:
    """Point-split improved stress tensor of one image term with Hessian M."""
    mixed = M * S[None, :]                         # d_mu d'_nu
    T1 = 0.5 * (mixed + mixed.T)
    T2 = -0.5 * ETA * np.sum(np.diag(ETA) * S * np.diag(M))
    total = np.outer(1.0 + S, 1.0 + S) * M         # diagonal derivatives of W(x, x)
    box = np.sum(np.diag(ETA) * np.diag(total))
    T3 = xi * (ETA * box - total)
    return T1 + T2 + T3


# ---------------------------------------------------------------------------
# remainder kernel


@dataclass(frozen=True)
class RemainderKernel:
    """W(x, x') = omega_2 - H at eps = 0 for interior points."""

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    geometry: Geometry
    state: StateSpec

    def __call__(self, x, xp) -> np.ndarray:
        return self.evaluator(as_points(x), as_points(xp))


def remainder_kernel(geometry: Geometry, state: StateSpec | None = None) -> RemainderKernel:
    """Image sum without the Hadamard (direct) term, plus the thermal remainder."""
    state = _base_of(state)
    profile = FreeProfile(state.beta) if state.is_kms else FreeProfile()

    def k(dt, rho):
        return np.real(profile(dt + 0j, rho))

    def direct_thermal(dt, rho):
        if not state.is_kms:
            return 0.0
        return np.real(profile.remainder(profile.reduce(dt + 0j), rho))

    def single(x, xp):
        _check_interior(geometry, [x[3], xp[3]])
        dt = x[0] - xp[0]
        s2 = (x[1] - xp[1]) ** 2 + (x[2] - xp[2]) ** 2
        z, zp = x[3], xp[3]
        if not geometry.is_slab:
            return direct_thermal(dt, math.sqrt(s2 + (z - zp) ** 2)) - k(
                dt, math.sqrt(s2 + (z + zp) ** 2))
        d = geometry.d
        n = np.arange(1, _N_IMAGES + 1)

        def kw(w):
            return k(dt, np.sqrt(s2 + w * w))

        first = direct_thermal(dt, math.sqrt(s2 + (z - zp) ** 2)) - kw(np.array(z + zp))
        pairs = (kw(z - zp + 2 * n * d) + kw(z - zp - 2 * n * d)
                 - kw(z + zp + 2 * n * d) - kw(z + zp - 2 * n * d))
        return float(np.real(_tail_corrected(first, pairs, _N_IMAGES)[0]))

    def evaluate(x, xp):
        x, xp = np.broadcast_arrays(x, xp)
        flat_x, flat_xp = x.reshape(-1, 4), xp.reshape(-1, 4)
        out = np.array([single(a, b) for a, b in zip(flat_x, flat_xp)])
        return out.reshape(x.shape[:-1])

    return RemainderKernel(evaluate, geometry, state)


# ---------------------------------------------------------------------------
# densities


def _coincidence(geometry: Geometry, state: StateSpec, z: float):
    """Remainder value, stress-tensor builder data and error at (xbar, z)."""
    profile = FreeProfile(state.beta) if state.is_kms else FreeProfile()
    per, ref, err = _family_sums(geometry, profile, z)
    w0, wtt, wii = profile.remainder_at_origin()
    return per, ref, (w0, wtt, wii), err


def wick_square_density(geometry: Geometry, state: StateSpec | None, z,
                        normalization: str = "reference") -> np.ndarray:
    """Coincidence limit of the remainder kernel at height z."""
    state = _base_of(state)
    zs = np.atleast_1d(_check_interior(geometry, z))
    out = []
    for zi in zs:
        per, ref, thermal, _ = _coincidence(geometry, state, float(zi))
        out.append(per[0] - ref[0] + thermal[0])
    factor = _normalization(geometry, normalization, "wick")
    res = factor * np.array(out)
    return res if np.ndim(z) else float(res[0])


def stress_tensor(geometry: Geometry, state: StateSpec | None, z: float, xi: float,
                  normalization: str = "reference") -> np.ndarray:
    """Full 4x4 point-split stress tensor at height z (analytic image derivatives)."""
    state = _base_of(state)
    z = float(_check_interior(geometry, z))
    per, ref, (w0, wtt, wii), _ = _coincidence(geometry, state, z)
    T = (_stress_from_hessian(_TRANSLATION, _hessian(per), xi)
         - _stress_from_hessian(_REFLECTION, _hessian(ref), xi))
    if state.is_kms:
        T = T + _stress_from_hessian(_TRANSLATION, np.diag([wtt, wii, wii, wii]), xi)
    return _normalization(geometry, normalization, "stress") * T


def _fd_mixed(W, x, h):
    """d_mu d'_nu W at (x, x) by central differences, plus Hessian of W(y, y)."""
    e = np.eye(4) * h
    mixed = np.empty((4, 4))
    for mu in range(4):
        for nu in range(4):
            mixed[mu, nu] = (W(x + e[mu], x + e[nu]) - W(x + e[mu], x - e[nu])
                             - W(x - e[mu], x + e[nu]) + W(x - e[mu], x - e[nu])) / (4 * h * h)

    def V(y):
        return W(y, y)

    hess = np.empty((4, 4))
    v0 = V(x)
    for mu in range(4):
        for nu in range(4):
            if mu == nu:
                hess[mu, mu] = (V(x + e[mu]) - 2 * v0 + V(x - e[mu])) / (h * h)
            else:
                hess[mu, nu] = (V(x + e[mu] + e[nu]) - V(x + e[mu] - e[nu])
                                - V(x - e[mu] + e[nu]) + V(x - e[mu] - e[nu])) / (4 * h * h)
    return mixed, hess


def stress_tensor_fd(geometry: Geometry, state: StateSpec | None, z: float, xi: float,
                     h: float, normalization: str = "reference") -> np.ndarray:
    """Finite-difference oracle: second-order stencils applied to the remainder kernel."""
    state = _base_of(state)
    z = float(_check_interior(geometry, z))
    if not 0 < 2 * h < z or (geometry.is_slab and 2 * h >= geometry.d - z):
        raise DomainError("finite-difference step reaches the boundary")
    K = remainder_kernel(geometry, state)

    def W(a, b):
        return float(K(a, b))

    x = np.array([0.0, 0.0, 0.0, z])
    mixed, hess = _fd_mixed(W, x, h)
    T1 = 0.5 * (mixed + mixed.T)
    T2 = -0.5 * ETA * np.sum(np.diag(ETA) * np.diag(mixed))
    box = np.sum(np.diag(ETA) * np.diag(hess))
    T3 = xi * (ETA * box - hess)
    return _normalization(geometry, normalization, "stress") * (T1 + T2 + T3)


def stress_density(geometry: Geometry, state: StateSpec | None, z, xi: float, mu: int,
                   nu: int, mode: str = "analytic", h: float = 1e-2,
                   normalization: str = "reference"):
    """Component (mu, nu) of the point-split stress tensor at height(s) z."""
    if not (0 <= mu < 4 and 0 <= nu < 4):
        raise ValueError("indices must be in 0..3")
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    vals = []
    for zi in zs:
        if mode == "analytic":
            T = stress_tensor(geometry, state, zi, xi, normalization)
        elif mode == "fd":
            T = stress_tensor_fd(geometry, state, zi, xi, h, normalization)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        vals.append(T[mu, nu])
    res = np.array(vals)
    return res if np.ndim(z) else float(res[0])


# ---------------------------------------------------------------------------
# closed forms


def polygamma3(x):
    """psi^(3)(x) = 3! zeta(4, x)."""
    return 6.0 * zeta(4.0, np.asarray(x, dtype=float))


def reference_formulas(geometry: Geometry, kind: str, z, xi: float = 1.0 / 6.0,
                       d: float | None = None, mu: int | None = None, nu: int | None = None):
    """Closed-form densities for comparison.

    kind ``wick``: -1/(32 pi^2 z^2) (single plate), (1/48d^2)(1 - 3/sin^2(pi z/d)) (slab).
    kind ``stress``: A (6 xi - 1)/(32 pi^2 z^4) with A = diag(-1,1,1,0) (single plate);
    A' (-1/1440 d^4) [1 + (6 xi - 1)(5 pi^2/2)(psi3(1 - z/d) - psi3(z/d))] with
    A' = diag(-1,1,1,3) (slab).  Without (mu, nu) the stress returns the 4x4 matrix.
    """
    z = np.asarray(z, dtype=float)
    if geometry.is_slab:
        d = geometry.d if d is None else d
        if kind == "wick":
            return (1.0 - 3.0 / np.sin(math.pi * z / d) ** 2) / (48.0 * d * d)
        if kind == "stress":
            A = np.diag([-1.0, 1.0, 1.0, 3.0])
            bracket = 1.0 + (6 * xi - 1) * 2.5 * math.pi ** 2 * (
                polygamma3(1.0 - z / d) - polygamma3(z / d))
            scalar = -bracket / (1440.0 * d ** 4)
            return _component(A, scalar, mu, nu)
    else:
        if kind == "wick":
            return -1.0 / (32 * math.pi ** 2 * z ** 2)
        if kind == "stress":
            A = np.diag([-1.0, 1.0, 1.0, 0.0])
            return _component(A, (6 * xi - 1) / (32 * math.pi ** 2 * z ** 4), mu, nu)
    raise ValueError(f"unknown kind {kind!r}")


def _component(A, scalar, mu, nu):
    if mu is None or nu is None:
        return np.multiply.outer(scalar, A)
    return A[mu, nu] * scalar


# ---------------------------------------------------------------------------
# smearing and profiles


@dataclass(frozen=True)
class DensityProfile:
    geometry: Geometry
    kind: str
    z: np.ndarray
    values: np.ndarray
    errors: np.ndarray


def _density_function(geometry, state, kind, xi, mu, nu, normalization):
    if kind == "wick":
        return lambda z: wick_square_density(geometry, state, z, normalization)
    if kind == "stress":
        return lambda z: stress_density(geometry, state, z, xi, mu, nu,
                                        normalization=normalization)
    if kind == "reference_wick":
        return lambda z: reference_formulas(geometry, "wick", z)
    if kind == "reference_stress":
        return lambda z: reference_formulas(geometry, "stress", z, xi, mu=mu, nu=nu)
    raise ValueError(f"unknown density kind {kind!r}")


def smear_density(source, f, xi: float = 1.0 / 6.0, mu: int = 0, nu: int = 0,
                  normalization: str = "reference") -> SmearedValue:
    """int density(z) f(x) d^4x for a density that depends on z only.

    ``source`` is (geometry, state, kind) with kind in wick, stress,
    reference_wick, reference_stress.
    """
    geometry, state, kind = source
    density = _density_function(geometry, _base_of(state), kind, xi, mu, nu, normalization)
    total, coarse = 0.0, 0.0
    for coef, g in as_sum(f):
        lo, hi = g.center.z - g.radii[3], g.center.z + g.radii[3]
        if lo <= 0 or (geometry.is_slab and hi >= geometry.d):
            raise ValueError("test function support touches the boundary")
        perp = g.integral() / (g.radii[3] * _unit_bump_integral())
        for n, acc in ((24, "fine"), (16, "coarse")):
            z, w = gauss_panels(np.linspace(lo, hi, 9), n)
            val = coef * perp * float(np.sum(w * g.factor(3, z) * density(z)))
            if acc == "fine":
                total += val
            else:
                coarse += val
    return SmearedValue(total, abs(total - coarse) + 1e-15 * abs(total))


def _unit_bump_integral() -> float:
    u, w = gauss_panels(np.linspace(-1.0, 1.0, 33), 24)
    from .fields import bump
    return float(np.sum(w * bump(u)))


def density_profile(geometry: Geometry, state: StateSpec | None, kind: str, z,
                    xi: float = 1.0 / 6.0, mu: int = 0, nu: int = 0,
                    normalization: str = "reference") -> DensityProfile:
    """Sample a Wick-square or stress density on a z grid with error estimates.

    The error is the disagreement between the image sum truncated at its full
    length and at half length (both tail-corrected).
    """
    state = _base_of(state)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    vals, errs = [], []
    for zi in zs:
        _check_interior(geometry, zi)
        _, _, _, err = _coincidence(geometry, state, float(zi))
        if kind == "wick":
            v = wick_square_density(geometry, state, float(zi), normalization)
            scale = 1.0
        else:
            v = stress_density(geometry, state, float(zi), xi, mu, nu,
                               normalization=normalization)
            scale = 1.0 / (_scale_length(geometry) ** 2 * max(zi, 1e-300) ** 2)
        vals.append(v)
        errs.append(err * scale + 1e-15 * abs(v))
    return DensityProfile(geometry, kind, zs, np.array(vals), np.array(errs))
