"""Polynomial functionals of the field and their star products.

A functional is a finite sum of monomials c * <f_1, u> ... <f_k, u>.  The star
product with a pairing P is

    F * G = sum_n i^n / (2^n n!) <F^(n), P^{(x) n} G^(n)>,

which terminates at n = min(deg F, deg G).  With P = E this is the CCR
product; with P = -2i H it is the deformed (normal-ordered) product.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from ._numerics import gauss_panels
from .boundary import _box_gap, casimir_pairing, causal_images, half_space_pairing
from .fields import (Geometry, PeriodicizedFunction, TestFunction, as_sum,
                     causally_disjoint, image_N, isometry_apply, make_bump)
from .kernels import SmearedValue, kirchhoff_pairing, smear2, vacuum_kernel

__all__ = [
    "RegularFunctional", "PairingKind", "star_product", "commutator", "CCRReport",
    "ccr_causality_check", "SigmaReport", "sigma_c_pairing", "generator",
    "WitnessReport", "symplectic_witness",
]

Key = Tuple[TestFunction, ...]
MAX_INPUT_DEGREE = 2


def _sort_key(f: TestFunction):
    return (tuple(f.c), f.radii, f.amplitude)


def _key(funcs) -> Key:
    return tuple(sorted(funcs, key=_sort_key))


@dataclass(frozen=True)
class RegularFunctional:
    """Finite sum of monomials; ``terms`` maps sorted function tuples to (coef, err)."""

    terms: Dict[Key, Tuple[complex, float]] = field(default_factory=dict)

    @classmethod
    def constant(cls, c: complex, err: float = 0.0) -> "RegularFunctional":
        return cls({(): (complex(c), float(err))})

    @classmethod
    def linear(cls, f, c: complex = 1.0) -> "RegularFunctional":
        """c <f, u> for a test function or a finite sum of them."""
        terms: Dict[Key, Tuple[complex, float]] = {}
        for coef, g in as_sum(f):
            _accumulate(terms, (g,), c * coef, 0.0)
        return cls(terms)

    @classmethod
    def quadratic(cls, f: TestFunction, g: TestFunction, c: complex = 1.0):
        """c <f, u><g, u> (the symmetrized f (x) g)."""
        return cls({_key((f, g)): (complex(c), 0.0)})

    @property
    def degree(self) -> int:
        return max((len(k) for k, (c, _) in self.terms.items() if c != 0), default=0)

    def scalar(self) -> SmearedValue:
        c, e = self.terms.get((), (0.0, 0.0))
        return SmearedValue(complex(c), e)

    def coefficient(self, *funcs) -> SmearedValue:
        c, e = self.terms.get(_key(funcs), (0.0, 0.0))
        return SmearedValue(complex(c), e)

    def part(self, degree: int) -> "RegularFunctional":
        return RegularFunctional({k: v for k, v in self.terms.items() if len(k) == degree})

    def __add__(self, other: "RegularFunctional") -> "RegularFunctional":
        terms = dict(self.terms)
        for k, (c, e) in other.terms.items():
            _accumulate(terms, k, c, e)
        return RegularFunctional(terms)

    def __neg__(self) -> "RegularFunctional":
        return self.scale(-1.0)

    def __sub__(self, other: "RegularFunctional") -> "RegularFunctional":
        return self + (-other)

    def scale(self, c: complex) -> "RegularFunctional":
        return RegularFunctional({k: (c * v, abs(c) * e) for k, (v, e) in self.terms.items()})

    def __mul__(self, other: "RegularFunctional") -> "RegularFunctional":
        """Pointwise (classical) product."""
        terms: Dict[Key, Tuple[complex, float]] = {}
        for ka, (ca, ea) in self.terms.items():
            for kb, (cb, eb) in other.terms.items():
                _accumulate(terms, _key(ka + kb), ca * cb, abs(ca) * eb + abs(cb) * ea)
        return RegularFunctional(terms)

    def star(self) -> "RegularFunctional":
        """Involution: conjugate coefficients (test functions are real)."""
        return RegularFunctional({k: (np.conj(c), e) for k, (c, e) in self.terms.items()})

    def max_err(self) -> float:
        return max((e for _, e in self.terms.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= max(tol, e) for c, e in self.terms.values())

    def __call__(self, u: Callable[[np.ndarray], np.ndarray], nodes: int = 20) -> complex:
        """Evaluate on a field configuration u (vectorized callable on points)."""
        cache: dict = {}
        total = 0.0 + 0.0j
        for k, (c, _) in self.terms.items():
            val = c
            for f in k:
                if f not in cache:
                    cache[f] = _smear_with(f, u, nodes)
                val = val * cache[f]
            total += val
        return total


def _accumulate(terms, key, c, e):
    old_c, old_e = terms.get(key, (0.0, 0.0))
    terms[key] = (old_c + c, old_e + e)


def _smear_with(f: TestFunction, u, nodes: int) -> complex:
    rules = [gauss_panels(np.linspace(f.c[i] - f.radii[i], f.c[i] + f.radii[i], 5), nodes)
             for i in range(4)]
    mesh = np.stack(np.meshgrid(*[r[0] for r in rules[1:]], indexing="ij"), axis=-1)
    w3 = np.einsum("i,j,k->ijk", *[r[1] for r in rules[1:]])
    total = 0.0 + 0.0j
    # one time slice at a time keeps the point array small
    for t, wt in zip(*rules[0]):
        pts = np.concatenate([np.full(mesh.shape[:-1] + (1,), t), mesh], axis=-1)
        total += wt * np.sum(w3 * f(pts) * u(pts))
    return complex(total)


def generator(f) -> RegularFunctional:
    """The linear field functional <f, u>."""
    return RegularFunctional.linear(f)


# ---------------------------------------------------------------------------
# pairings


@dataclass
class PairingKind:
    """Bidistribution used in the star product.

    ``minkowski`` (E), ``half_space`` (E on the half-space), ``slab`` (E_Z) or
    ``deformed`` (-2i H with H the massless vacuum two-point function).
    """

    kind: str
    geometry: Geometry | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("minkowski", "half_space", "slab", "deformed"):
            raise ValueError(f"unknown pairing {self.kind!r}")
        if self.kind == "slab" and (self.geometry is None or not self.geometry.is_slab):
            raise ValueError("slab pairing needs a slab geometry")

    @classmethod
    def minkowski(cls):
        return cls("minkowski")

    @classmethod
    def half_space(cls):
        return cls("half_space", Geometry.half_space())

    @classmethod
    def slab(cls, d: float):
        return cls("slab", Geometry.slab(d))

    @classmethod
    def deformed(cls):
        return cls("deformed")

    def __call__(self, f: TestFunction, g: TestFunction) -> SmearedValue:
        key = (f, g)
        if key not in self._cache:
            self._cache[key] = self._compute(f, g)
        return self._cache[key]

    def _compute(self, f, g) -> SmearedValue:
        if self.kind == "minkowski":
            return kirchhoff_pairing(f, g)
        if self.kind == "half_space":
            return half_space_pairing(f, g)
        if self.kind == "slab":
            return casimir_pairing(f, g, self.geometry.d)
        return smear2(vacuum_kernel(), f, g).scale(-2j)


def star_product(F: RegularFunctional, G: RegularFunctional,
                 pairing: PairingKind) -> RegularFunctional:
    """Star product of functionals of degree at most two."""
    if F.degree > MAX_INPUT_DEGREE or G.degree > MAX_INPUT_DEGREE:
        raise ValueError("star_product inputs are limited to degree two")
    terms: Dict[Key, Tuple[complex, float]] = {}
    for ka, (ca, ea) in F.terms.items():
        for kb, (cb, eb) in G.terms.items():
            for n in range(0, min(len(ka), len(kb)) + 1):
                pref = (1j ** n) / (2 ** n)
                for I in itertools.combinations(range(len(ka)), n):
                    rest_a = tuple(f for i, f in enumerate(ka) if i not in I)
                    for J in itertools.combinations(range(len(kb)), n):
                        rest_b = tuple(g for j, g in enumerate(kb) if j not in J)
                        for perm in itertools.permutations(J):
                            val, err = complex(1.0), 0.0
                            for i, j in zip(I, perm):
                                p = pairing(ka[i], kb[j])
                                err = abs(val) * p.err + abs(p.value) * err + err * p.err
                                val = val * p.value
                            c = pref * ca * cb * val
                            e = (abs(pref) * (abs(ca * cb) * err + abs(ca) * eb * abs(val)
                                              + abs(cb) * ea * abs(val)))
                            _accumulate(terms, _key(rest_a + rest_b), c, e)
    return RegularFunctional(terms)


def commutator(F, G, pairing: PairingKind) -> RegularFunctional:
    return star_product(F, G, pairing) - star_product(G, F, pairing)


@dataclass(frozen=True)
class CCRReport:
    pairing_value: SmearedValue
    commutator_scalar: SmearedValue
    structure_ok: bool
    spacelike: bool
    deviation: float


def ccr_causality_check(f: TestFunction, g: TestFunction,
                        pairing: PairingKind) -> CCRReport:
    """[F_f, F_g] should be the constant i P(f, g) (for E-type pairings) and
    vanish for spacelike supports."""
    C = commutator(generator(f), generator(g), pairing)
    scalar = C.scalar()
    nonscalar = C - C.part(0)
    if pairing.kind == "deformed":
        # antisymmetric part of -2iH(f, g): -i (H(f,g) - H(g,f)) = E(f, g)
        P = SmearedValue((pairing(f, g).value - pairing(g, f).value) / 2.0,
                         0.5 * (pairing(f, g).err + pairing(g, f).err))
    else:
        P = pairing(f, g)
    expected = 1j * P.value
    tol = 10.0 * (scalar.err + P.err) + 1e-12 * abs(expected)
    structure = nonscalar.is_zero(tol) and abs(scalar.value - expected) <= tol
    spacelike = causally_disjoint(f, g) and _images_disjoint(f, g, pairing)
    deviation = abs(scalar.value) if spacelike else abs(scalar.value - expected)
    return CCRReport(P, scalar, bool(structure), spacelike, float(deviation))


def _images_disjoint(f, g, pairing: PairingKind) -> bool:
    if pairing.kind == "half_space":
        return causally_disjoint(f, isometry_apply("reflect_z", g))
    if pairing.kind == "slab":
        return all(causally_disjoint(f, img) for _, img in causal_images(f, g, pairing.geometry.d))
    return True


# ---------------------------------------------------------------------------
# slab symplectic form


@dataclass(frozen=True)
class SigmaReport:
    value: SmearedValue
    raw: SmearedValue
    swapped: SmearedValue
    asymmetry: float


def _expand(zeta, reach_to=None, d=None):
    if isinstance(zeta, PeriodicizedFunction):
        window = zeta.window
        if reach_to is not None:
            window = max(window, int(math.ceil(reach_to / (2 * zeta.d))) + 1)
        return zeta.images(window)
    return list(as_sum(zeta))


def _windowed(zeta, zeta_p, d: float) -> SmearedValue:
    total = SmearedValue(0.0, 0.0)
    for cf, f in _expand(zeta):
        lo, hi = f.center.z - f.radii[3], f.center.z + f.radii[3]
        if hi <= 0 or lo >= d:
            continue
        reach = 0.0
        for _, g in _expand(zeta_p):
            reach = max(reach, abs(f.center.t - g.center.t) + f.radii[0] + g.radii[0])
        for cg, g in _expand(zeta_p, reach_to=reach + d + abs(f.center.z)):
            if _box_gap(f, g, g.center.z) > abs(f.center.t - g.center.t) + f.radii[0] + g.radii[0]:
                continue
            total = total + kirchhoff_pairing(f, g, z_window=(0.0, d)).scale(cf * cg)
    return total


def sigma_c_pairing(zeta, zeta_p, d: float) -> SigmaReport:
    """int over R^3 x [0, d] of zeta E(zeta'), antisymmetrized.

    Arguments are test functions or their periodic image sums; E is applied
    through the light-cone route.
    """
    raw = _windowed(zeta, zeta_p, d)
    swapped = _windowed(zeta_p, zeta, d)
    value = SmearedValue(0.5 * (raw.value - swapped.value), 0.5 * (raw.err + swapped.err))
    return SigmaReport(value, raw, swapped, float(abs(raw.value + swapped.value)))


@dataclass(frozen=True)
class WitnessReport:
    f: TestFunction
    f_prime: TestFunction
    minkowski: SmearedValue
    sigma: SmearedValue
    difference: float
    err: float

    @property
    def separated(self) -> bool:
        return self.difference > 10.0 * self.err


def symplectic_witness(d: float = 1.0) -> WitnessReport:
    """A pair (f, f') with E(f, f') != sigma_C(N f, N f').

    Both bumps sit near the z = 0 plate, time-separated so that the mirror
    image of f' is causally connected to f.  The image sum then contributes a
    reflected light-cone term absent from the Minkowski pairing.
    """
    f = make_bump((0.0, 0.0, 0.0, 0.25 * d), 0.15 * d)
    fp = f.with_center(t=0.6 * d)
    E = kirchhoff_pairing(f, fp)
    sigma = sigma_c_pairing(image_N(f, d), image_N(fp, d), d).value
    err = E.err + sigma.err
    return WitnessReport(f, fp, E, sigma, float(abs(E.value - sigma.value)), float(err))
