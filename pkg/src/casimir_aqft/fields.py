"""Test functions, z-isometries, the odd/antisymmetrizing maps and the image operator.

Points are handled either as :class:`Point4` or as float arrays whose last
axis holds ``(t, x, y, z)``.  All callables here accept such arrays and are
vectorized over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from ._numerics import gauss

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Point4:
    """Spacetime event in natural units."""

    t: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.x, self.y, self.z)):
            raise ValueError("Point4 components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z], dtype=float)

    def interval(self, other: "Point4") -> float:
        """Minkowski interval -dt^2 + dx^2 + dy^2 + dz^2."""
        dt, dx, dy, dz = other.as_array() - self.as_array()
        return -dt * dt + dx * dx + dy * dy + dz * dz

    @classmethod
    def of(cls, p) -> "Point4":
        if isinstance(p, Point4):
            return p
        t, x, y, z = (float(v) for v in p)
        return cls(t, x, y, z)


def as_points(p) -> np.ndarray:
    """Coerce a Point4, a sequence of Point4 or an array to shape (..., 4)."""
    if isinstance(p, Point4):
        return p.as_array()
    if isinstance(p, (list, tuple)) and p and isinstance(p[0], Point4):
        return np.stack([q.as_array() for q in p])
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 4:
        raise ValueError("points need a trailing axis of length 4")
    return arr


@dataclass(frozen=True)
class Geometry:
    """Half-space z >= 0, or the slab 0 <= z <= d."""

    kind: str
    d: float | None = None

    def __post_init__(self):
        if self.kind not in ("half_space", "slab"):
            raise ValueError(f"unknown geometry {self.kind!r}")
        if self.kind == "slab":
            if self.d is None or not self.d > 0:
                raise ValueError("slab geometry needs d > 0")
        elif self.d is not None:
            raise ValueError("half_space geometry takes no d")

    @classmethod
    def half_space(cls) -> "Geometry":
        return cls("half_space")

    @classmethod
    def slab(cls, d: float) -> "Geometry":
        return cls("slab", float(d))

    @property
    def is_slab(self) -> bool:
        return self.kind == "slab"

    def contains_z(self, z, strict: bool = False):
        z = np.asarray(z, dtype=float)
        upper = self.d if self.is_slab else np.inf
        if strict:
            return (z > 0) & (z < upper)
        return (z >= 0) & (z <= upper)


def bump(u):
    """exp(1 - 1/(1-u^2)) on |u| < 1, exactly zero elsewhere."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    return out


def bump_derivative(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    q = 1.0 - ui * ui
    out[inside] = -2.0 * ui / (q * q) * np.exp(1.0 - 1.0 / q)
    return out


def bump_fourier(k, n_nodes: int = 128):
    """Fourier transform of the unit bump, int b(u) exp(-i k u) du (real, even)."""
    k = np.asarray(k, dtype=float)
    u, w = gauss(-1.0, 1.0, n_nodes)
    return (bump(u) * w * np.cos(np.multiply.outer(k, u))).sum(axis=-1)


@dataclass(frozen=True)
class TestFunction:
    """Factorized bump ``amplitude * prod_i b((x_i - c_i)/r_i)``.

    The transverse factor f_perp carries the amplitude and the t, x, y
    profiles; the z factor f_z is a unit-height bump.
    """

    __test__ = False  # keep pytest from collecting this class

    center: Point4
    radii: tuple[float, float, float, float]
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", Point4.of(self.center))
        radii = tuple(float(r) for r in self.radii)
        if len(radii) != 4:
            raise ValueError("radii must have four entries")
        if not all(r > 0 and math.isfinite(r) for r in radii):
            raise ValueError("radii must be positive")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @property
    def c(self) -> np.ndarray:
        return self.center.as_array()

    @property
    def r(self) -> np.ndarray:
        return np.asarray(self.radii)

    def support(self) -> np.ndarray:
        """Support box as an array of shape (4, 2)."""
        c, r = self.c, self.r
        return np.stack([c - r, c + r], axis=1)

    def factor(self, axis: int, s) -> np.ndarray:
        """One-dimensional profile along ``axis`` (unit height)."""
        return bump((np.asarray(s, dtype=float) - self.c[axis]) / self.radii[axis])

    def __call__(self, p) -> np.ndarray:
        pts = as_points(p)
        u = (pts - self.c) / self.r
        return self.amplitude * np.prod(bump(u), axis=-1)

    def gradient(self, p) -> np.ndarray:
        pts = as_points(p)
        u = (pts - self.c) / self.r
        b = bump(u)
        db = bump_derivative(u) / self.r
        out = np.empty(pts.shape, dtype=float)
        for mu in range(4):
            others = np.prod(np.delete(b, mu, axis=-1), axis=-1)
            out[..., mu] = self.amplitude * db[..., mu] * others
        return out

    def fourier(self, axis: int, k) -> np.ndarray:
        """int f_axis(s) exp(-i k s) ds for the unit-height factor along ``axis``."""
        k = np.asarray(k, dtype=float)
        r = self.radii[axis]
        return r * bump_fourier(k * r) * np.exp(-1j * k * self.c[axis])

    def integral(self) -> float:
        return self.amplitude * float(np.prod(self.r)) * float(bump_fourier(0.0)) ** 4

    def l1_norm(self) -> float:
        return abs(self.integral())

    def with_center(self, **coords) -> "TestFunction":
        c = {name: getattr(self.center, name) for name in "txyz"}
        c.update(coords)
        return TestFunction(Point4(**c), self.radii, self.amplitude)

    def scaled(self, factor: float) -> "TestFunction":
        return TestFunction(self.center, self.radii, self.amplitude * factor)


def make_bump(center, radii, amplitude: float = 1.0) -> TestFunction:
    """Product bump centered at ``center`` with per-axis ``radii``."""
    if np.isscalar(radii):
        radii = (radii,) * 4
    return TestFunction(Point4.of(center), tuple(radii), amplitude)


@dataclass(frozen=True)
class FunctionSum:
    """Finite linear combination of test functions."""

    terms: tuple[tuple[float, TestFunction], ...]

    def __call__(self, p) -> np.ndarray:
        pts = as_points(p)
        out = np.zeros(pts.shape[:-1])
        for coef, f in self.terms:
            out = out + coef * f(pts)
        return out

    def __iter__(self):
        return iter(self.terms)


Evaluable = Union[TestFunction, FunctionSum, Callable[[np.ndarray], np.ndarray]]


def as_sum(f) -> FunctionSum:
    if isinstance(f, FunctionSum):
        return f
    if isinstance(f, TestFunction):
        return FunctionSum(((1.0, f),))
    raise TypeError("expected a TestFunction or FunctionSum")


def reflect_points(p) -> np.ndarray:
    pts = np.array(as_points(p), dtype=float)
    pts[..., 3] = -pts[..., 3]
    return pts


def _transform(f: TestFunction, kind: str, s: float | None) -> TestFunction:
    if kind == "reflect_z":
        return f.with_center(z=-f.center.z)
    if kind == "translate_z":
        if s is None:
            raise ValueError("translate_z needs a shift s")
        return f.with_center(z=f.center.z + s)
    raise ValueError(f"unknown isometry {kind!r}")


def isometry_apply(kind: str, f, s: float | None = None):
    """Pull back ``f`` along z -> -z (``reflect_z``) or z -> z - s (``translate_z``).

    Bumps are even about their centers, so both maps just move the center.
    """
    if isinstance(f, FunctionSum):
        return FunctionSum(tuple((c, _transform(g, kind, s)) for c, g in f.terms))
    return _transform(f, kind, s)


def antisymmetrize(phi: Evaluable) -> Callable[[np.ndarray], np.ndarray]:
    """u(xbar, z) = (phi(xbar, z) - phi(xbar, -z))/sqrt(2), defined for z >= 0."""

    def u(p):
        pts = as_points(p)
        if np.any(pts[..., 3] < 0):
            raise ValueError("antisymmetrized field is defined on z >= 0 only")
        return (phi(pts) - phi(reflect_points(pts))) / SQRT2

    return u


def odd_extension(h) -> FunctionSum:
    """(h Theta(z) - h(xbar,-z) Theta(-z))/sqrt(2) for h supported in z > 0."""
    for _, g in as_sum(h):
        if g.center.z - g.radii[3] <= 0:
            raise ValueError("odd_extension needs support inside z > 0")
    terms = []
    for coef, g in as_sum(h):
        terms.append((coef / SQRT2, g))
        terms.append((-coef / SQRT2, isometry_apply("reflect_z", g)))
    return FunctionSum(tuple(terms))


def default_window(f, d: float) -> int:
    reach = max(abs(g.center.z) + g.radii[3] for _, g in as_sum(f))
    return int(math.ceil(reach / (2.0 * d))) + 1


@dataclass(frozen=True)
class PeriodicizedFunction:
    """z -> sum_n [f(xbar, z + 2nd) - f(xbar, -z + 2nd)] for compactly supported f.

    Evaluation first folds z into [-d, d), so the window only has to cover
    the base support and the result is exact for every z.
    """

    base: Union[TestFunction, FunctionSum]
    d: float
    window: int = field(default=-1)

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d must be positive")
        if self.window < 0:
            object.__setattr__(self, "window", default_window(self.base, self.d))

    def _shifted_sum(self, pts: np.ndarray, sign: float) -> np.ndarray:
        total = np.zeros(pts.shape[:-1])
        q = np.array(pts, dtype=float)
        for n in range(-self.window, self.window + 1):
            q[..., 3] = sign * pts[..., 3] + 2.0 * n * self.d
            total = total + self.base(q)
        return total

    def __call__(self, p) -> np.ndarray:
        pts = np.array(as_points(p), dtype=float)
        two_d = 2.0 * self.d
        pts[..., 3] = pts[..., 3] - two_d * np.floor((pts[..., 3] + self.d) / two_d)
        # same summation order for z and -z keeps the oddness exact
        return self._shifted_sum(pts, 1.0) - self._shifted_sum(pts, -1.0)

    def images(self, window: int | None = None) -> list[tuple[float, TestFunction]]:
        """The translated/reflected copies as signed test functions."""
        window = self.window if window is None else window
        out = []
        for coef, g in as_sum(self.base):
            for n in range(-window, window + 1):
                shift = -2.0 * n * self.d
                out.append((coef, isometry_apply("translate_z", g, shift)))
                refl = isometry_apply("reflect_z", g)
                out.append((-coef, isometry_apply("translate_z", refl, -shift)))
        return out


def image_N(f, d: float, window: int | None = None) -> PeriodicizedFunction:
    """Odd, 2d-periodic image sum of a compactly supported function."""
    return PeriodicizedFunction(f, float(d), -1 if window is None else int(window))


def noninjectivity_witness(d: float, center_z: float | None = None,
                           radius: float | None = None) -> tuple[FunctionSum, FunctionSum]:
    """Two different compactly supported functions with the same image sum.

    The first is a bump beta inside (0, d).  The second is
    beta/2 - beta(2d - z)/2: a half-height copy plus a negated half-height
    copy reflected about z = d, which N maps onto the same odd periodic
    function.
    """
    center_z = 0.4 * d if center_z is None else center_z
    radius = 0.2 * d if radius is None else radius
    beta = make_bump((0.0, 0.0, 0.0, center_z), (1.0, 1.0, 1.0, radius))
    mirrored = beta.with_center(z=2.0 * d - center_z)
    return FunctionSum(((1.0, beta),)), FunctionSum(((0.5, beta), (-0.5, mirrored)))


def causally_disjoint(f: TestFunction, g: TestFunction, margin: float = 0.0) -> bool:
    """Sufficient test that the support boxes are spacelike separated."""
    bf, bg = f.support(), g.support()
    gap = np.maximum(0.0, np.maximum(bf[1:, 0] - bg[1:, 1], bg[1:, 0] - bf[1:, 1]))
    dist = float(np.sqrt(np.sum(gap * gap)))
    dt = max(abs(bf[0, 1] - bg[0, 0]), abs(bg[0, 1] - bf[0, 0]))
    return dt + margin < dist


def grid_points(axes: Sequence[Iterable[float]]) -> np.ndarray:
    """Tensor grid of points from four 1D coordinate lists."""
    mesh = np.meshgrid(*[np.asarray(list(a), dtype=float) for a in axes], indexing="ij")
    return np.stack(mesh, axis=-1)
