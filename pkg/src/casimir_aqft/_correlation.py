"""Correlations of factorized bumps and their angular averages.

For factorized f and g the pair integral of a kernel depending on
u = x - x' only reduces to

    int du K(u) C(u),   C(u) = prod_i c_i(u_i),   c_i(s) = int f_i(y + s) g_i(y) dy.

The spatial part of C is averaged over spheres, giving A(rho) with
int d^3u F(|u|) C(u) = int rho^2 A(rho) F(rho) d rho.
"""

from __future__ import annotations

import math

import numpy as np

from ._numerics import UniformTable, gauss_panels, gauss_variable
from .fields import TestFunction, bump

_Y_NODES = 96


class AxisCorrelation:
    """c(s) = int b_f(y + s) b_g(y) [y + s in window] dy for unit-height bumps.

    ``f`` and ``g`` are (center, radius) pairs; the optional window restricts
    the f variable.
    """

    def __init__(self, f: tuple[float, float], g: tuple[float, float],
                 window: tuple[float, float] | None = None):
        self.f = (float(f[0]), float(f[1]))
        self.g = (float(g[0]), float(g[1]))
        self.window = window
        (fc, fr), (gc, gr) = self.f, self.g
        lo, hi = fc - gc - fr - gr, fc - gc + fr + gr
        if window is not None:
            lo = max(lo, window[0] - gc - gr)
            hi = min(hi, window[1] - gc + gr)
        self.lo, self.hi = lo, hi
        self.empty = not hi > lo
        if not self.empty:
            self._table = UniformTable(self.direct, lo, hi)

    def direct(self, s) -> np.ndarray:
        """Quadrature value at arbitrary offsets (no interpolation)."""
        s = np.asarray(s, dtype=float)
        (fc, fr), (gc, gr) = self.f, self.g
        lo = np.maximum(fc - fr - s, gc - gr)
        hi = np.minimum(fc + fr - s, gc + gr)
        if self.window is not None:
            lo = np.maximum(lo, self.window[0] - s)
            hi = np.minimum(hi, self.window[1] - s)
        y, w = gauss_variable(lo, hi, _Y_NODES)
        vals = bump((y + s[..., None] - fc) / fr) * bump((y - gc) / gr)
        return (vals * w).sum(axis=-1)

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.empty:
            return np.zeros_like(s)
        return self._table(s)

    def shifted(self, delta: float) -> "AxisCorrelation":
        """Correlation after moving the g bump by ``delta``."""
        return AxisCorrelation(self.f, (self.g[0] + delta, self.g[1]), self.window)


def axis_correlations(f: TestFunction, g: TestFunction, z_window=None):
    """Per-axis correlations (t, x, y, z) of two test functions."""
    out = []
    for axis in range(4):
        win = z_window if axis == 3 else None
        out.append(AxisCorrelation((f.c[axis], f.radii[axis]),
                                   (g.c[axis], g.radii[axis]), win))
    return out


def circle_box_arcs(sigma: float, box: tuple[float, float, float, float]):
    """Angular intervals where (sigma cos phi, sigma sin phi) lies in the box."""
    x0, x1, y0, y1 = box
    if sigma == 0.0:
        return [(0.0, 2.0 * math.pi)] if (x0 < 0 < x1 and y0 < 0 < y1) else []
    cuts = [0.0, 2.0 * math.pi]
    for xv in (x0, x1):
        if abs(xv) < sigma:
            a = math.acos(xv / sigma)
            cuts += [a, 2.0 * math.pi - a]
    for yv in (y0, y1):
        if abs(yv) < sigma:
            a = math.asin(yv / sigma)
            cuts += [a % (2.0 * math.pi), (math.pi - a) % (2.0 * math.pi)]
    cuts = sorted(set(cuts))
    arcs = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (a + b)
        cx, cy = sigma * math.cos(m), sigma * math.sin(m)
        if x0 < cx < x1 and y0 < cy < y1:
            if arcs and abs(arcs[-1][1] - a) < 1e-15:
                arcs[-1] = (arcs[-1][0], b)
            else:
                arcs.append((a, b))
    return arcs


def arc_rule(arcs, n: int = 48, max_len: float = math.pi / 8):
    """Composite Gauss rule over a list of arcs."""
    nodes, weights = [], []
    for a, b in arcs:
        pieces = max(1, int(math.ceil((b - a) / max_len)))
        x, w = gauss_panels(np.linspace(a, b, pieces + 1), n)
        nodes.append(x)
        weights.append(w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def box_distance_range(lows, highs) -> tuple[float, float]:
    """Smallest and largest distance from the origin to an axis-aligned box."""
    lows, highs = np.asarray(lows, float), np.asarray(highs, float)
    near = np.where(lows > 0, lows, np.where(highs < 0, -highs, 0.0))
    far = np.maximum(np.abs(lows), np.abs(highs))
    return float(np.sqrt(np.sum(near ** 2))), float(np.sqrt(np.sum(far ** 2)))


class TransverseAverage:
    """A_perp(sigma) = int_0^{2 pi} c_x(sigma cos phi) c_y(sigma sin phi) d phi."""

    def __init__(self, cx: AxisCorrelation, cy: AxisCorrelation):
        self.cx, self.cy = cx, cy
        self.box = (cx.lo, cx.hi, cy.lo, cy.hi)
        self.empty = cx.empty or cy.empty
        if self.empty:
            return
        self.s_lo, self.s_hi = box_distance_range([cx.lo, cy.lo], [cx.hi, cy.hi])
        self._table = UniformTable(self.direct, self.s_lo, self.s_hi,
                                   left="even" if self.s_lo == 0.0 else "zero")

    def direct(self, sigma) -> np.ndarray:
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        nodes, weights, owner = [], [], []
        for i, si in enumerate(sigma):
            phi, w = arc_rule(circle_box_arcs(float(si), self.box))
            nodes.append(si * np.cos(phi) + 1j * si * np.sin(phi))
            weights.append(w)
            owner.append(np.full(phi.size, i))
        pts = np.concatenate(nodes)
        vals = np.concatenate(weights) * self.cx(pts.real) * self.cy(pts.imag)
        return np.bincount(np.concatenate(owner), vals, minlength=sigma.size)

    def __call__(self, sigma) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=float)
        if self.empty:
            return np.zeros_like(sigma)
        return self._table(np.abs(sigma))


def _u_intervals(rho: float, zlo: float, zhi: float, s_lo: float, s_hi: float):
    """Ranges of u = cos(theta) where both the z and transverse factors can be nonzero."""
    if rho == 0.0 or rho < s_lo:
        return []
    u_max = math.sqrt(max(0.0, 1.0 - (s_lo / rho) ** 2))
    u_min = math.sqrt(max(0.0, 1.0 - (s_hi / rho) ** 2))
    pieces = [(-u_max, -u_min), (u_min, u_max)] if u_min > 0 else [(-u_max, u_max)]
    out = []
    for a, b in pieces:
        a, b = max(a, zlo / rho), min(b, zhi / rho)
        if b > a:
            out.append((a, b))
    return out


class SphericalAverage:
    """A(rho) = int_{-1}^{1} du A_perp(rho sqrt(1 - u^2)) c_z(rho u), tabulated."""

    def __init__(self, perp: TransverseAverage, cz: AxisCorrelation, n_u: int = 48):
        self.perp, self.cz, self.n_u = perp, cz, n_u
        self.empty = perp.empty or cz.empty
        if self.empty:
            return
        cx, cy = perp.cx, perp.cy
        self.rho_lo, self.rho_hi = box_distance_range([cx.lo, cy.lo, cz.lo],
                                                      [cx.hi, cy.hi, cz.hi])
        self._table = UniformTable(self.direct, self.rho_lo, self.rho_hi,
                                   left="even" if self.rho_lo == 0.0 else "zero")

    def direct(self, rho) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        nodes, weights, owner = [], [], []
        for i, r in enumerate(rho):
            if r == 0.0:
                # whole sphere collapses onto the origin
                nodes.append(np.zeros(1))
                weights.append(np.full(1, 2.0))
                owner.append(np.full(1, i))
                continue
            for a, b in _u_intervals(float(r), self.cz.lo, self.cz.hi,
                                     self.perp.s_lo, self.perp.s_hi):
                pieces = 1 + int(math.ceil((b - a) / 0.25))
                u, w = gauss_panels(np.linspace(a, b, pieces + 1), self.n_u)
                nodes.append(u)
                weights.append(w)
                owner.append(np.full(u.size, i))
        if not nodes:
            return np.zeros_like(rho)
        owner = np.concatenate(owner)
        u = np.concatenate(nodes)
        r = rho[owner]
        vals = (np.concatenate(weights) * self.perp(r * np.sqrt(np.maximum(0.0, 1.0 - u * u)))
                * self.cz(r * u))
        return np.bincount(owner, vals, minlength=rho.size)

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.empty:
            return np.zeros_like(rho)
        return self._table(np.abs(rho))

    def derivative(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.empty:
            return np.zeros_like(rho)
        return np.sign(rho) * self._table.derivative(np.abs(rho))


def sphere_average_direct(cx, cy, cz, rho, n_u: int = 48, n_phi: int = 48) -> np.ndarray:
    """Direct (u, phi) product quadrature of C over spheres of radius rho.

    Independent of the tabulated transverse average; used by the
    light-cone (Kirchhoff) route.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    box = (cx.lo, cx.hi, cy.lo, cy.hi)
    s_lo, s_hi = box_distance_range([cx.lo, cy.lo], [cx.hi, cy.hi])
    xs, ys, ws, owner = [], [], [], []
    for i, r in enumerate(rho):
        if r <= 0.0:
            continue
        for a, b in _u_intervals(float(r), cz.lo, cz.hi, s_lo, s_hi):
            pieces = 1 + int(math.ceil((b - a) / 0.25))
            u, wu = gauss_panels(np.linspace(a, b, pieces + 1), n_u)
            zpart = wu * cz(r * u)
            for uj, zj in zip(u, zpart):
                if zj == 0.0:
                    continue
                sigma = r * math.sqrt(max(0.0, 1.0 - uj * uj))
                phi, wp = arc_rule(circle_box_arcs(sigma, box), n_phi)
                if phi.size:
                    xs.append(sigma * np.cos(phi))
                    ys.append(sigma * np.sin(phi))
                    ws.append(zj * wp)
                    owner.append(np.full(phi.size, i))
    if not ws:
        return np.zeros_like(rho)
    vals = np.concatenate(ws) * cx(np.concatenate(xs)) * cy(np.concatenate(ys))
    return np.bincount(np.concatenate(owner), vals, minlength=rho.size)
