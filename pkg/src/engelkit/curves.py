"""Closed parametrized curves in contact R^3 and Engel R^4.

A curve is an evaluator ``t -> point`` on the circle ``[0, 1)`` together with
its derivative.  Everything is vectorized: ``eval`` takes an array of
parameters and returns an ``(n, dim)`` array.

Legendrian curves in either 3-D frame are handled through the triple
(x, slope, height) with ``height' = slope * x'``.  In contact coordinates this
is (x, y, z); in Geiges coordinates it is (x, w, z).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, least_squares

from .errors import HorizontalViolation, NonGeneric

CONTACT = "contact-xyz"
GEIGES = "geiges-xzw"
ENGEL = "engel-xyzw"
FRAMES = (CONTACT, GEIGES, ENGEL)

TOL_LEG = 1e-6
TOL_DERIV = 1e-8
SEP_MIN = 1e-3
TOL_POS_REL = 1e-7

# positions of (x, slope, height) in each 3-D frame
_XSH = {CONTACT: (0, 1, 2), GEIGES: (0, 2, 1)}
# positions of (x, height) for area integrals
_XZ = {CONTACT: (0, 2), GEIGES: (0, 1), ENGEL: (0, 2)}


@dataclass(frozen=True, eq=False)
class Curve:
    """Closed curve evaluator.

    ``func`` and ``dfunc`` map a 1-D array of parameters in [0, 1) to an
    ``(n, dim)`` array.  ``dfunc=None`` falls back to 4th-order central
    differences.  ``breaks`` lists parameter windows ``(lo, hi, panels)`` that
    carry fine features; quadrature refines there.
    """

    func: Callable[[np.ndarray], np.ndarray]
    dfunc: Callable[[np.ndarray], np.ndarray] | None = None
    frame: str | None = None
    samples: int = 4096
    legendrian: bool = False
    name: str = ""
    breaks: tuple = ()
    meta: dict = field(default_factory=dict)

    def eval(self, t) -> np.ndarray:
        t = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), 1.0)
        return np.asarray(self.func(t), dtype=float)

    def deriv(self, t) -> np.ndarray:
        t = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), 1.0)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(t), dtype=float)
        h = 1e-4
        f = self.func
        return (-f(np.mod(t + 2 * h, 1)) + 8 * f(np.mod(t + h, 1))
                - 8 * f(np.mod(t - h, 1)) + f(np.mod(t - 2 * h, 1))) / (12 * h)

    @property
    def dim(self) -> int:
        return self.eval(0.0).shape[1]

    def grid(self, n: int | None = None) -> np.ndarray:
        n = n or self.samples
        return np.arange(n) / n

    def sample(self, n: int | None = None) -> np.ndarray:
        return self.eval(self.grid(n))

    def diameter(self, n: int | None = None) -> float:
        pts = self.sample(min(n or self.samples, 2048))
        return float(np.max(np.ptp(pts, axis=0)) * np.sqrt(pts.shape[1]))

    def with_(self, **kw) -> "Curve":
        return replace(self, **kw)


Curve3 = Curve
Curve4 = Curve


@dataclass(frozen=True, eq=False)
class CurveFamily:
    """A loop of curves ``theta -> Curve``."""

    curve_at: Callable[[float], Curve]
    theta_samples: int = 64
    name: str = ""

    def __call__(self, theta: float) -> Curve:
        return self.curve_at(float(theta) % 1.0)

    def thetas(self, m: int | None = None) -> np.ndarray:
        m = m or self.theta_samples
        return np.arange(m) / m


@dataclass(frozen=True)
class SelfIntersection:
    t0: float
    t1: float
    point: tuple
    residual: float


# --------------------------------------------------------------------------
# coordinates


def xsh(c: Curve, t):
    """(x, slope, height) and their derivatives for a 3-D Legendrian frame."""
    ix, islope, ih = _XSH[c.frame]
    p, d = c.eval(t), c.deriv(t)
    return p[:, ix], p[:, islope], p[:, ih], d[:, ix], d[:, islope], d[:, ih]


def assemble(frame: str, x, s, h) -> np.ndarray:
    ix, islope, ih = _XSH[frame]
    out = np.empty((len(x), 3))
    out[:, ix], out[:, islope], out[:, ih] = x, s, h
    return out


def as_frame(c: Curve, frame: str) -> Curve:
    """Re-express a Legendrian curve in the other 3-D frame (coordinate swap)."""
    if c.frame == frame:
        return c
    if {c.frame, frame} != {CONTACT, GEIGES}:
        raise ValueError(f"cannot convert {c.frame} to {frame}")
    perm = [0, 2, 1]
    return c.with_(func=lambda t: c.eval(t)[:, perm],
                   dfunc=lambda t: c.deriv(t)[:, perm], frame=frame)


def legendrian_residual(c: Curve, n: int | None = None) -> float:
    t = c.grid(n)
    _, s, _, dx, _, dh = xsh(c, t)
    return float(np.max(np.abs(dh - s * dx)))


def horizontal_residual(c: Curve, n: int | None = None) -> float:
    t = c.grid(n)
    p, d = c.eval(t), c.deriv(t)
    r1 = np.abs(d[:, 1] - p[:, 2] * d[:, 0])
    r2 = np.abs(d[:, 2] - p[:, 3] * d[:, 0])
    return float(max(r1.max(), r2.max()))


def table_curve(t, pts, frame=None, legendrian=False, samples=4096, name="table"):
    """Periodic cubic spline through sampled rows ``(t_i, point_i)``."""
    t = np.asarray(t, float)
    pts = np.asarray(pts, float)
    if not np.allclose(pts[0], pts[-1]) or t[-1] != t[0] + 1.0:
        t = np.append(t, t[0] + 1.0)
        pts = np.vstack([pts, pts[:1]])
    spl = CubicSpline(t, pts, bc_type="periodic", axis=0)
    dspl = spl.derivative()
    t0 = t[0]
    return Curve(lambda u: spl(np.mod(u - t0, 1) + t0),
                 lambda u: dspl(np.mod(u - t0, 1) + t0),
                 frame=frame, samples=samples, legendrian=legendrian, name=name)


# --------------------------------------------------------------------------
# projections


def geiges_project(c: Curve, tol_leg: float = TOL_LEG) -> Curve:
    """Drop y from a horizontal curve in Engel R^4."""
    res = horizontal_residual(c)
    if res > tol_leg:
        raise HorizontalViolation(f"horizontal residual {res:.3g} > {tol_leg:g}")
    base = c.meta.get("base")
    if isinstance(base, Curve) and base.frame == GEIGES:
        return base    # lifts keep their Legendrian curve; avoids integrating y
    keep = [0, 2, 3]
    return Curve(lambda t: c.eval(t)[:, keep], lambda t: c.deriv(t)[:, keep],
                 frame=GEIGES, samples=c.samples, legendrian=True,
                 name=f"geiges({c.name})", breaks=c.breaks)


def front_geiges(c: Curve, tol_leg: float = TOL_LEG):
    """Planar (x, z) trace of a horizontal curve and its cusp parameters."""
    res = horizontal_residual(c)
    if res > tol_leg:
        raise HorizontalViolation(f"horizontal residual {res:.3g} > {tol_leg:g}")
    keep = [0, 2]
    front = Curve(lambda t: c.eval(t)[:, keep], lambda t: c.deriv(t)[:, keep],
                  samples=c.samples, name=f"front({c.name})", breaks=c.breaks)
    return front, cusp_parameters(c)


def cusp_parameters(c: Curve, n: int | None = None) -> list[float]:
    """Zeros of x' located by a sign-change scan and refined with brentq."""
    n = n or c.samples
    t = _scan_grid(c, n)
    dx = c.deriv(t)[:, 0]
    out = []
    for i in np.nonzero(np.sign(dx) != np.sign(np.roll(dx, -1)))[0]:
        a, b = t[i], t[(i + 1) % len(t)]
        if b <= a:
            b += 1.0
        f = lambda u: float(c.deriv(u)[0, 0])
        out.append(float(brentq(f, a, b, xtol=1e-15)) % 1.0)
    return sorted(out)


def _scan_grid(c: Curve, n: int) -> np.ndarray:
    """Uniform grid plus extra points inside the fine-feature windows."""
    t = [np.arange(n) / n]
    for lo, hi, panels in c.breaks:
        t.append(np.linspace(lo, hi, 4 * panels + 1))
    return np.unique(np.mod(np.concatenate(t), 1.0))


# --------------------------------------------------------------------------
# quadrature


@functools.lru_cache(maxsize=None)
def gauss_legendre(k: int = 8):
    x, w = np.polynomial.legendre.leggauss(k)
    return (x + 1) / 2, w / 2


def panel_nodes(breakpoints, k: int = 8):
    """Gauss-Legendre nodes and weights on consecutive panels."""
    b = np.asarray(breakpoints, float)
    lo, width = b[:-1], np.diff(b)
    x, w = gauss_legendre(k)
    nodes = (lo[:, None] + width[:, None] * x[None, :]).ravel()
    weights = (width[:, None] * w[None, :]).ravel()
    return nodes, weights


def _breakpoints(c: Curve, a: float, b: float, n: int) -> np.ndarray:
    m = max(n // 4, 1)
    pts = [np.arange(m + 1) / m]
    for lo, hi, panels in c.breaks:
        pts.append(np.linspace(lo, hi, panels + 1))
    pts = np.concatenate(pts)
    pts = pts[(pts > a) & (pts < b)]
    return np.unique(np.concatenate([[a], pts, [b]]))


def _zx(c: Curve, t):
    ix, iz = _XZ[c.frame or GEIGES]
    return c.eval(t)[:, iz] * c.deriv(t)[:, ix]


def total_area(c: Curve, n: int | None = None) -> float:
    """The integral of z dx around the curve (z = front height).

    Smooth curves use the periodic trapezoid rule on ``n`` samples.  Curves
    with fine-feature windows use composite Gauss-Legendre panels refined in
    those windows.
    """
    n = n or c.samples
    if not c.breaks:
        return float(np.mean(_zx(c, np.arange(n) / n)))
    nodes, weights = panel_nodes(_breakpoints(c, 0.0, 1.0, n))
    return float(np.dot(weights, _zx(c, nodes)))


def segment_area(c: Curve, t0: float, t1: float, n: int | None = None) -> float:
    """The integral of z x' dt over [t0, t1] by composite Gauss-Legendre."""
    if t1 < t0:
        raise ValueError("segment_area needs t0 <= t1")
    if t1 == t0:
        return 0.0
    nodes, weights = panel_nodes(_breakpoints(c, t0, t1, n or c.samples))
    return float(np.dot(weights, _zx(c, nodes)))


# --------------------------------------------------------------------------
# self-intersections


def default_tol_pos(c: Curve) -> float:
    return TOL_POS_REL * c.diameter()


def _cyclic_gap(a, b):
    d = np.abs(a - b) % 1.0
    return np.minimum(d, 1.0 - d)


def _hash_pairs(pts: np.ndarray, radius: float):
    """Index pairs (i < j) of points closer than ``radius``, via a grid hash."""
    cell = 2.0 * radius
    keys = np.floor(pts / cell).astype(np.int64)
    buckets: dict = {}
    for idx, k in enumerate(map(tuple, keys)):
        buckets.setdefault(k, []).append(idx)
    dim = pts.shape[1]
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * dim, indexing="ij")).reshape(dim, -1).T
    out_i, out_j = [], []
    for k, members in buckets.items():
        a = np.asarray(members)
        for off in offsets:
            nb = buckets.get(tuple(np.add(k, off)))
            if nb is None:
                continue
            b = np.asarray(nb)
            ii, jj = np.meshgrid(a, b, indexing="ij")
            ii, jj = ii.ravel(), jj.ravel()
            keep = ii < jj
            ii, jj = ii[keep], jj[keep]
            close = np.linalg.norm(pts[ii] - pts[jj], axis=1) < radius
            out_i.append(ii[close])
            out_j.append(jj[close])
    if not out_i:
        return np.zeros(0, int), np.zeros(0, int)
    return np.concatenate(out_i), np.concatenate(out_j)


def _local_minima(c, t, pts, ii, jj):
    """Keep candidate pairs whose distance is a discrete local minimum."""
    n = len(t)
    d0 = np.linalg.norm(pts[ii] - pts[jj], axis=1)
    keep = np.ones(len(ii), bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            d = np.linalg.norm(pts[(ii + di) % n] - pts[(jj + dj) % n], axis=1)
            keep &= d0 <= d
    return ii[keep], jj[keep]


def batch_gauss_newton(c: Curve, t0, t1, step_cap: float, iters: int = 60,
                       project=None):
    """Gauss-Newton on c(t0) - c(t1) for many starting pairs at once.

    ``project`` optionally maps (points, derivatives) to the coordinates used
    in the residual (e.g. a planar front).  Returns refined pairs and residual
    norms.
    """
    t0 = np.array(t0, float)
    t1 = np.array(t1, float)
    if project is None:
        def project(p, d):
            return p, d
    for _ in range(iters):
        p0, d0 = project(c.eval(t0), c.deriv(t0))
        p1, d1 = project(c.eval(t1), c.deriv(t1))
        r = p0 - p1
        # normal equations of J = [d0, -d1]
        a = np.einsum("ij,ij->i", d0, d0)
        b = -np.einsum("ij,ij->i", d0, d1)
        e = np.einsum("ij,ij->i", d1, d1)
        g0 = np.einsum("ij,ij->i", d0, r)
        g1 = -np.einsum("ij,ij->i", d1, r)
        mu = 1e-14 * (a + e)
        det = (a + mu) * (e + mu) - b * b
        det = np.where(det == 0, np.inf, det)
        s0 = -((e + mu) * g0 - b * g1) / det
        s1 = -((a + mu) * g1 - b * g0) / det
        scale = np.maximum(np.maximum(np.abs(s0), np.abs(s1)) / step_cap, 1.0)
        t0 = t0 + s0 / scale
        t1 = t1 + s1 / scale
        if np.all(np.maximum(np.abs(s0), np.abs(s1)) < 1e-15):
            break
    p0, _ = project(c.eval(t0), c.deriv(t0))
    p1, _ = project(c.eval(t1), c.deriv(t1))
    return np.mod(t0, 1.0), np.mod(t1, 1.0), np.linalg.norm(p0 - p1, axis=1)


def _tangent_sine(c: Curve, t0: float, t1: float) -> float:
    d = c.deriv([t0, t1])
    u, v = d[0] / np.linalg.norm(d[0]), d[1] / np.linalg.norm(d[1])
    return float(np.sqrt(max(0.0, 1.0 - np.dot(u, v) ** 2)))


def _collect(c, pairs, tol_pos, sep_min, check_generic=True):
    out: list[SelfIntersection] = []
    for t0, t1, res in pairs:
        if res >= tol_pos:
            continue
        if t0 > t1:
            t0, t1 = t1, t0
        if t1 - t0 <= sep_min or 1.0 - (t1 - t0) <= sep_min:
            continue
        if any(_cyclic_gap(t0, s.t0) < sep_min and _cyclic_gap(t1, s.t1) < sep_min
               for s in out):
            continue
        if check_generic and _tangent_sine(c, t0, t1) < 1e-6:
            raise NonGeneric(f"parallel branches at t=({t0:.6f}, {t1:.6f})")
        point = tuple(float(v) for v in c.eval(t0)[0])
        out.append(SelfIntersection(float(t0), float(t1), point, float(res)))
    return sorted(out, key=lambda s: (s.t0, s.t1))


def find_self_intersections(c: Curve, n: int | None = None, tol_pos: float | None = None,
                            sep_min: float = SEP_MIN) -> list[SelfIntersection]:
    """Double points of a closed curve.

    Candidates come from a spatial hash of the sample grid; each candidate is
    refined by Gauss-Newton on c(t0) - c(t1).
    """
    n = n or c.samples
    tol_pos = default_tol_pos(c) if tol_pos is None else tol_pos
    t = _scan_grid(c, n)
    pts = c.eval(t)
    seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    radius = 1.01 * seg.max()
    ii, jj = _hash_pairs(pts, radius)
    far = _cyclic_gap(t[ii], t[jj]) > sep_min
    ii, jj = _local_minima(c, t, pts, ii[far], jj[far])
    step_cap = 4.0 * float(np.max(np.diff(np.append(t, t[0] + 1))))
    if len(ii) == 0:
        return []
    a, b, res = batch_gauss_newton(c, t[ii], t[jj], step_cap)
    return _collect(c, zip(a, b, res), tol_pos, sep_min)


def brute_force_self_intersections(c: Curve, n: int = 4096, tol_pos: float | None = None,
                                   sep_min: float = SEP_MIN) -> list[SelfIntersection]:
    """O(n^2) reference scan: all discrete local minima, refined by least squares."""
    tol_pos = default_tol_pos(c) if tol_pos is None else tol_pos
    t = _scan_grid(c, n)
    m = len(t)
    pts = c.eval(t)
    seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    radius = 1.01 * seg.max()
    cand = []
    for start in range(0, m, 256):
        rows = np.arange(start, min(start + 256, m))
        d = np.linalg.norm(pts[rows, None, :] - pts[None, :, :], axis=2)
        i, j = np.nonzero(d < radius)
        keep = (i + start < j)
        cand.append((i[keep] + start, j[keep]))
    ii = np.concatenate([a for a, _ in cand])
    jj = np.concatenate([b for _, b in cand])
    far = _cyclic_gap(t[ii], t[jj]) > sep_min
    ii, jj = _local_minima(c, t, pts, ii[far], jj[far])

    def fun(u):
        r = c.eval(u)
        return r[0] - r[1]

    def jac(u):
        d = c.deriv(u)
        return np.stack([d[0], -d[1]], axis=1)

    pairs = []
    for i, j in zip(ii, jj):
        sol = least_squares(fun, [t[i], t[j]], jac=jac, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        pairs.append((sol.x[0] % 1.0, sol.x[1] % 1.0, float(np.linalg.norm(fun(sol.x)))))
    return _collect(c, pairs, tol_pos, sep_min, check_generic=False)
