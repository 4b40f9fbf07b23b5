"""Horizontal lifts, the area function at self-tangencies and local moves.

Legendrian curves are handled in the Geiges frame (x, z, w): front height z,
slope w.  A horizontal lift adds y(t) = y0 + int_0^t z x' dt, which closes up
exactly when the total area vanishes.  Two branches of a Legendrian immersion
that meet in R^3 are tangent in the front; the lift separates them unless the
area between the two visits vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, partial

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.optimize import brentq, root
from scipy.special import roots_jacobi
from scipy.spatial import cKDTree

from .curves import (CONTACT, ENGEL, GEIGES, Curve, CurveFamily, SelfIntersection,
                     _breakpoints, _cyclic_gap, as_frame, cusp_parameters,
                     find_self_intersections, geiges_project, segment_area, total_area, xsh)
from .errors import (AreaObstruction, DegenerateTangency, NotRegular, WindowOverlap)
from .families import TAU, polynomial_front
from .invariants import front_diagram
from .local import (Cumulative, Window, even_profile, modify, odd_profile, shifted,
                    solve_coefficients)

TOL_AREA = 1e-8


# --------------------------------------------------------------------------
# area function


@dataclass(frozen=True)
class TangencyReport:
    intersection: SelfIntersection
    epsilon_A: float
    branch_order: tuple  # (t_lower, t_upper)
    framing_sign: int
    delta: int


def _geiges(c: Curve) -> Curve:
    if c.frame == ENGEL:
        return geiges_project(c)
    return as_frame(c, GEIGES)


def _height_at_x(c: Curve, t0: float, x_target: float, iters: int = 50) -> float:
    """Front height of the branch through t0 at abscissa x_target (Newton in t)."""
    t = t0
    for _ in range(iters):
        x, _, h, dx, _, _ = xsh(c, [t])
        step = (x[0] - x_target) / dx[0]
        t -= step
        if abs(step) < 1e-15:
            break
    return float(xsh(c, [t])[2][0])


def _offset(c: Curve, ts) -> float:
    """x-offset for comparing branches: an eighth of the x-monotone window."""
    cusps = np.array(cusp_parameters(c))
    span = []
    for t in ts:
        gap = 0.05 if len(cusps) == 0 else min(0.05, float(np.min(_cyclic_gap(cusps, t))))
        a, b = xsh(c, [t - 0.5 * gap, t + 0.5 * gap])[0]
        x0 = xsh(c, [t])[0][0]
        span.append(min(abs(a - x0), abs(b - x0)))
    return min(span) / 4.0


def area_at_tangency(c: Curve, s: SelfIntersection, offset: float | None = None) -> TangencyReport:
    """epsilon_A = delta * int_{t0}^{t1} z x' dt at a double point of c.

    delta = +1 when the branch through t0 is the lower one in the front,
    i.e. integration starts on the lower branch and follows the orientation.
    The framing of the plane field by the two tangent lines (lower first, each
    pointed towards increasing x) is computed separately from derivative data;
    it is positive exactly when the lower/upper decision is consistent.
    """
    g = _geiges(c)
    ts = (s.t0, s.t1)
    x, w, z, dx, dw, dz = xsh(g, list(ts))
    scale = g.diameter()
    if np.min(np.abs(dx)) < 1e-9 * scale:
        raise DegenerateTangency("double point at a cusp of the front")
    hx = offset if offset is not None else _offset(g, ts)
    xm = float(np.mean(x))
    means = [0.5 * (_height_at_x(g, t, xm - hx) + _height_at_x(g, t, xm + hx)) for t in ts]
    if abs(means[0] - means[1]) < 1e-12 * max(scale, 1.0):
        raise DegenerateTangency("branches cannot be ordered at the chosen offset")
    lower = 0 if means[0] < means[1] else 1
    delta = 1 if lower == 0 else -1
    eps = delta * segment_area(g, s.t0, s.t1)
    e = np.stack([dx, dw], axis=1) * np.sign(dx)[:, None]
    lo_v, up_v = e[lower], e[1 - lower]
    framing = int(np.sign(lo_v[0] * up_v[1] - lo_v[1] * up_v[0]))
    return TangencyReport(s, float(eps), (ts[lower], ts[1 - lower]), framing, delta)


def tangency_reports(c: Curve, n: int | None = None) -> list[TangencyReport]:
    g = _geiges(c)
    return [area_at_tangency(g, s) for s in find_self_intersections(g, n)]


# --------------------------------------------------------------------------
# lifting


def lift_horizontal(c: Curve, y0: float = 0.0, tol_area: float = TOL_AREA,
                    n: int | None = None) -> Curve:
    """Horizontal curve (x, y, z, w) over a zero-area Legendrian curve.

    ``meta["embedded"]`` is True iff every double point of c has
    |epsilon_A| > tol_area; ``meta["tangencies"]`` holds the reports.
    """
    g = _geiges(c)
    area = total_area(g, n)
    if abs(area) >= tol_area:
        raise AreaObstruction(f"total area {area:.6g} is not zero")

    def zx(t):
        p, d = g.eval(t), g.deriv(t)
        return p[:, 1] * d[:, 0]

    cum = Cumulative(zx, 0.0, 1.0, _breakpoints(g, 0.0, 1.0, n or g.samples))

    def ev(t):
        t = np.mod(np.atleast_1d(np.asarray(t, float)), 1.0)
        p = g.eval(t)
        return np.stack([p[:, 0], y0 + cum(t), p[:, 1], p[:, 2]], axis=1)

    def dev(t):
        p, d = g.eval(t), g.deriv(t)
        return np.stack([d[:, 0], p[:, 1] * d[:, 0], d[:, 1], d[:, 2]], axis=1)

    reports = tangency_reports(g, n)
    meta = dict(g.meta)
    meta.update(embedded=all(abs(r.epsilon_A) > tol_area for r in reports),
                tangencies=tuple(reports), base=g)
    return Curve(ev, dev, frame=ENGEL, samples=g.samples, legendrian=True,
                 name=f"lift({g.name})", breaks=g.breaks, meta=meta)


# --------------------------------------------------------------------------
# engineered tangencies and the area twist


def _weight_moment(P: Polynomial, hi: float = 1.0) -> float:
    """Integral of (1 - c^2)^(3/2) P(c) over [-1, hi]."""
    if hi >= 1.0:
        xg, wg = roots_jacobi(max(4, P.degree() // 2 + 2), 1.5, 1.5)
        return float(wg @ P(xg))
    return quad(lambda c: (1 - c * c) ** 1.5 * P(c), -1.0, hi, epsabs=1e-15, epsrel=1e-13)[0]


@lru_cache(maxsize=64)
def _tangent_basis(c0: float):
    """Polynomials R, B1, B2 for a front with a self-tangency over x = c0.

    All three have zero weighted mean (zero total area).  R has a double
    root at c0 and zero area on the tangency loop; B1 is 1 at c0 and lifts
    the tangency off; B2 has a double root at c0 and unit loop area.
    """
    sq = Polynomial([-c0, 1.0]) ** 2
    basis = [sq, sq * Polynomial([0, 1]), sq * Polynomial([0, 0, 1])]
    M = np.array([[_weight_moment(b) for b in basis],
                  [_weight_moment(b, c0) for b in basis],
                  [b.deriv(2)(c0) / 2 for b in basis]])
    co = np.linalg.solve(M, [0.0, 0.0, 1.0])
    R = sum(k * b for k, b in zip(co, basis))
    B1 = Polynomial([1.0]) - _weight_moment(Polynomial([1.0])) / _weight_moment(sq) * sq
    B2 = sq * Polynomial([-_weight_moment(basis[1]) / _weight_moment(sq), 1.0])
    return R, B1, B2 / _weight_moment(B2, c0)


def tangent_front(c0: float = 0.0, q: float = 0.0, p: float = 0.0, a: float = 0.5,
                  samples: int = 4096) -> Curve:
    """Zero-area two-cusp front with a same-direction tangency over x = c0.

    At p = 0 the strands touch at x = c0 and the tangency loop encloses area
    of magnitude 2 a |q|; p > 0 separates the strands, p < 0 turns the
    tangency into two crossings.
    """
    R, B1, B2 = _tangent_basis(float(c0))
    P = R + p * B1 + q * B2
    return polynomial_front(P.coef, a, samples=samples,
                            name=f"tangent_front({c0:g},{q:g},{p:g},{a:g})")


def area_twist_front(rho: float, theta: float, a: float = 0.5, r_p: float = 0.05,
                     r_q: float = 0.05) -> Curve:
    """Point of the standard capping disk of the area twist loop.

    The strict Legendrian immersions form the diameter theta in {1/4, 3/4};
    the center is the only one whose tangency loop has zero area.
    """
    return tangent_front(0.0, q=r_q * rho * np.sin(TAU * theta),
                         p=r_p * rho * np.cos(TAU * theta), a=a)


def area_twist(theta_samples: int = 64, a: float = 0.5, r_p: float = 0.05,
               r_q: float = 0.05) -> CurveFamily:
    """The area twist loop of horizontal unknots (boundary of the capping disk)."""
    def at(theta):
        return lift_horizontal(area_twist_front(1.0, theta, a, r_p, r_q))
    return CurveFamily(at, theta_samples, name="area_twist")


def tangency_suite(seed: int = 0, n: int = 10) -> list[tuple[Curve, bool]]:
    """Seeded zero-area fronts with one tangency; every third has zero loop area.

    Returns (front, expected_embedded) pairs.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        c0 = float(rng.uniform(-0.3, 0.3))
        a = float(rng.uniform(0.3, 0.7))
        R, _, B2 = _tangent_basis(c0)
        qmax = 0.5 * min(abs(R(1)), abs(R(-1))) / max(abs(B2(1)), abs(B2(-1)))
        q = 0.0 if i % 3 == 0 else float(rng.choice([-1, 1]) * rng.uniform(0.2, 1.0) * qmax)
        out.append((tangent_front(c0, q, 0.0, a), q != 0.0))
    return out


# --------------------------------------------------------------------------
# regular windows


def _strand(c: Curve, lo: float, hi: float, n: int = 512):
    t = np.linspace(lo, hi, n)
    x, _, h, dx, _, _ = xsh(_flat(c), t)
    return t, x, h, dx


def _flat(c: Curve) -> Curve:
    return geiges_project(c) if c.frame == ENGEL else c


def check_window(c: Curve, lo: float, hi: float):
    """Raise NotRegular unless [lo, hi] is an x-monotone strand with no crossings."""
    if not (0.0 < lo < hi < 1.0):
        raise NotRegular(f"window [{lo:.4f}, {hi:.4f}] leaves the parameter circle")
    g = _flat(c)
    t, x, h, dx = _strand(g, lo, hi)
    if np.any(np.sign(dx) != np.sign(dx[0])) or np.min(np.abs(dx)) == 0:
        raise NotRegular("window contains a cusp")
    order = np.argsort(x)
    xs, hs = x[order], h[order]
    margin = 0.25 * (hi - lo)
    to = _scan(g)
    to = to[_cyclic_gap(to, 0.5 * (lo + hi)) > 0.5 * (hi - lo) + margin]
    xo, _, ho, *_ = xsh(g, to)
    inside = (xo > xs[0]) & (xo < xs[-1])
    diff = ho - np.interp(xo, xs, hs)
    flip = inside & np.roll(inside, -1) & (np.sign(diff) != np.sign(np.roll(diff, -1)))
    # consecutive samples only (no wrap through the removed window)
    flip &= np.abs(np.roll(to, -1) - to) < 0.25
    if np.any(flip):
        raise NotRegular("window contains a front crossing")


def _scan(c: Curve) -> np.ndarray:
    return np.arange(c.samples) / c.samples


def clearance(c: Curve, lo: float, hi: float) -> float:
    """Distance in R^3 from the window strand to the rest of the curve."""
    g = _flat(c)
    t = np.linspace(lo, hi, 256)
    to = _scan(g)
    to = to[_cyclic_gap(to, 0.5 * (lo + hi)) > (hi - lo)]
    if len(to) == 0:
        return np.inf
    d, _ = cKDTree(g.eval(to)).query(g.eval(t))
    return float(d.min())


def _used(c: Curve):
    return tuple(c.meta.get("windows", ()))


def auto_location(c: Curve, eps: float, avoid=()) -> float:
    """A regular point far from the rest of the curve and from earlier windows."""
    g = _flat(c)
    best, best_score = None, -np.inf
    busy = list(_used(c)) + [(a - eps, a + eps) for a in avoid]
    for p in np.linspace(0.03, 0.97, 95):
        lo, hi = p - eps, p + eps
        if lo <= 0 or hi >= 1:
            continue
        if any(lo < b + eps and a - eps < hi for a, b in busy):
            continue
        try:
            check_window(g, lo, hi)
        except NotRegular:
            continue
        dx = abs(float(g.deriv(p)[0, 0]))
        score = min(clearance(g, lo, hi), dx * eps)
        if score > best_score:
            best, best_score = float(p), score
    if best is None:
        raise NotRegular("no regular window found")
    return best


# --------------------------------------------------------------------------
# area lobes


def add_area_lobe(c: Curve, p: float, A: float, N: int = 1, eps: float = 0.1,
                  panels: int = 64) -> Curve:
    """Insert N Reidemeister-I lobes of front area A/N each near parameter p.

    Each lobe folds the parameter back over a fixed stretch of the strand
    (so the lobe retraces the original point set) and bends the slope by an
    amount proportional to A/N; the Geiges deviation is O(|A|/N).  Nothing
    changes outside [p - eps, p + eps].  For Engel curves y past the window
    shifts by A.  A = 0 returns c itself.
    """
    check_window(c, p - eps, p + eps)
    if A == 0:
        return c
    fold = 0.8 * eps  # parameter length retraced by every lobe
    lo, hi = p - fold / 32, p + fold / 32
    win = Window(lo, hi)
    width = 2.0 / N
    P = partial(odd_profile, k=5)
    S = partial(odd_profile, k=2)
    E = shifted(partial(even_profile, k=2), 0.75, 0.25)  # on the last strand only
    dx_parts, shapes, coeffs = [], [], []
    for k in range(N):
        sub = Window(lo + k * (hi - lo) / N, lo + (k + 1) * (hi - lo) / N)
        co = solve_coefficients(c, sub, P, [S, E], area=A / N, panels=panels,
                                retrace=fold)
        center = -1.0 + (k + 0.5) * width
        dx_parts.append(shifted(P, center, width / 2))
        shapes += [shifted(S, center, width / 2), shifted(E, center, width / 2)]
        coeffs += list(co)

    def dx_profile(u):
        v = dv = 0.0
        for f in dx_parts:
            a, b = f(u)
            v, dv = v + a, dv + b
        return v, dv

    return modify(c, win, dx_profile, shapes, coeffs, panels=panels * N, retrace=fold,
                  name=f"lobe({c.name})")


def _rescale(f, factor):
    def g(u):
        v, dv = f(u)
        return v * factor, dv * factor
    return g


def add_area_pair(c: Curve, p: float, n: float, A: float, N: int = 1,
                  eps: float = 0.1) -> Curve:
    """Lobes of area +A at p and -A at n: total area is unchanged."""
    if abs(p - n) < 2 * eps:
        raise WindowOverlap(f"windows around {p:.4f} and {n:.4f} overlap")
    for w in _used(c):
        for q in (p, n):
            if q - eps < w[1] and w[0] < q + eps:
                raise WindowOverlap(f"window around {q:.4f} overlaps an earlier window")
    check_window(c, p - eps, p + eps)
    check_window(c, n - eps, n + eps)
    return add_area_lobe(add_area_lobe(c, p, A, N, eps), n, -A, N, eps)


def geiges_deviation(a: Curve, b: Curve, lo: float, hi: float, n: int = 20000) -> float:
    """Hausdorff distance between the Geiges images of a and b over [lo, hi].

    The window is widened by its own length on both sides so that retraced
    stretches are compared with the original strand.
    """
    pad = hi - lo
    t = np.linspace(max(lo - pad, 0.0), min(hi + pad, 1.0), n)
    pa, pb = _flat(a).eval(t), _flat(b).eval(t)
    d1, _ = cKDTree(pa).query(pb)
    d2, _ = cKDTree(pb).query(pa)
    return float(max(d1.max(), d2.max()))


# --------------------------------------------------------------------------
# stabilization


def stabilize(c: Curve, sign: int = 1, loc: float | None = None, eps: float = 0.03,
              amp: float = 0.5) -> Curve:
    """Add a zigzag (two cusps) to a regular strand: tb - 1, rot + sign."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    g = _flat(c) if c.frame != CONTACT else c
    loc = auto_location(g, eps) if loc is None else loc
    lo, hi = loc - eps, loc + eps
    check_window(g, lo, hi)
    win = Window(lo, hi)
    dx0 = float(xsh(g, [loc])[3][0])
    ell = 2.0 * dx0 * win.half
    P = _rescale(partial(odd_profile, k=5), ell)
    shapes = [partial(even_profile, k=8), partial(even_profile, k=2)]
    sigma = sign * np.sign(dx0) * amp
    co = solve_coefficients(c, win, P, shapes, fixed={0: sigma})
    tag = "+" if sign > 0 else "-"
    return modify(c, win, P, shapes, co, name=f"stab{tag}({c.name})")


# --------------------------------------------------------------------------
# double stabilization


@dataclass(frozen=True)
class DoubleStabilization:
    curve: Curve
    report: TangencyReport
    tangency_curve: Curve
    family: CurveFamily
    u_star: float
    rho_star: float
    meta: dict = field(default_factory=dict)


class _Mushroom:
    """The local model: a fish of area a followed by a hump on its last strand.

    Strands inside the window, in time order: A (up to the first cusp), B
    (between the cusps), C (after the second cusp).  The window retraces the
    base strand (a parameter fold), so crossings and tangencies depend only
    on the slope offsets, which are linear in the fish amplitude and in the
    hump height rho.  Raising the hump moves C past the first cusp (a
    Reidemeister II move over the cusp) and then through a same-direction
    tangency with A, after which the two positive A-C crossings are gone and
    one negative B-C crossing remains.
    """

    def __init__(self, c: Curve, loc: float, a: float, eps: float, panels: int = 256,
                 hump=(0.15, 0.3), fold=2.0):
        self.c, self.panels = c, panels
        self.win = win = Window(loc - eps, loc + eps)
        self.fold = fold * win.half
        self.P = partial(odd_profile, k=5)
        self.S = partial(odd_profile, k=2)
        self.E = partial(even_profile, k=2)
        self.sigma = solve_coefficients(c, win, self.P, [self.S, self.E], area=a,
                                        panels=panels, retrace=self.fold)[0]
        fish = _flat(self.build_fish(1.0))
        cus = [t for t in cusp_parameters(fish) if win.lo < t < win.hi]
        if len(cus) != 2:
            raise NotRegular("fish did not form two cusps")
        self.cusps = cus
        x1 = float(fish.eval(cus[0])[0, 0])
        uu = np.linspace(win.u(cus[1]), 1.0, 4001)
        xx = fish.eval(win.mid + win.half * uu)[:, 0]
        ustar = float(uu[np.argmin(np.abs(xx - x1))])
        self.R = shifted(partial(odd_profile, k=3), ustar + hump[0], hump[1])

    def _make(self, fold, fixed, shapes):
        co = solve_coefficients(self.c, self.win, self.P, shapes, fixed=fixed,
                                panels=self.panels, retrace=fold)
        return modify(self.c, self.win, self.P, shapes, co, panels=self.panels,
                      retrace=fold)

    def build_fish(self, scale: float) -> Curve:
        return self._make(scale * self.fold, {0: scale * self.sigma}, [self.S, self.E])

    def build(self, rho: float) -> Curve:
        return self._make(self.fold, {0: self.sigma, 1: rho}, [self.S, self.R, self.E])

    def gap(self, rho: float, n: int = 3000):
        """Height of C minus height of A over their common x-range."""
        g = _flat(self.build(rho))
        lo, hi = self.win.lo, self.win.hi
        c1, c2 = self.cusps
        ta, tc = np.linspace(lo, c1, n), np.linspace(c2, hi, n)
        xa, _, ha, *_ = xsh(g, ta)
        xc, _, hc, *_ = xsh(g, tc)
        ia, ic = np.argsort(xa), np.argsort(xc)
        xa, ha, xc, hc = xa[ia], ha[ia], xc[ic], hc[ic]
        left, right = max(xa[0], xc[0]), min(xa[-1], xc[-1])
        xs = np.linspace(left, right, n)
        return xs, np.interp(xs, xc, hc) - np.interp(xs, xa, ha)

    def residual(self, v):
        ta, tc, rho = v
        g = _flat(self.build(rho))
        p = g.eval([ta, tc])
        return p[0] - p[1]


def _ds_tangency(m: _Mushroom, rho_max=None):
    """Locate the tangency slice of a mushroom model by raising the hump."""
    rho_max = rho_max or 8.0 * abs(m.sigma)
    grid = np.linspace(0.0, rho_max, 33)
    clear, prev = None, grid[0]
    for r in grid:
        _, d = m.gap(r)
        if d.min() > 0 or d.max() < 0:
            clear = (r, float(np.sign(d.min())))
            break
        prev = r
    if clear is None:
        raise NotRegular("hump never separates the strands")
    r_hi, side = clear

    def G(r):
        return float(np.min(side * m.gap(r)[1]))

    rho0 = brentq(G, prev, r_hi, xtol=1e-10)
    xs, d = m.gap(rho0)
    i = int(np.argmin(side * d))
    if i in (0, len(xs) - 1):
        raise NotRegular("strands separate through a cusp, not a tangency")
    g0 = _flat(m.build(rho0))
    lo, hi = m.win.lo, m.win.hi
    c1, c2 = m.cusps
    ta = brentq(lambda t: float(xsh(g0, [t])[0][0]) - xs[i], lo, c1)
    tc = brentq(lambda t: float(xsh(g0, [t])[0][0]) - xs[i], c2, hi)
    sol = root(m.residual, [ta, tc, rho0], method="hybr", options={"xtol": 1e-14})
    ta, tc, rho_star = sol.x
    tangency = m.build(rho_star)
    res = float(np.linalg.norm(m.residual(sol.x)))
    point = tuple(float(v) for v in tangency.eval(ta)[0])
    inter = SelfIntersection(float(min(ta, tc)), float(max(ta, tc)), point, res)
    return tangency, area_at_tangency(tangency, inter), float(rho_star), float(r_hi)


def double_stabilization(c: Curve, loc: float | None = None, a: float = 2e-4,
                         eps: float = 0.05, compensate: float | None = None,
                         rho_max: float | None = None, hump=(0.15, 0.3),
                         fold: float = 2.0) -> DoubleStabilization:
    """Insert the mushroom: two extra cusps, tb - 2, rot unchanged.

    The one-parameter family u in [0, 1] first grows a fish of area a
    (u <= 1/2) and then raises a hump on its last strand.  The fish is
    sized so that the tangency loop encloses area a.  Exactly one slice,
    u_star, is a strict immersion: a same-direction self-tangency of the
    front; its area function is reported.  For Engel curves a compensating
    lobe (at ``compensate`` or an automatic point) restores zero total area
    before lifting again.
    """
    if a <= 0:
        raise ValueError("area a must be positive")
    engel = c.frame == ENGEL
    base = geiges_project(c) if engel else c
    loc = auto_location(base, eps) if loc is None else loc
    check_window(base, loc - eps, loc + eps)
    # the tangency loop encloses a fixed fraction of the fish area (the model
    # is linear in its amplitudes), so measure it once and rescale the fish
    m = _Mushroom(base, loc, a, eps, hump=hump, fold=fold)
    tangency, report, rho_star, r_hi = _ds_tangency(m, rho_max)
    ratio = abs(report.epsilon_A) / a
    if ratio < 1.0:
        m = _Mushroom(base, loc, a / ratio, eps, hump=hump, fold=fold)
        tangency, report, rho_star, r_hi = _ds_tangency(m, rho_max)
    lo, hi = m.win.lo, m.win.hi
    rho_final = rho_star + max(0.5 * (r_hi - rho_star), 0.25 * abs(rho_star))
    final = m.build(rho_final)
    if len(front_diagram(final).crossings) != len(front_diagram(base).crossings) + 1:
        raise NotRegular("mushroom meets other strands; use a smaller area or window")

    def slice_at(u):
        if u <= 0.5:
            return m.build_fish(2.0 * u) if u > 0 else base
        return m.build((2.0 * u - 1.0) * rho_final)

    family = CurveFamily(slice_at, name=f"ds({c.name})")
    u_star = 0.5 + 0.5 * rho_star / rho_final
    meta = {"loc": loc, "window": (lo, hi), "cusps": tuple(m.cusps), "rho_final": rho_final,
            "sigma": float(m.sigma)}
    if engel:
        shift = total_area(final) - total_area(base)
        q = auto_location(final, eps, avoid=[loc]) if compensate is None else compensate
        final = add_area_lobe(final, q, -shift, eps=eps)
        final = lift_horizontal(final, y0=float(c.eval(0.0)[0, 1]))
        meta["compensate"] = q
    return DoubleStabilization(final, report, tangency, family, float(u_star),
                               float(rho_star), meta)
