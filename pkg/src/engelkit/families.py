"""Builtin curves with closed-form evaluators."""

from __future__ import annotations

from dataclasses import replace
from math import gcd

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.polynomial import polyval

from .curves import CONTACT, GEIGES, Curve, assemble
from .errors import BadParameters

TAU = 2 * np.pi


def _legendrian(frame, x, s, h, dx, ds, dh, **kw):
    return Curve(lambda t: assemble(frame, *(f(t) for f in (x, s, h))),
                 lambda t: assemble(frame, *(f(t) for f in (dx, ds, dh))),
                 frame=frame, legendrian=True, **kw)


def unknot_front(a: float = 0.5, frame: str = GEIGES, samples: int = 4096) -> Curve:
    """Two-cusp Legendrian unknot: front x = cos, z = a sin^3 (tb -1, rot 0)."""
    def x(t): return np.cos(TAU * t)
    def s(t): return -3 * a * np.sin(TAU * t) * np.cos(TAU * t)
    def h(t): return a * np.sin(TAU * t) ** 3
    def dx(t): return -TAU * np.sin(TAU * t)
    def ds(t): return -3 * a * TAU * np.cos(2 * TAU * t)
    def dh(t): return 3 * a * TAU * np.sin(TAU * t) ** 2 * np.cos(TAU * t)
    return _legendrian(frame, x, s, h, dx, ds, dh, samples=samples,
                       name=f"unknot_front({a:g})")


def polynomial_front(coef, a: float = 0.5, frame: str = GEIGES, samples: int = 4096,
                     name: str | None = None) -> Curve:
    """Two-cusp front x = cos u, h = a sin^3(u) P(cos u) for a polynomial P.

    The two strands over x = c differ in height by 2a(1 - c^2)^(3/2) P(c), so
    front crossings sit at the roots of P and a double root is a self-tangency.
    The total area is -2a times the integral of (1 - c^2)^(3/2) P(c) over
    [-1, 1].  P = 1 is the standard unknot.
    """
    P = Polynomial(coef)
    c0, c1, c2 = P.coef, P.deriv().coef, P.deriv(2).coef

    def x(t): return np.cos(TAU * t)
    def dx(t): return -TAU * np.sin(TAU * t)

    def s(t):
        c, sn = np.cos(TAU * t), np.sin(TAU * t)
        return a * (sn ** 3 * polyval(c, c1) - 3 * sn * c * polyval(c, c0))

    def ds(t):
        c, sn = np.cos(TAU * t), np.sin(TAU * t)
        return TAU * a * (6 * sn ** 2 * c * polyval(c, c1) - sn ** 4 * polyval(c, c2)
                          + 3 * (sn ** 2 - c ** 2) * polyval(c, c0))

    def h(t): return a * np.sin(TAU * t) ** 3 * polyval(np.cos(TAU * t), c0)
    def dh(t): return s(t) * dx(t)
    label = ",".join(f"{v:g}" for v in P.coef)
    return _legendrian(frame, x, s, h, dx, ds, dh, samples=samples,
                       name=name or f"polynomial_front([{label}],{a:g})")


def unknot_horizontal(a: float = 0.5, samples: int = 4096) -> Curve:
    """Horizontal unknot: the lift of the zero-area front P(c) = 1/6 - c^2.

    Its front has two cusps and two crossings (tb -3, rot 0).
    """
    from .lifts import lift_horizontal
    front = polynomial_front([1 / 6, 0, -1], a, samples=samples)
    return replace(lift_horizontal(front), name="unknot_horizontal")


def figure_eight(a: float = 0.6, b: float = 0.25, c: float = 0.15,
                 frame: str = GEIGES, samples: int = 4096) -> Curve:
    """Legendrian immersion with one transverse double point at t = 0, 1/2.

    Front x = sin(2 pi t); the slope is chosen so both visits of x = 0 have
    slope 0 and equal height, while the front curvatures differ.
    """
    def x(t): return np.sin(TAU * t)
    def dx(t): return TAU * np.cos(TAU * t)

    def s(t):
        u = TAU * t
        return (a * np.sin(u) + b * (np.cos(3 * u) - np.cos(5 * u))
                + c * (np.sin(2 * u) - 2.5 * np.sin(4 * u)))

    def ds(t):
        u = TAU * t
        return TAU * (a * np.cos(u) + b * (-3 * np.sin(3 * u) + 5 * np.sin(5 * u))
                      + c * (2 * np.cos(2 * u) - 10 * np.cos(4 * u)))

    def h(t):
        u = TAU * t
        return (a * np.sin(u) ** 2 / 2
                + b / 2 * (np.sin(2 * u) / 2 - np.sin(6 * u) / 6)
                + c / 2 * (-np.cos(u) + 0.5 * np.cos(3 * u) + 0.5 * np.cos(5 * u)))

    def dh(t): return s(t) * dx(t)
    return _legendrian(frame, x, s, h, dx, ds, dh, samples=samples,
                       name=f"figure_eight({a:g},{b:g},{c:g})")


def _smoothstep(u):
    """C^3 step from 0 to 1 on [0, 1] with its first two derivatives."""
    u = np.clip(u, 0.0, 1.0)
    f = u ** 4 * (35 - 84 * u + 70 * u ** 2 - 20 * u ** 3)
    f1 = 140 * u ** 3 * (1 - u) ** 3
    f2 = 420 * u ** 2 * (1 - u) ** 2 * (1 - 2 * u)
    return f, f1, f2


def _braid_schedule(p: int, q: int):
    """Level steps of each of the p turns through the q braid sub-windows.

    Word (s_1 ... s_{p-1})^q: in each sub-window the bottom strand climbs to
    the top and every other strand drops one level.
    """
    start, steps = [], []
    level = 0
    for _ in range(p):
        start.append(level)
        row = []
        for _ in range(q):
            if level == 0:
                row.append(p - 1)
                level = p - 1
            else:
                row.append(-1)
                level -= 1
        steps.append(row)
    if level != 0:
        raise BadParameters("braid closure is not a knot")
    return np.array(start, float), np.array(steps, float)


def torus_knot(p: int, q: int, a: float = 0.5, rho: float = 0.06, kappa: float = 0.6,
               width: float = 1.2, frame: str = GEIGES, samples: int = 8192) -> Curve:
    """Legendrian positive (p, q) torus knot as a front of p nested eyes.

    Level l eye: x = R(l) cos(theta), z = A(l) sin(theta)^3 with R, A increasing.
    On the upper arc the levels are permuted by the braid (s_1...s_{p-1})^q,
    giving q(p-1) positive crossings and 2p cusps, so tb = pq - p - q, rot = 0.
    """
    if p < 1 or q < 1 or gcd(p, q) != 1:
        raise BadParameters(f"torus_knot needs coprime p, q >= 1, got ({p}, {q})")
    if p == 1:
        return unknot_front(a, frame, samples)
    start, steps = _braid_schedule(p, q)
    w = width / q
    lo = np.pi / 2 - width / 2

    def R(lam): return 1.0 + rho * lam
    def A(lam): return a * (1.0 + kappa * lam)

    def level(t):
        big = p * np.asarray(t)
        j = np.minimum(np.floor(big).astype(int), p - 1)
        th = TAU * (big - j)
        lam = start[j].copy()
        lt = np.zeros_like(th)
        ltt = np.zeros_like(th)
        for k in range(q):
            f, f1, f2 = _smoothstep((th - lo - k * w) / w)
            lam += steps[j, k] * f
            lt += steps[j, k] * f1 / w
            ltt += steps[j, k] * f2 / w ** 2
        return th, lam, lt, ltt

    def parts(t):
        th, lam, lt, ltt = level(t)
        sn, cs = np.sin(th), np.cos(th)
        r, r1, aa, a1 = R(lam), rho, A(lam), a * kappa
        x = r * cs
        h = aa * sn ** 3
        num = a1 * lt * sn ** 3 + 3 * aa * sn ** 2 * cs
        den = r1 * lt * cs - r * sn
        num_t = (a1 * ltt * sn ** 3 + 6 * a1 * lt * sn ** 2 * cs
                 + 3 * aa * (2 * sn * cs ** 2 - sn ** 3))
        den_t = r1 * ltt * cs - 2 * r1 * lt * sn - r * cs
        # away from the braid window num/den reduces to -3 (A/R) sin cos
        quiet = np.abs(lt) + np.abs(ltt) == 0
        safe = np.where(quiet, -1.0, den)
        s = np.where(quiet, -3 * aa / r * sn * cs, num / safe)
        s_t = np.where(quiet, -3 * aa / r * np.cos(2 * th),
                       (num_t * safe - num * den_t) / safe ** 2)
        speed = TAU * p
        return x, s, h, den * speed, s_t * speed, num * speed

    def ev(t):
        x, s, h, *_ = parts(t)
        return assemble(frame, x, s, h)

    def dev(t):
        _, _, _, dx, ds, dh = parts(t)
        return assemble(frame, dx, ds, dh)

    return Curve(ev, dev, frame=frame, samples=samples, legendrian=True,
                 name=f"torus_knot({p},{q})", meta={"p": p, "q": q})


def stereographic_torus_knot(p: int, q: int, samples: int = 4096) -> Curve:
    """The standard smooth (p, q) torus knot on the torus of radii 2 and 1."""
    if gcd(p, q) != 1:
        raise BadParameters(f"gcd({p}, {q}) != 1")

    def ev(t):
        u, v = TAU * p * t, TAU * q * t
        r = np.cos(v) + 2
        return np.stack([r * np.cos(u), r * np.sin(u), -np.sin(v)], axis=1)

    def dev(t):
        u, v = TAU * p * t, TAU * q * t
        r, dr = np.cos(v) + 2, -TAU * q * np.sin(v)
        return np.stack([dr * np.cos(u) - r * TAU * p * np.sin(u),
                         dr * np.sin(u) + r * TAU * p * np.cos(u),
                         -TAU * q * np.cos(v)], axis=1)

    return Curve(ev, dev, frame=None, samples=samples,
                 name=f"stereographic_torus({p},{q})")


def circle_xz(frame: str = GEIGES, samples: int = 4096) -> Curve:
    """x = cos, z = sin, w = 0: a closed (non-Legendrian) test curve."""
    def ev(t):
        out = np.zeros((len(t), 3))
        out[:, 0], out[:, 1] = np.cos(TAU * t), np.sin(TAU * t)
        return out

    def dev(t):
        out = np.zeros((len(t), 3))
        out[:, 0], out[:, 1] = -TAU * np.sin(TAU * t), TAU * np.cos(TAU * t)
        return out

    return Curve(ev, dev, frame=frame, samples=samples, name="circle_xz")


__all__ = ["unknot_front", "polynomial_front", "unknot_horizontal", "figure_eight", "torus_knot",
           "stereographic_torus_knot", "circle_xz", "CONTACT", "GEIGES"]
