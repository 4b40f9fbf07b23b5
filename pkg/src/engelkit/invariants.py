"""Rotation numbers, front diagrams and the Thurston-Bennequin invariant.

All invariants are computed in contact coordinates (x, slope, height), where
the plane field is ker(d height - slope dx) with its positive orientation.
A curve given in the Geiges frame (x, z, w) is read as x, slope w, height z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curves import (CONTACT, ENGEL, SEP_MIN, TOL_LEG, TOL_DERIV, Curve, CurveFamily, _cyclic_gap,
                     _hash_pairs, _local_minima, _scan_grid, as_frame, batch_gauss_newton,
                     cusp_parameters, horizontal_residual, xsh)
from .errors import DerivTooSmall, HorizontalViolation, NonGeneric, PushoffCollision


# --------------------------------------------------------------------------
# winding


def winding_of_vectors(v: np.ndarray, closed: bool = True) -> float:
    """Total turning of a sequence of plane vectors, in turns (not rounded)."""
    ang = np.arctan2(v[:, 1], v[:, 0])
    if closed:
        ang = np.append(ang, ang[0])
    d = np.diff(ang)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return float(d.sum() / (2 * np.pi))


def _max_step(v: np.ndarray) -> float:
    ang = np.arctan2(v[:, 1], v[:, 0])
    d = np.diff(np.append(ang, ang[0]))
    return float(np.max(np.abs((d + np.pi) % (2 * np.pi) - np.pi)))


def _plane_components(c: Curve, t) -> np.ndarray:
    _, _, _, dx, ds, _ = xsh(c, t)
    return np.stack([dx, ds], axis=1)


def rotation_number(c: Curve, n: int | None = None, tol_deriv: float = TOL_DERIV) -> int:
    """Winding of the derivative in the frame (d_x + slope d_height, d_slope)."""
    n = n or c.samples
    for _ in range(5):
        v = _plane_components(c, _scan_grid(c, n))
        if np.min(np.linalg.norm(v, axis=1)) < tol_deriv:
            raise DerivTooSmall("derivative vanishes in the plane-field frame")
        if _max_step(v) < np.pi / 2:
            return int(round(winding_of_vectors(v)))
        n *= 2
    return int(round(winding_of_vectors(v)))


def loop_rotation_number(f: CurveFamily, m: int | None = None, t: float = 0.0,
                         vector_at: Callable[[float], np.ndarray] | None = None,
                         tol_deriv: float = TOL_DERIV) -> int:
    """Winding of theta -> direction of the slice derivative at time t.

    ``vector_at(theta)`` may supply the plane-field components of a formal
    derivative F_1 instead.
    """
    m = m or f.theta_samples
    for _ in range(6):
        th = np.arange(m) / m
        if vector_at is None:
            v = np.vstack([_plane_components(f(a), [t]) for a in th])
        else:
            v = np.vstack([np.asarray(vector_at(a), float).reshape(1, 2) for a in th])
        if np.min(np.linalg.norm(v, axis=1)) < tol_deriv:
            raise DerivTooSmall("loop derivative vanishes")
        if _max_step(v) < np.pi / 2:
            break
        m *= 2
    return int(round(winding_of_vectors(v)))


def horizontal_rotation_number(c: Curve, n: int | None = None,
                               tol_deriv: float = TOL_DERIV) -> int:
    """Winding of the derivative of a horizontal curve in the Engel plane frame.

    The plane field is spanned by d_x + z d_y + w d_z and d_w, so a horizontal
    tangent has components (x', w').  Read straight from the 4-D derivative.
    """
    if c.frame != ENGEL:
        raise ValueError("horizontal_rotation_number needs an Engel curve")
    res = horizontal_residual(c)
    if res > TOL_LEG:
        raise HorizontalViolation(f"horizontal residual {res:.3g} > {TOL_LEG:g}")
    n = n or c.samples
    for _ in range(5):
        v = c.deriv(_scan_grid(c, n))[:, [0, 3]]
        if np.min(np.linalg.norm(v, axis=1)) < tol_deriv:
            raise DerivTooSmall("derivative vanishes in the plane-field frame")
        if _max_step(v) < np.pi / 2:
            break
        n *= 2
    return int(round(winding_of_vectors(v)))


# --------------------------------------------------------------------------
# fronts


@dataclass(frozen=True)
class Crossing:
    t_over: float
    t_under: float
    sign: int
    point: tuple


@dataclass(frozen=True)
class Cusp:
    t: float
    kind: str  # "left" or "right"


@dataclass(frozen=True)
class FrontDiagram:
    crossings: tuple
    cusps: tuple
    frame: str
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def writhe(self) -> int:
        return sum(c.sign for c in self.crossings)

    def to_text(self) -> str:
        lines = [f"frame {self.frame}"]
        for c in self.crossings:
            lines.append(f"crossing over={c.t_over:.12f} under={c.t_under:.12f} "
                         f"sign={c.sign:+d} x={c.point[0]:.12g} z={c.point[1]:.12g}")
        for c in self.cusps:
            lines.append(f"cusp t={c.t:.12f} kind={c.kind}")
        return "\n".join(lines) + "\n"


def _front(c: Curve, t):
    x, s, h, dx, ds, dh = xsh(c, t)
    return np.stack([x, h], axis=1), np.stack([dx, dh], axis=1), s


def _front_project(p, d):
    return p[:, [0, 2]], d[:, [0, 2]]


def _as_contact(c: Curve) -> Curve:
    return as_frame(c, CONTACT)


def front_diagram(c: Curve, n: int | None = None, sep_min: float = SEP_MIN,
                  tol_slope: float = 1e-7) -> FrontDiagram:
    """Crossings and cusps of the front (x, height) of a Legendrian curve.

    The over-strand has the smaller slope (viewer on the negative slope side,
    x to the right, height up).  The sign is that of o_x u_z - o_z u_x for the
    over/under tangents, which equals the product of the strands' x-directions.
    """
    n = n or c.samples
    t = _scan_grid(c, n)
    pts, _, _ = _front(c, t)
    scale = float(np.max(np.ptp(pts, axis=0)))
    seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    ii, jj = _hash_pairs(pts, 1.01 * seg.max())
    far = _cyclic_gap(t[ii], t[jj]) > sep_min
    ii, jj = _local_minima(c, t, pts, ii[far], jj[far])
    step_cap = 4.0 * float(np.max(np.diff(np.append(t, t[0] + 1))))
    found: list = []
    if len(ii):
        ra, rb, rres = batch_gauss_newton(_as_contact(c), t[ii], t[jj], step_cap,
                                          project=_front_project)
    else:
        ra = rb = rres = []
    for a, b, res in zip(ra, rb, rres):
        if res > 1e-9 * scale:
            continue
        a, b = min(a, b), max(a, b)
        if _cyclic_gap(a, b) <= sep_min:
            continue
        if any(_cyclic_gap(a, u) < sep_min and _cyclic_gap(b, v) < sep_min for u, v in found):
            continue
        found.append((a, b))
    crossings = []
    for a, b in sorted(found):
        p, d, s = _front(c, [a, b])
        if abs(s[0] - s[1]) < tol_slope * max(1.0, abs(s[0])):
            raise NonGeneric(f"front tangency (3-D double point) at t=({a:.6f}, {b:.6f})")
        o, u = (0, 1) if s[0] < s[1] else (1, 0)
        to, tu = (a, b)[o], (a, b)[u]
        cross = d[o, 0] * d[u, 1] - d[o, 1] * d[u, 0]
        crossings.append(Crossing(float(to), float(tu), int(np.sign(cross)),
                                  (float(p[0, 0]), float(p[0, 1]))))
    cusps = []
    for tc in cusp_parameters(c, n):
        for other in cusps:
            if _cyclic_gap(other.t, tc) < 1e-12:
                break
        else:
            dd = (c.deriv(tc + 1e-6)[0, 0] - c.deriv(tc - 1e-6)[0, 0])
            cusps.append(Cusp(tc, "left" if dd > 0 else "right"))
    # a crossing sitting on a cusp is not generic
    for cr in crossings:
        for cu in cusps:
            if min(_cyclic_gap(cr.t_over, cu.t), _cyclic_gap(cr.t_under, cu.t)) < 1e-6:
                raise NonGeneric("crossing at a cusp")
    return FrontDiagram(tuple(crossings), tuple(cusps), c.frame)


def thurston_bennequin(d: FrontDiagram) -> int:
    """writhe - cusps / 2."""
    return d.writhe - len(d.cusps) // 2


# --------------------------------------------------------------------------
# linking oracle


def _contact_points(c: Curve, t) -> np.ndarray:
    x, s, h, *_ = xsh(c, t)
    return np.stack([x, s, h], axis=1)


def polygon_linking(a: np.ndarray, b: np.ndarray, chunk: int = 256) -> float:
    """Linking number of two closed polygons (vertices listed once).

    Exact solid-angle formula for each pair of segments.
    """
    a1, a2 = a, np.roll(a, -1, axis=0)
    b1, b2 = b, np.roll(b, -1, axis=0)
    total = 0.0
    for lo in range(0, len(b), chunk):
        k1, k2 = b1[lo:lo + chunk, None, :], b2[lo:lo + chunk, None, :]
        va = a1[None, :, :] - k1
        vb = a1[None, :, :] - k2
        vc = a2[None, :, :] - k2
        vd = a2[None, :, :] - k1
        trip = np.einsum("ijk,ijk->ij", va, np.cross(vb, vc))
        na, nb = np.linalg.norm(va, axis=2), np.linalg.norm(vb, axis=2)
        nc, nd = np.linalg.norm(vc, axis=2), np.linalg.norm(vd, axis=2)

        def dot(u, v):
            return np.einsum("ijk,ijk->ij", u, v)

        d1 = na * nb * nc + dot(va, vb) * nc + dot(vb, vc) * na + dot(vc, va) * nb
        d2 = na * nd * nc + dot(va, vd) * nc + dot(vd, vc) * na + dot(vc, va) * nd
        total += float(np.sum(np.arctan2(trip, d1) + np.arctan2(trip, d2)))
    return total / (2 * np.pi)


def _min_nonadjacent(pts: np.ndarray, chunk: int = 512) -> float:
    m = len(pts)
    best = np.inf
    idx = np.arange(m)
    for lo in range(0, m, chunk):
        rows = idx[lo:lo + chunk]
        d = np.linalg.norm(pts[rows, None, :] - pts[None, :, :], axis=2)
        gap = np.abs(rows[:, None] - idx[None, :])
        gap = np.minimum(gap, m - gap)
        d[gap < 2] = np.inf
        best = min(best, float(d.min()))
    return best


def tb_linking_oracle(c: Curve, n: int | None = None) -> int:
    """Linking number of c with its push-off along the Reeb field d_height."""
    n = n or min(c.samples, 4096)
    t = _scan_grid(c, n)
    pts = _contact_points(c, t)
    eps = 0.5 * _min_nonadjacent(pts)
    if not np.isfinite(eps) or eps <= 1e-12 * float(np.max(np.ptp(pts, axis=0))):
        raise PushoffCollision("curve is not embedded at sample resolution")
    push = pts + np.array([0.0, 0.0, eps])
    lk = polygon_linking(pts, push)
    if abs(lk - round(lk)) > 0.1:
        raise PushoffCollision(f"linking integral {lk:.4f} is not near an integer")
    return int(round(lk))


def parity_check(c: Curve) -> bool:
    tb = thurston_bennequin(front_diagram(c))
    return (tb + rotation_number(c)) % 2 == 1
