"""Local front modifications inside a parameter window.

A modification replaces (x, slope) by (x + dx, slope + ds) on a window
[lo, hi] where dx and ds are compactly supported, and recomputes the height
(and, for Engel curves, y) by integrating the contact condition.  The slope
perturbation is a combination of shape functions whose coefficients are
solved from linear conditions: closure of the height, and optionally a
prescribed change of the front area.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ENGEL, Curve, assemble, panel_nodes, xsh

# ---------------------------------------------------------------------------
# profiles on u in [-1, 1]; each returns (value, d/du)


def bump(u, k: int = 5):
    inside = np.abs(u) < 1
    v = np.where(inside, 1 - u * u, 0.0)
    return v ** k, np.where(inside, -2 * k * u * v ** (k - 1), 0.0)


def odd_profile(u, k: int = 5):
    """-u (1 - u^2)^k: odd, decreasing through 0 with slope -1."""
    b, db = bump(u, k)
    return -u * b, -b - u * db


def even_profile(u, k: int = 5):
    return bump(u, k)


def shifted(profile, center: float, half: float, **kw):
    """profile((u - center) / half): a sub-window of [-1, 1]."""
    def f(u):
        v, dv = profile((np.asarray(u) - center) / half, **kw)
        return v, dv / half
    return f


@dataclass(frozen=True)
class Window:
    lo: float
    hi: float

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def half(self):
        return 0.5 * (self.hi - self.lo)

    def u(self, t):
        return (np.asarray(t) - self.mid) / self.half


class Cumulative:
    """F(t) = integral of g from lo to t on fixed Gauss-Legendre panels.

    ``panels`` is a count (uniform panels on [lo, hi]) or an explicit array
    of breakpoints.
    """

    def __init__(self, g, lo, hi, panels, k=8):
        if np.ndim(panels) == 0:
            self.b = np.linspace(lo, hi, int(panels) + 1)
        else:
            self.b = np.asarray(panels, float)
        self.g = g
        self.k = k
        nodes, w = panel_nodes(self.b, k)
        vals = (w * g(nodes)).reshape(len(self.b) - 1, k).sum(axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(vals)])

    def __call__(self, t):
        t = np.asarray(t, float)
        b = self.b
        idx = np.clip(np.searchsorted(b, t, side="right") - 1, 0, len(b) - 2)
        a = b[idx]
        x, w = np.polynomial.legendre.leggauss(self.k)
        x, w = (x + 1) / 2, w / 2
        span = np.clip(t, b[0], b[-1]) - a
        pts = a[:, None] + span[:, None] * x[None, :]
        part = (self.g(pts.ravel()).reshape(pts.shape) * w[None, :]).sum(axis=1) * span
        return self.cum[idx] + part

    @property
    def total(self):
        return float(self.cum[-1])


def _base_parts(c: Curve, t):
    """x, slope, height, y (or None) and derivatives of x, slope, height."""
    p, d = c.eval(t), c.deriv(t)
    if c.frame == ENGEL:
        return p[:, 0], p[:, 3], p[:, 2], p[:, 1], d[:, 0], d[:, 3], d[:, 2]
    x, s, h, dx, ds, dh = xsh(c, t)
    return x, s, h, None, dx, ds, dh


def _warped(c: Curve, win: Window, dx_profile, retrace):
    """The unperturbed curve inside the window, before the slope shapes.

    Returns t -> (x, s, h, y, dx, ds, dh, dy).  With ``retrace=None`` the x
    coordinate is displaced by dx_profile(u) and the other coordinates are the
    base ones.  With ``retrace=lam`` the base is re-parametrized by the fold
    tau = t + lam * dx_profile(u), which retraces the original point set.
    """
    half = win.half

    def f(t):
        u = win.u(t)
        ax, adx = dx_profile(u)
        if retrace is None:
            x, s, h, y, dx, ds, dh = _base_parts(c, t)
            dy = None if y is None else h * dx
            return x + ax, s, h, y, dx + adx / half, ds, s * dx, dy
        tau = t + retrace * ax
        rate = 1.0 + retrace * adx / half
        x, s, h, y, dx, ds, dh = _base_parts(c, tau)
        dy = None if y is None else h * dx * rate
        return x, s, h, y, dx * rate, ds * rate, dh * rate, dy
    return f


def modify(c: Curve, win: Window, dx_profile, ds_profiles, coeffs, panels: int = 256,
           name: str | None = None, retrace: float | None = None) -> Curve:
    """Apply x += dx_profile(u), slope += sum coeffs_i * ds_profiles_i(u) on win.

    Profiles are functions of the window coordinate u and return
    (value, d/du).  Height (and y for Engel curves) are re-integrated.  With
    ``retrace`` the x displacement is replaced by a parameter fold (see
    ``_warped``), so the base point set is traversed back and forth.
    """
    coeffs = np.asarray(coeffs, float)
    lo, hi, half = win.lo, win.hi, win.half
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError("window must lie inside [0, 1]")
    warp = _warped(c, win, dx_profile, retrace)

    def slope(t):
        u = win.u(t)
        s_val = np.zeros_like(u)
        s_der = np.zeros_like(u)
        for a, f in zip(coeffs, ds_profiles):
            v, dv = f(u)
            s_val = s_val + a * v
            s_der = s_der + a * dv
        return s_val, s_der / half

    def g_h(t):
        x, s, h, y, dx, ds, dh, dy = warp(t)
        return (s + slope(t)[0]) * dx - dh

    dh_add = Cumulative(g_h, lo, hi, panels)
    engel = c.frame == ENGEL
    if engel:
        def g_y(t):
            x, s, h, y, dx, ds, dh, dy = warp(t)
            return (h + dh_add(t)) * dx - dy
        dy_add = Cumulative(g_y, lo, hi, panels)

    last = {}

    def parts(t):
        # eval and deriv are usually requested on the same t; without this each
        # nested modification would evaluate its base twice per call
        key = t.tobytes()
        if last.get("key") == key:
            return last["val"]
        out = _parts(t)
        last["key"], last["val"] = key, out
        return out

    def _parts(t):
        x, s, h, y, dx, ds, dhb = _base_parts(c, t)
        x, s, h, dx, ds = x.copy(), s.copy(), h.copy(), dx.copy(), ds.copy()
        y = None if y is None else y.copy()
        inside = (t > lo) & (t < hi)
        after = t >= hi
        if np.any(inside):
            ti = t[inside]
            wx, ws, wh, wy, wdx, wds, _, _ = warp(ti)
            sv, sd = slope(ti)
            x[inside] = wx
            dx[inside] = wdx
            s[inside] = ws + sv
            ds[inside] = wds + sd
            h[inside] = wh + dh_add(ti)
            if engel:
                y[inside] = wy + dy_add(ti)
        if np.any(after):
            h[after] += dh_add.total
            if engel:
                y[after] += dy_add.total
        return x, s, h, y, dx, ds, s * dx

    if engel:
        def ev(t):
            x, s, h, y, *_ = parts(t)
            return np.stack([x, y, h, s], axis=1)

        def dev(t):
            x, s, h, y, dx, ds, dh_ = parts(t)
            return np.stack([dx, h * dx, dh_, ds], axis=1)
    else:
        def ev(t):
            x, s, h, *_ = parts(t)
            return assemble(c.frame, x, s, h)

        def dev(t):
            *_, dx, ds, dh_ = parts(t)
            return assemble(c.frame, dx, ds, dh_)

    meta = dict(c.meta)
    meta.setdefault("windows", ())
    meta["windows"] = tuple(meta["windows"]) + ((lo, hi),)
    return Curve(ev, dev, frame=c.frame, samples=c.samples, legendrian=c.legendrian,
                 name=name or c.name, breaks=tuple(c.breaks) + ((lo, hi, panels),),
                 meta=meta)


def solve_coefficients(c: Curve, win: Window, dx_profile, ds_profiles, fixed=None,
                       area=None, panels: int = 256, retrace: float | None = None):
    """Coefficients of the slope shapes meeting the linear conditions.

    Conditions: the height closes up at the end of the window; if ``area`` is
    given, the front area over the window changes by exactly ``area``.
    ``fixed`` maps shape index -> prescribed coefficient.  The number of free
    coefficients must equal the number of conditions.
    """
    fixed = dict(fixed or {})
    free = [i for i in range(len(ds_profiles)) if i not in fixed]
    n_cond = 1 + (area is not None)
    if len(free) != n_cond:
        raise ValueError("number of free shapes must equal number of conditions")
    nodes, w = panel_nodes(np.linspace(win.lo, win.hi, panels + 1))
    u = win.u(nodes)
    xw, sw, hw, _, dxw, _, dhw, _ = _warped(c, win, dx_profile, retrace)(nodes)
    _, _, hb, _, dxb, _, _ = _base_parts(c, nodes)
    x_hi = float(_base_parts(c, np.array([win.hi]))[0][0])
    defect = sw * dxw - dhw
    shapes = [f(u)[0] for f in ds_profiles]

    # height increment H' = defect + sum c_i S_i x_w'; closure asks H(hi) = 0
    rows = [[np.dot(w, S * dxw) for S in shapes]]
    rhs = [-np.dot(w, defect)]
    if area is not None:
        # area change = int h_w dx_w - int h dx + int (x_hi - x_w) H' dt
        weight = dxw * (x_hi - xw)
        rows.append([np.dot(w, S * weight) for S in shapes])
        rhs.append(area - (np.dot(w, hw * dxw) - np.dot(w, hb * dxb)
                           + np.dot(w, (x_hi - xw) * defect)))
    rows, rhs = np.array(rows), np.array(rhs, float)
    for i, v in fixed.items():
        rhs -= rows[:, i] * v
    sol = np.linalg.solve(rows[:, free], rhs)
    out = np.zeros(len(ds_profiles))
    for i, v in fixed.items():
        out[i] = v
    out[free] = sol
    return out
