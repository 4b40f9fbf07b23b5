"""SVG drawings of fronts and disk diagrams."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .curves import CONTACT, ENGEL, GEIGES, Curve, geiges_project, xsh
from .diskcalc import DiskDiagram, validate
from .errors import BadParameters
from .invariants import front_diagram

SIZE = 480
MARGIN = 30
RED = "#c0392b"


def _svg(body: list[str], width: int = SIZE, height: int = SIZE, title: str = "") -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    parts = [head]
    if title:
        parts.append(f"<title>{escape(title)}</title>")
    parts += body
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _path(pts) -> str:
    cmds = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
    return f'<path d="M {cmds}" fill="none" stroke="black" stroke-width="1.5"/>'


def _front_curve(c: Curve) -> Curve:
    if c.frame == ENGEL:
        return geiges_project(c)
    if c.frame not in (CONTACT, GEIGES):
        raise BadParameters("render needs a Legendrian or horizontal curve")
    return c


def front_svg(c: Curve, n: int | None = None, gap: float = 0.025) -> str:
    """Front (x, height) with cusps marked and the under-strand broken at crossings.

    ``gap`` is the break half-length as a fraction of the drawing size.
    """
    c = _front_curve(c)
    n = n or min(c.samples, 4096)
    t = np.arange(n + 1) / n
    x, _, h, *_ = xsh(c, t)
    d = front_diagram(c)
    lo = np.array([x.min(), h.min()])
    span = max(float(np.ptp(x)), float(np.ptp(h)), 1e-12)
    k = (SIZE - 2 * MARGIN) / span

    def scr(px, pz):
        return MARGIN + k * (np.asarray(px) - lo[0]), SIZE - MARGIN - k * (np.asarray(pz) - lo[1])

    X, Y = scr(x, h)
    keep = np.ones(n + 1, bool)
    cusp_xy = [scr(*xsh(c, [cu.t])[0:3:2]) for cu in d.cusps]
    for cr in d.crossings:
        xu, _, hu, *_ = xsh(c, [cr.t_under])
        cx, cy = scr(xu[0], hu[0])
        r = gap * (SIZE - 2 * MARGIN)
        for px, py in cusp_xy:
            r = min(r, 0.5 * float(np.hypot(px[0] - cx, py[0] - cy)))
        r = max(r, 1.5)
        # drop the contiguous stretch of the under-strand inside radius r
        i0 = int(round(cr.t_under * n)) % n
        for step in (1, -1):
            i = i0
            while np.hypot(X[i] - cx, Y[i] - cy) < r:
                keep[i] = False
                if i == 0 or i == n:
                    keep[n - i] = False
                i = (i + step) % n
    body = []
    run = []
    for i in range(n + 1):
        if keep[i]:
            run.append((X[i], Y[i]))
        elif run:
            if len(run) > 1:
                body.append(_path(run))
            run = []
    if len(run) > 1:
        body.append(_path(run))
    for cu in d.cusps:
        xc, _, hc, *_ = xsh(c, [cu.t])
        cx, cy = scr(xc[0], hc[0])
        body.append(f'<circle cx="{float(cx):.3f}" cy="{float(cy):.3f}" r="3" fill="black" '
                    f'class="cusp"/>')
    return _svg(body, title=c.name)


def _disk_point(pos: float, order: list) -> tuple[float, float]:
    k = order.index(pos)
    ang = 2 * np.pi * (k + 0.5) / len(order)
    rad = SIZE / 2 - MARGIN
    return SIZE / 2 + rad * np.cos(ang), SIZE / 2 - rad * np.sin(ang)


def disk_svg(d: DiskDiagram) -> str:
    """Unit disk with arcs as red chords, closed strata as red circles and signed dots."""
    validate(d)
    order = sorted(p.position for c in d.curves for p in c.endpoints)
    cx = cy = SIZE / 2
    rad = SIZE / 2 - MARGIN
    body = [f'<circle cx="{cx}" cy="{cy}" r="{rad}" fill="none" stroke="black" '
            f'stroke-width="1.5"/>']
    closed = [i for i, c in enumerate(d.curves) if c.kind == "closed"]
    for i, c in enumerate(d.curves):
        label = f"c={c.cusps}"
        if c.kind == "arc":
            (x0, y0), (x1, y1) = (_disk_point(p.position, order) for p in c.endpoints)
            # bow the chord slightly toward the centre so parallel arcs separate
            mx, my = 0.8 * (x0 + x1) / 2 + 0.2 * cx, 0.8 * (y0 + y1) / 2 + 0.2 * cy
            body.append(f'<path d="M {x0:.3f},{y0:.3f} Q {mx:.3f},{my:.3f} {x1:.3f},{y1:.3f}" '
                        f'fill="none" stroke="{RED}" stroke-width="2" class="stratum"/>')
            lx, ly = mx, my
            for p in c.endpoints:
                px, py = _disk_point(p.position, order)
                sym = "+" if p.sign > 0 else "−"
                ox, oy = px + 0.06 * (px - cx), py + 0.06 * (py - cy)
                body.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="4" fill="{RED}"/>')
                body.append(f'<text x="{ox:.3f}" y="{oy + 5:.3f}" font-size="16" '
                            f'text-anchor="middle" class="sign">{sym}</text>')
        else:
            k = closed.index(i)
            ang = 2 * np.pi * k / max(len(closed), 1)
            off = 0.35 * rad if len(closed) > 1 else 0.0
            lx, ly = cx + off * np.cos(ang), cy - off * np.sin(ang)
            body.append(f'<circle cx="{lx:.3f}" cy="{ly:.3f}" r="{0.12 * rad:.3f}" fill="none" '
                        f'stroke="{RED}" stroke-width="2" class="stratum"/>')
        body.append(f'<text x="{lx:.3f}" y="{ly - 6:.3f}" font-size="11" '
                    f'text-anchor="middle">{label}</text>')
    return _svg(body, title="disk diagram")


def write_svg(text: str, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
