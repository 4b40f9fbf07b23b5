"""Disk diagrams of strict-immersion strata and the Area parity.

A diagram records, for a generic disk of Legendrian immersions, the curves of
strict immersions (closed curves and arcs ending on the boundary), their cusp
counts, the signs of the area function at the boundary endpoints, and the
number of transversal crossings between pairs of curves.  Only combinatorics
is stored: arcs are chords of the disk, and two chords whose endpoints
interleave must cross an odd number of times.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from itertools import combinations, product

import numpy as np

from .errors import BadParameters, MoveNotApplicable

MOVES = ("E1", "E2", "E3", "E4", "E5", "E6", "E7")


@dataclass(frozen=True)
class BoundaryPoint:
    sign: int
    position: int


@dataclass(frozen=True)
class StratumCurve:
    kind: str
    cusps: int = 0
    endpoints: tuple = ()
    zeros: int | None = None

    def __post_init__(self):
        if self.kind not in ("closed", "arc"):
            raise BadParameters(f"unknown curve kind {self.kind!r}")
        if self.cusps < 0:
            raise BadParameters("cusp count must be non-negative")
        if len(self.endpoints) != (2 if self.kind == "arc" else 0):
            raise BadParameters(f"{self.kind} curve with {len(self.endpoints)} endpoints")
        if any(p.sign not in (1, -1) for p in self.endpoints):
            raise BadParameters("boundary signs must be +1 or -1")


@dataclass(frozen=True)
class DiskDiagram:
    """Curves plus symmetric crossing counts ``crossings[(i, j)]`` with i < j.

    Boundary positions are any distinct integers; only their cyclic order
    matters.
    """

    curves: tuple = ()
    crossings: dict = field(default_factory=dict, hash=False, compare=False)

    def __eq__(self, other):
        return (isinstance(other, DiskDiagram) and self.curves == other.curves
                and _clean(self.crossings) == _clean(other.crossings))

    def __hash__(self):
        return hash((self.curves, tuple(sorted(_clean(self.crossings).items()))))

    def boundary_order(self) -> list[tuple[int, int]]:
        """(curve index, end index) pairs in cyclic boundary order."""
        ends = [(p.position, i, k) for i, c in enumerate(self.curves)
                for k, p in enumerate(c.endpoints)]
        return [(i, k) for _, i, k in sorted(ends)]

    def n_crossings(self, i: int, j: int) -> int:
        return self.crossings.get((min(i, j), max(i, j)), 0)


def _clean(cr: dict) -> dict:
    return {k: v for k, v in cr.items() if v}


def _interleave(d: DiskDiagram, i: int, j: int) -> bool:
    a, b = d.curves[i], d.curves[j]
    if a.kind != "arc" or b.kind != "arc":
        return False
    lo, hi = sorted(p.position for p in a.endpoints)
    inside = [lo < p.position < hi for p in b.endpoints]
    return inside[0] != inside[1]


def validate(d: DiskDiagram) -> None:
    """Raise BadParameters unless d is a valid diagram."""
    pos = [p.position for c in d.curves for p in c.endpoints]
    if len(set(pos)) != len(pos):
        raise BadParameters("boundary positions must be distinct")
    n = len(d.curves)
    for (i, j), v in d.crossings.items():
        if not (0 <= i < j < n) or v < 0:
            raise BadParameters(f"bad crossing entry {(i, j)}: {v}")
    for i, j in combinations(range(n), 2):
        if d.n_crossings(i, j) % 2 != _interleave(d, i, j):
            raise BadParameters(f"curves {i} and {j}: crossing count has the wrong parity "
                                "for their boundary interleaving")


def is_valid(d: DiskDiagram) -> bool:
    try:
        validate(d)
    except BadParameters:
        return False
    return True


# --------------------------------------------------------------------------
# invariants


def plus_points(d: DiskDiagram) -> int:
    return sum(p.sign > 0 for c in d.curves for p in c.endpoints)


def total_cusps(d: DiskDiagram) -> int:
    return sum(c.cusps for c in d.curves)


def area_invariant(d: DiskDiagram) -> int:
    """(#positive boundary points + #cusps) mod 2."""
    return (plus_points(d) + total_cusps(d)) % 2


def is_obstructed(c: StratumCurve) -> bool:
    """True if the area function must vanish somewhere along c."""
    if c.kind == "closed":
        return c.cusps % 2 == 1
    s0, s1 = (p.sign for p in c.endpoints)
    return s0 * s1 * (-1) ** c.cusps == -1


def obstructed_curves(d: DiskDiagram) -> list[int]:
    return [i for i, c in enumerate(d.curves) if is_obstructed(c)]


def min_zero_parity(d: DiskDiagram) -> int:
    """Parity of the number of strict horizontal immersions forced in the disk."""
    return len(obstructed_curves(d)) % 2


def area_twist_disk() -> DiskDiagram:
    """The standard capping disk of the area twist loop: one arc (+, -)."""
    arc = StratumCurve("arc", 0, (BoundaryPoint(1, 0), BoundaryPoint(-1, 1)), zeros=1)
    return DiskDiagram((arc,))


# --------------------------------------------------------------------------
# elementary changes


def _drop(d: DiskDiagram, idx) -> tuple[tuple, dict]:
    """Remove curves in idx; renumber crossings."""
    idx = set(idx)
    keep = [i for i in range(len(d.curves)) if i not in idx]
    new = {old: k for k, old in enumerate(keep)}
    cr = {}
    for (i, j), v in d.crossings.items():
        if v and i in new and j in new:
            cr[(new[i], new[j])] = v
    return tuple(d.curves[i] for i in keep), cr


def _append(curves, cr, extra, extra_cr=()) -> DiskDiagram:
    """Append curves; extra_cr holds (old index, new local index, count)."""
    base = len(curves)
    cr = dict(cr)
    for i, k, v in extra_cr:
        if v:
            cr[(min(i, base + k), max(i, base + k))] = v
    return DiskDiagram(tuple(curves) + tuple(extra), cr)


def _others(d: DiskDiagram, i: int):
    return [(j, d.n_crossings(i, j)) for j in range(len(d.curves)) if j != i]


def _crossing_free(d: DiskDiagram, *idx) -> bool:
    return all(v == 0 for j in idx for _, v in _others(d, j))


def _mutual_free(d: DiskDiagram, i: int, j: int) -> bool:
    return d.n_crossings(i, j) == 0


def _fresh_positions(d: DiskDiagram, after: int, k: int) -> list[float]:
    """k new positions right after boundary slot ``after`` (-1 on an empty boundary)."""
    pos = sorted(p.position for c in d.curves for p in c.endpoints)
    lo = pos[after] if pos else 0
    hi = pos[after + 1] if after + 1 < len(pos) else lo + 1
    return [lo + (hi - lo) * (m + 1) / (k + 1) for m in range(k)]


def _renumber(d: DiskDiagram) -> DiskDiagram:
    """Replace boundary positions by 0..m-1 keeping their cyclic order."""
    order = sorted(p.position for c in d.curves for p in c.endpoints)
    rank = {p: r for r, p in enumerate(order)}
    curves = tuple(replace(c, endpoints=tuple(replace(p, position=rank[p.position])
                                              for p in c.endpoints)) for c in d.curves)
    return DiskDiagram(curves, dict(d.crossings))


def _separated(d: DiskDiagram, i: int, j: int) -> bool:
    """True if some other arc chord has i and j on different sides."""
    pi = d.curves[i].endpoints[0].position
    pj = d.curves[j].endpoints[0].position
    for k, c in enumerate(d.curves):
        if k in (i, j) or c.kind != "arc":
            continue
        lo, hi = sorted(p.position for p in c.endpoints)
        if (lo < pi < hi) != (lo < pj < hi):
            return True
    return False


def _reconnect_pairs(d: DiskDiagram, i: int, j: int):
    """The other non-crossing pairing of the four endpoints of arcs i and j."""
    pts = sorted([(p, i, k) for k, p in enumerate(d.curves[i].endpoints)]
                 + [(p, j, k) for k, p in enumerate(d.curves[j].endpoints)],
                 key=lambda e: e[0].position)
    # cyclic order a b c d with current chords {ab, cd} or {ad, bc}
    a, b, c, e = (q[0] for q in pts)
    owner = [q[1] for q in pts]
    if owner[0] == owner[1]:
        return (a, e), (b, c)
    return (a, b), (c, e)


def applicable_sites(d: DiskDiagram, move: str) -> list[tuple]:
    """Every site at which ``move`` applies to d."""
    n = len(d.curves)
    cs = d.curves
    nb = sum(len(c.endpoints) for c in cs)
    arcs = [i for i in range(n) if cs[i].kind == "arc"]
    closed = [i for i in range(n) if cs[i].kind == "closed"]
    if move == "E1":
        return [("birth",)] + [("death", i) for i in closed
                               if cs[i].cusps == 0 and _crossing_free(d, i)]
    if move == "E2":
        return [("birth", i) for i in range(n)] + [("death", i) for i in range(n)
                                                   if cs[i].cusps >= 2]
    if move == "E3":
        out = [("merge", i, j) for i, j in combinations(closed, 2) if _mutual_free(d, i, j)]
        out += [("split", i, k) for i in closed for k in range(cs[i].cusps + 1)]
        for i, j in combinations(arcs, 2):
            if (_crossing_free(d, i, j) and not _interleave(d, i, j)
                    and not _separated(d, i, j)):
                out += [("reconnect", i, j, k) for k in range(cs[i].cusps + cs[j].cusps + 1)]
        return out
    if move == "E4":
        out = [("birth", slot, s) for slot in (range(nb) if nb else [-1]) for s in (1, -1)]
        order = d.boundary_order()
        for i in arcs:
            c = cs[i]
            if c.cusps or c.endpoints[0].sign != c.endpoints[1].sign or not _crossing_free(d, i):
                continue
            slots = [k for k, (ci, _) in enumerate(order) if ci == i]
            if (slots[1] - slots[0]) in (1, len(order) - 1):
                out.append(("death", i))
        return out
    if move == "E5":
        return ([("out", i, k) for i in arcs if cs[i].cusps >= 1 for k in (0, 1)]
                + [("in", i, k) for i in arcs for k in (0, 1)])
    if move == "E6":
        return ([("add", i, j) for i, j in combinations(range(n), 2)]
                + [("remove", i, j) for i, j in combinations(range(n), 2)
                   if d.n_crossings(i, j) >= 2])
    if move == "E7":
        return ([("merge", i, j) for i in arcs for j in closed if _mutual_free(d, i, j)]
                + [("split", i, k) for i in arcs for k in range(cs[i].cusps + 1)])
    raise MoveNotApplicable(f"unknown move {move!r}")


def elementary_change(d: DiskDiagram, move: str, site: tuple) -> DiskDiagram:
    """Apply one elementary change; raise MoveNotApplicable if it does not apply."""
    if move not in MOVES:
        raise MoveNotApplicable(f"unknown move {move!r}")
    if tuple(site) not in applicable_sites(d, move):
        raise MoveNotApplicable(f"{move} does not apply at {site!r}")
    cs = list(d.curves)
    kind = site[0]
    if move == "E1":
        if kind == "birth":
            return _append(cs, d.crossings, [StratumCurve("closed")])
        return DiskDiagram(*_drop(d, [site[1]]))
    if move == "E2":
        i = site[1]
        cs[i] = replace(cs[i], cusps=cs[i].cusps + (2 if kind == "birth" else -2))
        return DiskDiagram(tuple(cs), dict(d.crossings))
    if move == "E3":
        if kind == "merge":
            i, j = site[1:]
            merged = StratumCurve("closed", cs[i].cusps + cs[j].cusps)
            keep = [k for k in range(len(cs)) if k not in (i, j)]
            extra = [(m, 0, d.n_crossings(i, k) + d.n_crossings(j, k))
                     for m, k in enumerate(keep)]
            curves, cr = _drop(d, [i, j])
            return _append(curves, cr, [merged], extra)
        if kind == "split":
            i, k = site[1:]
            cs[i] = replace(cs[i], cusps=cs[i].cusps - k)
            return _append(cs, d.crossings, [StratumCurve("closed", k)])
        i, j, k = site[1:]
        (p0, p1), (q0, q1) = _reconnect_pairs(d, i, j)
        total = cs[i].cusps + cs[j].cusps
        cs[i] = StratumCurve("arc", k, (p0, p1))
        cs[j] = StratumCurve("arc", total - k, (q0, q1))
        return DiskDiagram(tuple(cs), dict(d.crossings))
    if move == "E4":
        if kind == "birth":
            _, slot, s = site
            a, b = _fresh_positions(d, slot, 2)
            arc = StratumCurve("arc", 0, (BoundaryPoint(s, a), BoundaryPoint(s, b)))
            return _renumber(_append(cs, d.crossings, [arc]))
        return _renumber(DiskDiagram(*_drop(d, [site[1]])))
    if move == "E5":
        _, i, k = site
        ends = list(cs[i].endpoints)
        ends[k] = replace(ends[k], sign=-ends[k].sign)
        cs[i] = replace(cs[i], cusps=cs[i].cusps + (1 if kind == "in" else -1),
                        endpoints=tuple(ends))
        return DiskDiagram(tuple(cs), dict(d.crossings))
    if move == "E6":
        _, i, j = site
        cr = dict(d.crossings)
        cr[(i, j)] = cr.get((i, j), 0) + (2 if kind == "add" else -2)
        return DiskDiagram(tuple(cs), _clean(cr))
    # E7
    if kind == "merge":
        i, j = site[1:]
        cs[i] = replace(cs[i], cusps=cs[i].cusps + cs[j].cusps, zeros=None)
        cr = dict(d.crossings)
        for k in range(len(cs)):
            if k not in (i, j):
                v = d.n_crossings(j, k)
                if v:
                    key = (min(i, k), max(i, k))
                    cr[key] = cr.get(key, 0) + v
        return DiskDiagram(*_drop(DiskDiagram(tuple(cs), cr), [j]))
    i, k = site[1:]
    cs[i] = replace(cs[i], cusps=cs[i].cusps - k, zeros=None)
    return _append(cs, d.crossings, [StratumCurve("closed", k)])


# --------------------------------------------------------------------------
# random and enumerated diagrams


def random_diagram(seed: int, size: int) -> DiskDiagram:
    """A valid diagram with at most ``size`` curves, deterministic per seed."""
    if size < 0:
        raise BadParameters("size must be non-negative")
    rng = np.random.default_rng(seed)
    n = int(rng.integers(0, size + 1)) if size else 0
    kinds = ["arc" if rng.random() < 0.6 else "closed" for _ in range(n)]
    arcs = [i for i, k in enumerate(kinds) if k == "arc"]
    slots = rng.permutation(2 * len(arcs))
    curves = []
    for i, k in enumerate(kinds):
        c = int(rng.integers(0, 4))
        if k == "closed":
            curves.append(StratumCurve("closed", c))
        else:
            m = arcs.index(i)
            ends = tuple(BoundaryPoint(int(rng.choice([1, -1])), int(slots[2 * m + e]))
                         for e in (0, 1))
            curves.append(StratumCurve("arc", c, ends))
    d = DiskDiagram(tuple(curves))
    cr = {}
    for i, j in combinations(range(n), 2):
        v = int(_interleave(d, i, j)) + 2 * int(rng.integers(0, 2) if rng.random() < 0.2 else 0)
        if v:
            cr[(i, j)] = v
    return DiskDiagram(tuple(curves), cr)


def move_sweep(n: int = 1000, seed: int = 0, size: int = 6) -> tuple[int, int, int]:
    """Apply every move at every site to n random diagrams.

    Returns (applications, invalid results, Area changes).
    """
    applied = invalid = changed = 0
    for k in range(n):
        d = random_diagram(seed * 1_000_003 + k, size)
        a = area_invariant(d)
        for move in MOVES:
            for site in applicable_sites(d, move):
                e = elementary_change(d, move, site)
                applied += 1
                invalid += not is_valid(e)
                changed += area_invariant(e) != a
    return applied, invalid, changed


def all_diagrams(max_curves: int = 4, max_cusps: int = 3):
    """Every diagram up to relabeling of crossings (minimal crossing counts).

    Arcs are laid out in all chord pairings of their endpoints; interleaving
    pairs get one declared crossing.
    """
    for n in range(max_curves + 1):
        for n_arcs in range(n + 1):
            n_closed = n - n_arcs
            for pairing in _pairings(list(range(2 * n_arcs))):
                for cusps in np.ndindex(*([max_cusps + 1] * n)):
                    for signs in np.ndindex(*([2] * (2 * n_arcs))):
                        curves = []
                        for m, (p, q) in enumerate(pairing):
                            s0, s1 = (1 - 2 * signs[2 * m], 1 - 2 * signs[2 * m + 1])
                            curves.append(StratumCurve("arc", int(cusps[m]),
                                                       (BoundaryPoint(s0, p), BoundaryPoint(s1, q))))
                        curves += [StratumCurve("closed", int(cusps[n_arcs + m]))
                                   for m in range(n_closed)]
                        d = DiskDiagram(tuple(curves))
                        cr = {(i, j): 1 for i, j in combinations(range(n), 2)
                              if _interleave(d, i, j)}
                        yield DiskDiagram(tuple(curves), cr)


def _pairings(pts):
    if not pts:
        yield []
        return
    a = pts[0]
    for k in range(1, len(pts)):
        for p in _pairings(pts[1:k] + pts[k + 1:]):
            yield [(a, pts[k])] + p


def _grid(k: int, m: int) -> np.ndarray:
    return np.array(list(product(range(k), repeat=m)), int).reshape(k ** m, m)


def parity_sweep(max_curves: int = 4, max_cusps: int = 3) -> tuple[int, int, int]:
    """Check the parity identity on every diagram of the given size.

    Arc chord pairings are enumerated explicitly; signs and cusp counts are
    enumerated as arrays.  Returns (diagrams checked, parity failures,
    diagrams with Area 1 but no obstructed curve).
    """
    checked = failed = unobstructed = 0
    for n_arcs in range(max_curves + 1):
        npair = sum(1 for _ in _pairings(list(range(2 * n_arcs))))
        for n_closed in range(max_curves - n_arcs + 1):
            n = n_arcs + n_closed
            sign_grid = _grid(2, 2 * n_arcs)
            cusp_grid = _grid(max_cusps + 1, n)
            plus = sign_grid.sum(axis=1)                       # 1 encodes +
            arc_plus = sign_grid[:, 0::2] + sign_grid[:, 1::2]  # per arc
            s_idx, c_idx = np.meshgrid(np.arange(len(sign_grid)), np.arange(len(cusp_grid)),
                                       indexing="ij")
            s_idx, c_idx = s_idx.ravel(), c_idx.ravel()
            cusps = cusp_grid[c_idx]
            area = (plus[s_idx] + cusps.sum(axis=1)) % 2
            obstructed = ((arc_plus[s_idx] + cusps[:, :n_arcs]) % 2).sum(axis=1)
            obstructed = obstructed + (cusps[:, n_arcs:] % 2).sum(axis=1)
            bad = int(np.count_nonzero(area != obstructed % 2))
            none = int(np.count_nonzero((area == 1) & (obstructed == 0)))
            checked += npair * len(area)
            failed += npair * bad
            unobstructed += npair * none
    return checked, failed, unobstructed


# --------------------------------------------------------------------------
# text format

_ARC = re.compile(r"^arc\s+([+-])(\d+)\s+([+-])(\d+)\s+c=(\d+)(?:\s+z=(\d+))?$")
_CLOSED = re.compile(r"^closed\s+c=(\d+)(?:\s+z=(\d+))?$")
_CROSS = re.compile(r"^cross\s+(\d+)\s+(\d+)\s+(\d+)$")


def parse_disk(text: str) -> DiskDiagram:
    """Parse the ``.disk`` text format (see docs/formats.md)."""
    curves, cr = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _ARC.match(line):
            s0, p0, s1, p1, c, z = m.groups()
            ends = (BoundaryPoint(1 if s0 == "+" else -1, int(p0)),
                    BoundaryPoint(1 if s1 == "+" else -1, int(p1)))
            curves.append(StratumCurve("arc", int(c), ends, None if z is None else int(z)))
        elif m := _CLOSED.match(line):
            c, z = m.groups()
            curves.append(StratumCurve("closed", int(c), (), None if z is None else int(z)))
        elif m := _CROSS.match(line):
            i, j, v = map(int, m.groups())
            if i == j:
                raise BadParameters(f"line {lineno}: a curve cannot cross itself")
            cr[(min(i, j), max(i, j))] = v
        else:
            raise BadParameters(f"line {lineno}: cannot parse {raw.strip()!r}")
    d = DiskDiagram(tuple(curves), _clean(cr))
    validate(d)
    return d


def format_disk(d: DiskDiagram) -> str:
    lines = []
    for c in d.curves:
        z = "" if c.zeros is None else f" z={c.zeros}"
        if c.kind == "closed":
            lines.append(f"closed c={c.cusps}{z}")
        else:
            a, b = c.endpoints
            lines.append(f"arc {'+' if a.sign > 0 else '-'}{a.position} "
                         f"{'+' if b.sign > 0 else '-'}{b.position} c={c.cusps}{z}")
    for (i, j), v in sorted(_clean(d.crossings).items()):
        lines.append(f"cross {i} {j} {v}")
    return "\n".join(lines) + "\n"


def load_disk(path) -> DiskDiagram:
    with open(path) as f:
        return parse_disk(f.read())
