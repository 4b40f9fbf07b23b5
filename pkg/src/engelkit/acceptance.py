"""Acceptance checks shared by the test suite and ``engelkit selftest``.

Each check returns a ``Check``; ``passed`` includes the runtime budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .curves import (CONTACT, ENGEL, brute_force_self_intersections, geiges_project,
                     total_area)
from .degree import (antipodal_s2, antipodal_s3, degree_3_to_s3_result, degree_regular_value,
                     degree_s2_result, kalman_degree)
from .diskcalc import (area_invariant, area_twist_disk, min_zero_parity, move_sweep,
                       obstructed_curves, parity_sweep, random_diagram)
from .errors import EngelkitError
from .families import polynomial_front, torus_knot, unknot_front, unknot_horizontal
from .invariants import (front_diagram, horizontal_rotation_number, rotation_number,
                         tb_linking_oracle, thurston_bennequin)
from .lifts import (add_area_lobe, add_area_pair, area_twist, double_stabilization,
                    geiges_deviation, lift_horizontal, stabilize, tangency_suite)


@dataclass(frozen=True)
class Check:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _timed(number, name, budget, fn) -> Check:
    t = time.perf_counter()
    try:
        ok, detail = fn()
    except EngelkitError as e:
        ok, detail = False, f"{type(e).__name__}: {e}"
    dt = time.perf_counter() - t
    if budget is not None and dt > budget:
        ok, detail = False, f"{detail}; over the {budget:g} s budget"
    return Check(number, name, bool(ok), detail, dt)


# --------------------------------------------------------------------------
# generated curves


def legendrian_suite() -> list:
    """21 embedded Legendrian knots: unknots, 1-4 stabilizations, torus knots."""
    out = [unknot_front(), unknot_front(0.3), unknot_front(0.8, frame=CONTACT),
           polynomial_front([1 / 6, 0, -1]), polynomial_front([0.2, 1])]
    for signs in [(1,), (-1,), (1, -1), (-1, -1), (1, 1, -1), (1, -1, 1, -1)]:
        c = unknot_front()
        for s, loc in zip(signs, np.linspace(0.1, 0.4, len(signs))):
            c = stabilize(c, s, loc=float(loc), eps=0.02)
        out.append(c)
    for p, q in [(2, 3), (2, 5), (3, 2), (3, 4), (2, 7), (3, 5)]:
        out.append(torus_knot(p, q))
    for p, q, s in [(2, 3, 1), (2, 3, -1), (2, 5, -1), (3, 2, 1)]:
        out.append(stabilize(torus_knot(p, q), s))
    return out


def horizontal_suite(theta_samples: int = 16) -> list:
    """unknot_horizontal and the slices of the area twist loop."""
    fam = area_twist(theta_samples)
    return [unknot_horizontal()] + [fam(th) for th in fam.thetas()]


def stabilization_cases(seed: int = 0) -> list[tuple]:
    """Ten seeded (operation, base, parameter) instances for the bookkeeping check."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(4):
        base = [unknot_front, lambda: torus_knot(2, 3)][int(rng.integers(0, 2))]()
        cases.append(("stabilize", base, int(rng.choice([1, -1]))))
    for _ in range(4):
        cases.append(("ds", unknot_front(), float(rng.choice([0.2, 0.35, 0.65, 0.8]))))
    cases.append(("ds", torus_knot(2, 3), 0.35))
    cases.append(("ds", unknot_horizontal(), 0.25))
    return cases


def _tb_rot(c):
    g = geiges_project(c) if c.frame == ENGEL else c
    return thurston_bennequin(front_diagram(g)), rotation_number(g)


# --------------------------------------------------------------------------
# criteria


def check_kalman(grid: int = 256) -> Check:
    def run():
        got = []
        ok = True
        for alpha in (1, 2):
            r = kalman_degree(5, 2, alpha, grid=grid)
            got.append(f"alpha={alpha}: degree {r.degree} raw {r.raw:.4f} (expected {2 * alpha})")
            ok &= r.degree == 2 * alpha and r.defect < 0.05
        return ok, "; ".join(got)
    return _timed(1, "Kalman obstruction degree", 120, run)


def check_antipodal() -> Check:
    def run():
        r3 = degree_3_to_s3_result(antipodal_s3())
        r2 = degree_s2_result(antipodal_s2())
        oracle = degree_regular_value(antipodal_s2(), np.array([0.3, -0.5, 0.81]))
        ok = r3.degree == 1 and r2.degree == -1 and oracle == -1
        return ok, f"S3 {r3.degree} (raw {r3.raw:.4f}), S2 {r2.degree} (raw {r2.raw:.4f}), " \
                   f"regular value {oracle}"
    return _timed(2, "antipodal degrees", 60, run)


def check_area_twist_disk() -> Check:
    def run():
        d = area_twist_disk()
        a, m = area_invariant(d), min_zero_parity(d)
        return a == 1 and m == 1, f"Area {a}, min zero parity {m}"
    return _timed(3, "area twist disk", 1, run)


def check_move_invariance(n: int = 1000) -> Check:
    def run():
        applied, invalid, changed = move_sweep(n, seed=0)
        ok = applied > 0 and invalid == 0 and changed == 0
        return ok, f"{applied} move applications, {invalid} invalid, {changed} Area changes"
    return _timed(4, "elementary-change invariance", 10, run)


def check_parity_identity(n: int = 1000) -> Check:
    def run():
        checked, failed, _ = parity_sweep(4, 3)
        bad = sum((area_invariant(d) - len(obstructed_curves(d))) % 2
                  for d in (random_diagram(10 ** 6 + k, 6) for k in range(n)))
        ok = failed == 0 and bad == 0
        return ok, f"exhaustive {checked} diagrams {failed} failures; random {n}: {bad} failures"
    return _timed(5, "parity identity", 10, run)


def check_zero_area(curves=None) -> Check:
    def run():
        cs = horizontal_suite() if curves is None else curves
        worst = max(abs(total_area(geiges_project(c), 4096)) for c in cs)
        return worst < 1e-9, f"{len(cs)} horizontal curves, max |area| {worst:.2e}"
    return _timed(6, "zero-area condition", 5, run)


def check_rot_equality(curves=None) -> Check:
    def run():
        cs = horizontal_suite() if curves is None else curves
        bad = [c.name for c in cs
               if horizontal_rotation_number(c) != rotation_number(geiges_project(c))]
        return not bad, f"{len(cs)} horizontal curves, mismatches {bad}"
    return _timed(7, "rot equality", None, run)


def check_tb_oracle(curves=None) -> Check:
    def run():
        cs = legendrian_suite() if curves is None else curves
        bad = []
        for c in cs:
            tb = thurston_bennequin(front_diagram(c))
            lk = tb_linking_oracle(c, 1024)
            if tb != lk:
                bad.append(f"{c.name}: {tb} vs {lk}")
        return len(cs) >= 20 and not bad, f"{len(cs)} Legendrians, mismatches {bad}"
    return _timed(8, "tb cross-validation", 120, run)


def check_stabilization(seed: int = 0) -> Check:
    def run():
        bad, eps = [], []
        for op, base, arg in stabilization_cases(seed):
            tb0, rot0 = _tb_rot(base)
            if op == "stabilize":
                tb1, rot1 = _tb_rot(stabilize(base, arg))
                if (tb1, rot1) != (tb0 - 1, rot0 + arg):
                    bad.append(f"stabilize{arg:+d}({base.name}): {tb0},{rot0} -> {tb1},{rot1}")
            else:
                a = 2e-4
                r = double_stabilization(base, loc=arg, a=a)
                tb1, rot1 = _tb_rot(r.curve)
                e = abs(r.report.epsilon_A)
                eps.append(e / a)
                if (tb1, rot1) != (tb0 - 2, rot0) or not e >= a / 2:
                    bad.append(f"ds({base.name}, {arg}): {tb0},{rot0} -> {tb1},{rot1}, "
                               f"|eps_A| {e:.3g}")
        return not bad, f"10 instances, min |eps_A|/a {min(eps):.3f}, failures {bad}"
    return _timed(9, "stabilization bookkeeping", None, run)


def check_parity_law(curves=None) -> Check:
    def run():
        cs = legendrian_suite() if curves is None else curves
        bad = [c.name for c in cs if sum(_tb_rot(c)) % 2 != 1]
        return not bad, f"{len(cs)} Legendrians, even tb + rot: {bad}"
    return _timed(10, "parity law", None, run)


def check_lobes() -> Check:
    def run():
        c = unknot_front()
        base = total_area(c)
        A = 0.01
        devs, errs = [], []
        for N in (1, 2, 4, 8):
            lobe = add_area_lobe(c, 0.3, A, N=N)
            errs.append(abs(total_area(lobe) - base - A))
            devs.append(geiges_deviation(c, lobe, 0.2, 0.4))
        ratios = [devs[k] / devs[k + 1] for k in range(3)]
        pair = abs(total_area(add_area_pair(c, 0.3, 0.7, A, N=2)) - base)
        ok = max(errs) < 1e-8 and pair < 1e-8 and all(1.6 <= r <= 2.4 for r in ratios)
        return ok, (f"lobe error {max(errs):.1e}, pair error {pair:.1e}, "
                    f"deviation ratios {', '.join(f'{r:.2f}' for r in ratios)}")
    return _timed(11, "area-lobe contract", None, run)


def check_lift_criterion(seed: int = 0) -> Check:
    def run():
        bad = 0
        suite = tangency_suite(seed, 10)
        for front, expected in suite:
            lift = lift_horizontal(front)
            brute = not brute_force_self_intersections(lift, 2048)
            bad += not (lift.meta["embedded"] == brute == expected)
        return bad == 0, f"{len(suite)} engineered tangencies, {bad} disagreements"
    return _timed(12, "lift criterion", None, run)


CHECKS = (check_kalman, check_antipodal, check_area_twist_disk, check_move_invariance,
          check_parity_identity, check_zero_area, check_rot_equality, check_tb_oracle,
          check_stabilization, check_parity_law, check_lobes, check_lift_criterion)


def run_all(only=None) -> list[Check]:
    return [fn() for k, fn in enumerate(CHECKS, 1) if only is None or k in only]
