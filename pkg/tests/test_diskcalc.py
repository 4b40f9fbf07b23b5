from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from engelkit.diskcalc import (MOVES, BoundaryPoint, DiskDiagram, StratumCurve, all_diagrams,
                               applicable_sites, area_invariant, area_twist_disk,
                               elementary_change, format_disk, is_obstructed, is_valid,
                               load_disk, min_zero_parity, move_sweep, obstructed_curves,
                               parity_sweep, parse_disk, random_diagram, validate)
from engelkit.errors import BadParameters, MoveNotApplicable

EXAMPLES = Path(__file__).resolve().parent.parent / "examples"

seeds = st.integers(0, 10 ** 6)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(0, 6))
def test_format_parse_round_trip(seed, size):
    d = random_diagram(seed, size)
    assert parse_disk(format_disk(d)) == d


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_random_diagrams_are_valid(seed):
    validate(random_diagram(seed, 6))


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(MOVES), st.data())
def test_moves_preserve_area_and_validity(seed, move, data):
    d = random_diagram(seed, 5)
    sites = applicable_sites(d, move)
    site = data.draw(st.sampled_from(sites)) if sites else None
    if site is None:
        return
    e = elementary_change(d, move, site)
    assert is_valid(e)
    assert area_invariant(e) == area_invariant(d)
    # the boundary always carries an even number of points
    assert sum(len(c.endpoints) for c in e.curves) % 2 == 0


def test_move_sweep_small():
    applied, invalid, changed = move_sweep(50, seed=3)
    assert applied > 1000
    assert (invalid, changed) == (0, 0)


def test_parity_identity_by_enumeration():
    # brute force over explicit diagrams, independent of the vectorized sweep
    count = 0
    for d in all_diagrams(2, 1):
        count += 1
        assert area_invariant(d) == min_zero_parity(d)
        if area_invariant(d) == 1:
            assert obstructed_curves(d)
    assert count == parity_sweep(2, 1)[0]
    assert parity_sweep(2, 1)[1:] == (0, 0)


def test_obstruction_rules():
    p, m = BoundaryPoint(1, 0), BoundaryPoint(-1, 1)
    assert is_obstructed(StratumCurve("arc", 0, (p, m)))
    assert not is_obstructed(StratumCurve("arc", 1, (p, m)))
    assert not is_obstructed(StratumCurve("arc", 0, (p, BoundaryPoint(1, 1))))
    assert is_obstructed(StratumCurve("closed", 3))
    assert not is_obstructed(StratumCurve("closed", 2))


def test_area_twist_disk():
    d = area_twist_disk()
    assert area_invariant(d) == 1
    assert obstructed_curves(d) == [0]
    assert load_disk(EXAMPLES / "area_twist.disk") == d


def test_interleaving_arcs_need_odd_crossings():
    text = "arc +0 +2 c=0\narc -1 -3 c=0\n"
    with pytest.raises(BadParameters):
        parse_disk(text)
    d = parse_disk(text + "cross 0 1 3\n")
    assert d.n_crossings(0, 1) == 3


def test_parser_rejects_garbage():
    for bad in ("arc +0 c=1", "closed c=-1", "cross 0 0 2", "circle c=1",
                "arc +0 -0 c=0"):
        with pytest.raises(BadParameters):
            parse_disk(bad)


def test_bad_curves():
    with pytest.raises(BadParameters):
        StratumCurve("arc", 0, ())
    with pytest.raises(BadParameters):
        StratumCurve("closed", -1)
    with pytest.raises(BadParameters):
        StratumCurve("blob")


def test_move_not_applicable():
    d = area_twist_disk()
    with pytest.raises(MoveNotApplicable):
        elementary_change(d, "E1", ("death", 0))
    with pytest.raises(MoveNotApplicable):
        elementary_change(d, "E9", ("birth",))
    with pytest.raises(MoveNotApplicable):
        elementary_change(d, "E2", ("death", 0))


def test_cusp_pair_birth_and_sign_flip():
    d = area_twist_disk()
    e = elementary_change(d, "E2", ("birth", 0))
    assert e.curves[0].cusps == 2 and area_invariant(e) == 1
    f = elementary_change(d, "E5", ("in", 0, 1))
    assert f.curves[0].cusps == 1
    assert [p.sign for p in f.curves[0].endpoints] == [1, 1]
    # the cusp flips the sign of the area function, so (+, +) with one cusp is still forced
    assert obstructed_curves(f) == [0] and area_invariant(f) == 1


def test_empty_diagram():
    d = DiskDiagram()
    assert area_invariant(d) == 0 and min_zero_parity(d) == 0
    assert format_disk(d) == "\n"
