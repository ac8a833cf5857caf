import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from oracle_khovanov import TREFOIL_RIGHT

from khcob.bs import bs_complex
from khcob.ckom import filtration_level, identity_map, verify_chain_map
from khcob.coeff import Ring
from khcob.diagram import DiagramError, change_crossing, disjoint_union, from_braid, from_pd, unknot, with_parts
from khcob.moves import (Movie, apply_event, crossing_change, elementary_map, event, format_movie, movie_map,
                         parse_movie, reidemeister_map, sep_movie, split_movie, step)
from khcob.suites import random_diagram
from khcob.tqft import homotopy_solve, induced_map

Q = Ring("Q")
HOPF = [(4, 1, 3, 2), (2, 3, 1, 4)]
DATA = Path(__file__).resolve().parent.parent / "demos" / "data"
seeds = st.integers(0, 10**6)


def test_r1_adds_one_crossing():
    d = from_pd(TREFOIL_RIGHT)
    after = apply_event(d, event("r1 add edge=2 side=L sign=+ new_crossing=z new_edges=(z1,z2)"))
    assert after.n == d.n + 1 and after.crossing_sign("z") == 1


def test_r2_adds_opposite_crossings():
    d = from_pd(TREFOIL_RIGHT)
    after = apply_event(d, event("r2 add over=1 under=3 new_crossings=(n1,n2) new_edges=(a1,a2,a3,a4)"))
    assert after.n == d.n + 2
    assert sorted((after.crossing_sign("n1"), after.crossing_sign("n2"))) == [-1, 1]


def test_saddle_weight_mismatch():
    d = disjoint_union(unknot(0), unknot(1))
    with pytest.raises(DiagramError) as exc:
        apply_event(d, event("saddle edges=(a.e1,b.e1) new_edges=(g,h)"))
    assert exc.value.code == "WeightMismatch"


def test_bad_addressing():
    d = from_pd(TREFOIL_RIGHT)
    with pytest.raises(DiagramError):
        apply_event(d, event("r1 remove crossing=zz"))
    with pytest.raises(DiagramError):
        apply_event(d, event("r3 crossings=(c1,c2,c3)"))


def test_r2_round_trip_is_a_homotopy_equivalence():
    d = from_pd(HOPF, [0, 1])
    ev = event("r2 add over=1 under=3 new_crossings=(n1,n2) new_edges=(a1,a2,a3,a4)")
    mid = step(d, ev).after
    f = reidemeister_map(d, None, ev)
    g = reidemeister_map(mid, None, event("r2 remove crossings=(n1,n2)"))
    assert f.then(g).equals(identity_map(f.source))
    fg = g.then(f)
    res = homotopy_solve(fg, identity_map(fg.source), filtered_level=0, unit="fixed")
    assert res is not None and res.unit == 1


def test_crossing_change_on_one_crossing():
    d = from_braid([-1], 2, weights={"k1": 2, "k2": 7}, closed=False)
    c = d.order[0]
    d2, cc = crossing_change(d, c)
    _, back = crossing_change(d2, c)
    k = d.shading_sign(c) * (d.w_over(c) - d.w_under(c))
    assert verify_chain_map(cc)["ok"]
    assert cc.then(back).equals(identity_map(cc.source, k))
    assert cc.degree() == 2  # negative to positive
    same = from_braid([-1], 2, weights={"k1": 3, "k2": 3}, closed=False)
    s2, cc = crossing_change(same, c)
    assert cc.then(crossing_change(s2, c)[1]).is_zero()


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_distant_crossing_changes_commute(seed):
    rng = random.Random(seed)
    d = random_diagram(rng, Q, 5)
    if d.n < 2:
        return
    a, b = rng.sample(d.order, 2)
    da, fa = crossing_change(d, a)
    _, fab = crossing_change(da, b)
    db, fb = crossing_change(d, b)
    _, fba = crossing_change(db, a)
    assert fa.then(fab).blocks.keys() == fb.then(fba).blocks.keys()
    left, right = fa.then(fab), fb.then(fba)
    right.target = left.target
    assert left.equals(right)


def test_crossing_change_commutes_with_a_distant_event():
    d = from_braid([1, 1], 2, weights=[0, 1])
    d = disjoint_union(d, unknot(1))
    c = d.order[0]
    ev = event("dot edge=b.e1")
    d2, cc = crossing_change(d, c)
    top = elementary_map(d, None, ev).then(crossing_change(apply_event(d, ev), c)[1])
    bottom = cc.then(elementary_map(d2, None, ev))
    bottom.target = top.target
    assert top.equals(bottom)


def test_empty_movie_is_identity():
    d = from_pd(TREFOIL_RIGHT)
    f = movie_map(Movie(d, []))
    assert f.equals(identity_map(f.source))


def test_sphere_movie_is_zero():
    m = Movie(from_pd([]), [event("birth edge=a"), event("death circle_edge=a")])
    f = movie_map(m)
    assert f.is_zero()
    assert filtration_level(elementary_map(from_pd([]), None, event("birth edge=a"))) == 1


def test_birth_next_to_unknot():
    # after the TQFT the birth is the unit: 1 -> 1 (x) 1 and X -> X (x) 1
    from khcob.tqft import apply_tqft

    f = apply_tqft(elementary_map(unknot(0, Ring("Z")), None, event("birth edge=b")))
    tgt_circles = [sorted(c.atoms)[0] for c in f.target.meta["formal"].gens[0].obj.circles]
    got = {}
    for i, row in f.blocks.items():
        (lab,) = f.source.gens[i].key[1]
        for j, v in row.items():
            named = dict(zip(tgt_circles, f.target.gens[j].key[1]))
            got.setdefault(lab, []).append(((named["e1"], named["b"]), v))
    assert got == {0: [((0, 0), 1)], 1: [((1, 0), 1)]}


def test_movie_text_round_trip():
    text = (DATA / "splitting.movie").read_text()
    m = parse_movie(text)
    again = parse_movie(format_movie(m))
    assert format_movie(again) == format_movie(m)
    assert [str(e) for e in again.events] == [str(e) for e in m.events]


def test_sep_of_a_split_movie_is_unchanged():
    d = with_parts(disjoint_union(unknot(0), unknot(1)), {"a.k1": 1, "b.k1": 2})
    m = Movie(d, [event("dot edge=a.e1")], {"a.k1": 1, "b.k1": 2})
    s = sep_movie(m)
    assert format_movie(s.movie) == format_movie(m)
    assert s.cc_initial.equals(identity_map(s.cc_initial.source))
    assert format_movie(split_movie(m)) is not None


def test_one_part_movies_are_unchanged():
    d = with_parts(from_pd(TREFOIL_RIGHT), {"k1": 1})
    m = Movie(d, [event("r1 add edge=2 side=L sign=+ new_crossing=z new_edges=(z1,z2)")], {"k1": 1})
    assert format_movie(sep_movie(m).movie) == format_movie(m)
    assert format_movie(split_movie(m)) == format_movie(m)


def test_sep_of_the_splitting_movie():
    m = parse_movie((DATA / "splitting.movie").read_text())
    s = sep_movie(m)
    frames = s.movie.frames()
    for f in frames:
        for c in f.order:
            under, over = f.edges[f.crossings[c][0]], f.edges[f.crossings[c][1]]
            assert over.part >= under.part
    assert len(s.movie.events) == len(m.events)
