import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracle_khovanov import FIGURE_EIGHT, TREFOIL_LEFT, TREFOIL_RIGHT, _circles

from khcob.coeff import Ring
from khcob.diagram import (DiagramError, checkerboard, crossing_data, euler_check, faces, flip_shading,
                           format_tangle, from_braid, from_pd, mirror, parse_tangle, reverse_component,
                           unknot)
from khcob.suites import random_diagram

Q = Ring("Q")
seeds = st.integers(0, 10**6)

TREFOIL_TNG = """tangle ring=Q
X c1 = (1,5,2,4)
X c2 = (3,1,4,6)
X c3 = (5,3,6,2)
component k1 edges=(1,2,3,4,5,6) weight=0
end
"""


def test_free_circle():
    d = parse_tangle("tangle\ncomponent k1 edges=(e) weight=1\nend\n")
    assert (len(d.components), d.n, d.is_link()) == (1, 0, True)
    assert d.edges["e"].weight == 1
    assert checkerboard(d)[1].crossing_signs == {}
    assert (crossing_data(d).n_plus, crossing_data(d).n_minus) == (0, 0)


def test_trefoil_accepted_and_planar():
    d = parse_tangle(TREFOIL_TNG)
    assert (d.n, len(d.edges)) == (3, 6)
    assert len(faces(d)) == 5
    assert euler_check(d)


@pytest.mark.parametrize("text,code", [
    ("tangle boundary=(a,b,c)\ncomponent k1 edges=(e) weight=0\nend\n", "OddBoundary"),
    ("tangle\nX c1 = (1,2,3)\nend\n", "BadCrossing"),
    ("tangle\ncomponent k1 edges=(e) weight=0\n", "ParseError"),
    ("nonsense\n", "ParseError"),
])
def test_rejections(text, code):
    with pytest.raises(DiagramError) as exc:
        parse_tangle(text)
    assert exc.value.code == code


def test_trefoil_crossing_data():
    d = from_pd(TREFOIL_RIGHT)
    cd = crossing_data(d)
    assert (cd.n_plus, cd.n_minus) == (3, 0)
    r = reverse_component(d, "k1")
    assert (crossing_data(r).n_plus, crossing_data(r).n_minus) == (3, 0)
    assert crossing_data(from_pd(TREFOIL_LEFT)).n_minus == 3


def test_trefoil_resolutions():
    d = from_pd(TREFOIL_RIGHT)
    assert len(d.resolve((0, 0, 0)).circles) == 2
    assert len(d.resolve((1, 1, 1)).circles) == 3
    with pytest.raises(Exception):
        d.resolve((0, 0))


@pytest.mark.parametrize("pd", [TREFOIL_RIGHT, TREFOIL_LEFT, FIGURE_EIGHT])
def test_circle_counts_match_union_find_oracle(pd):
    d = from_pd(pd)
    for v in product((0, 1), repeat=len(pd)):
        assert len(d.resolve(v).circles) == len(_circles(pd, v)), v


def test_one_crossing_shading_sign():
    d = from_braid([1], 2, closed=False)
    c = d.order[0]
    s = d.shading_sign(c)
    assert s in (1, -1)
    flipped, signs = checkerboard(d, "outer-shaded")
    assert signs.crossing_signs[c] == -s
    assert all(signs.boundary_signs[p] == -d.boundary_sign(p) for p in d.boundary)


@pytest.mark.parametrize("pd", [TREFOIL_RIGHT, FIGURE_EIGHT])
def test_alternating_diagrams_have_constant_shading_sign(pd):
    d = from_pd(pd)
    assert len({d.shading_sign(c) for c in d.order}) == 1


def test_nonalternating_diagram_has_both_signs():
    # sigma1^2 sigma2^-1 ... closure: the braid word (1, 1, -2, 1, -2) is not alternating
    d = from_braid([1, 1, 2, 2], 3)
    assert len({d.shading_sign(c) for c in d.order}) == 2


@settings(max_examples=150, deadline=None)
@given(seeds, st.booleans())
def test_parse_format_round_trip(seed, closed):
    d = random_diagram(random.Random(seed), Q, 5, closed=closed)
    text = format_tangle(d)
    d2 = parse_tangle(text, Q)
    assert format_tangle(d2) == text
    assert euler_check(d2)
    assert crossing_data(d2) == crossing_data(d)
    assert d2.edges == d.edges


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_flip_shading_negates_every_sign(seed):
    d = random_diagram(random.Random(seed), Q, 5)
    f = flip_shading(d)
    assert all(f.shading_sign(c) == -d.shading_sign(c) for c in d.order)
    assert all(f.boundary_sign(p) == -d.boundary_sign(p) for p in d.boundary)
    assert flip_shading(f).edges == d.edges


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_orientation_and_mirror(seed):
    d = random_diagram(random.Random(seed), Q, 5, closed=True)
    m = mirror(d)
    assert (m.n_plus(), m.n_minus()) == (d.n_minus(), d.n_plus())
    r = d
    for name in sorted(d.components):
        r = reverse_component(r, name)
    assert [r.crossing_sign(c) for c in r.order] == [d.crossing_sign(c) for c in d.order]


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_bit_flip_changes_circle_count_by_one(seed):
    rng = random.Random(seed)
    d = random_diagram(rng, Q, 5, closed=True)
    v = tuple(rng.randint(0, 1) for _ in range(d.n))
    i = rng.randrange(d.n)
    w = v[:i] + (1 - v[i],) + v[i + 1:]
    assert abs(len(d.resolve(v).circles) - len(d.resolve(w).circles)) == 1


def test_unknot_helpers():
    u = unknot(3)
    assert u.edges["e1"].is_free_loop and u.edges["e1"].weight == 3
