import random

import pytest
from hypothesis import given, settings, strategies as st

from oracle_khovanov import FIGURE_EIGHT, TREFOIL_RIGHT, khovanov_homology

from khcob import cobcat
from khcob.bs import bs_complex
from khcob.ckom import ChainMap, identity_map, mat_add_into, zero_map
from khcob.coeff import Ring
from khcob.diagram import _trace_components, disjoint_union, from_braid, from_pd, unknot
from khcob.moves import Movie, event, movie_map
from khcob.suites import random_diagram
from khcob.tqft import (NotAField, _evaluate, _hom_basis, apply_tqft, euler_check, homology, homotopy_solve, induced_map,
                        j_grading, kj_number, spectral_pages, unimodular_inverse)

Q, Z = Ring("Q"), Ring("Z")
HOPF = [(4, 1, 3, 2), (2, 3, 1, 4)]
seeds = st.integers(0, 10**6)

A, B, AB = cobcat.circle(["a"]), cobcat.circle(["b"]), cobcat.circle(["a", "b"])
TWO, ONE = cobcat.Resolution.of([A, B]), cobcat.Resolution.of([AB])


def test_circle_module():
    m = apply_tqft(bs_complex(unknot(0)))
    assert sorted(g.q for g in m.gens) == [-1, 1]


def test_merge_and_dot():
    merge = _evaluate(cobcat.standard(TWO, ONE, Q), Q)
    assert merge[(0, 1)] == {(1,): 1}
    assert (1, 1) not in merge
    assert merge[(0, 0)] == {(0,): 1}
    dot = _evaluate(cobcat.dot_on(ONE, AB, Q), Q)
    assert dot == {(0,): {(1,): 1}}
    split = _evaluate(cobcat.standard(ONE, TWO, Q), Q)
    assert split == {(0,): {(0, 1): 1, (1, 0): 1}, (1,): {(1, 1): 1}}


def test_unknot_homology():
    h = homology(bs_complex(unknot(0, Z)), "kh")
    assert h.groups == {(0, -1): (1, []), (0, 1): (1, [])}


def test_unlink_kunneth():
    u = homology(bs_complex(unknot(0)), "kh").ranks()
    want = {}
    for (i1, j1), r1 in u.items():
        for (i2, j2), r2 in u.items():
            want[(i1 + i2, j1 + j2)] = want.get((i1 + i2, j1 + j2), 0) + r1 * r2
    assert homology(bs_complex(disjoint_union(unknot(0), unknot(0))), "kh").ranks() == want


def _to_oracle_pd(d):
    """Relabel a link diagram so edge labels run consecutively along each
    component, as the oracle expects; None if a component is too short for
    the oracle to orient."""
    if any(e.tail is None for e in d.edges.values()):
        return None
    lab, n = {}, 1
    for es in _trace_components(d.edges, d.crossings):
        if len(es) < 3:
            return None
        for e in es:
            lab[e] = n
            n += 1
    return [tuple(lab[e] for e in d.crossings[c]) for c in d.order]


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_homology_over_z_matches_oracle(seed):
    d = random_diagram(random.Random(seed), Z, 5, closed=True, weights=(0,))
    pd = _to_oracle_pd(d)
    if pd is None:
        return
    h = homology(bs_complex(d), "kh", Z)
    got = {k: (r, list(t)) for k, (r, t) in h.groups.items() if r or t}
    assert got == khovanov_homology(pd)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_euler_characteristic(seed):
    d = random_diagram(random.Random(seed), Q, 5, closed=True)
    mc = apply_tqft(bs_complex(d))
    for which in ("kh", "bs"):
        assert euler_check(mc, homology(mc, which), which)


def test_identity_movie_induces_identity():
    d = from_pd(TREFOIL_RIGHT, ring=Z)
    m = induced_map(movie_map(Movie(d, [])), "kh", Z)
    size = len(m.source_basis)
    assert m.matrix() == [[int(i == j) for j in range(size)] for i in range(size)]


def test_homotopy_solve_trivial():
    f = identity_map(bs_complex(from_pd(HOPF, [0, 1])))
    r = homotopy_solve(f, f)
    assert r is not None and r.unit == 1 and r.h.is_zero()
    with pytest.raises(NotAField):
        homotopy_solve(*(2 * [identity_map(bs_complex(unknot(0, Z)))]))


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from(["module", "formal"]))
def test_homotopy_solve_recovers_a_null_homotopy(seed, carrier):
    rng = random.Random(seed)
    c = bs_complex(random_diagram(rng, Q, 3, closed=True))
    if carrier == "module":
        c = apply_tqft(c)
    H = {}
    for i, x in enumerate(c.gens):
        for j, y in enumerate(c.gens):
            if y.r != x.r - 1 or rng.random() < 0.5:
                continue
            coeff = Q(rng.randint(-3, 3))
            for cfg in _hom_basis(x, y, 1, carrier, 0):
                ent = coeff if carrier == "module" else cobcat.CobMorphism(x.obj, y.obj, {cfg: coeff}, Q)
                mat_add_into(H, i, j, ent, c.alg)
    h0 = ChainMap(c, c, H, odd=True)
    D = ChainMap(c, c, c.d())
    f = h0.then(D) + D.then(h0)
    f.odd = False
    res = homotopy_solve(f, zero_map(c, c))
    assert res is not None
    assert homotopy_solve(f, zero_map(c, c), unit="unknown") is not None
    # h0 only lowers r by one, so a homotopy of that single shift exists
    assert homotopy_solve(f, zero_map(c, c), shift=-1) is not None


def test_spectral_unknot():
    p = spectral_pages(bs_complex(unknot(0)), Q)
    assert all(sum(t.values()) == 2 for t in p.pages.values())
    assert p.collapse == 2


def test_spectral_hopf():
    d = from_pd(HOPF, [0, 1])
    p = spectral_pages(bs_complex(d), Q)
    assert sum(p.infinity.values()) == homology(bs_complex(d), "bs").rank()
    with pytest.raises(NotAField):
        spectral_pages(bs_complex(unknot(0, Z)))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_e2_is_khovanov(seed):
    d = random_diagram(random.Random(seed), Q, 4, closed=True)
    c = bs_complex(d)
    p = spectral_pages(c, Q)
    by_j = {}
    for (l, j), n in p.pages[2].items():
        by_j[j] = by_j.get(j, 0) + n
    kh = {}
    for (i, j), r in homology(c, "kh").ranks().items():
        kh[j] = kh.get(j, 0) + r
    assert {k: v for k, v in by_j.items() if v} == kh


def _closed(lines):
    return Movie(from_pd([], ring=Z), [event(x) for x in lines])


def test_kj_numbers():
    assert kj_number(_closed(["birth edge=a", "death circle_edge=a"])) == 0
    torus = ["birth edge=a", "saddle edges=(a,a) new_edges=(b,c)", "saddle edges=(b,c) new_edges=(d,x)",
             "death circle_edge=d"]
    assert kj_number(_closed(torus)) in (2, -2)
    with pytest.raises(ValueError):
        kj_number(Movie(unknot(0, Z), []))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
def test_unimodular_inverse(rows):
    # build a unimodular matrix as a product of elementary row operations
    M = [[int(i == j) for j in range(3)] for i in range(3)]
    for k, row in enumerate(rows):
        for j in range(3):
            if j != k:
                for c in range(3):
                    M[j][c] += row[j] * M[k][c]
    inv = unimodular_inverse(M)
    prod = [[sum(M[i][k] * inv[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert prod == [[int(i == j) for j in range(3)] for i in range(3)]
