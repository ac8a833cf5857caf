"""The Batson-Seed curved complex of a weighted, shaded tangle diagram."""

from __future__ import annotations

import os
from itertools import product

from . import cobcat
from .ckom import CurvedComplex, Gen, IntegrityError, curvature, glue, mat_add_into, sign_iso
from .diagram import DiagramError, Edge, TangleDiagram

SIGN_RULES = ("paper", "barnatan")

# test hook: KHCOB_MUTATE=sign-rule drops the sprinkled signs so that the
# verification suites can be checked to fail on a broken build
MUTATION = os.environ.get("KHCOB_MUTATE", "")


def vertices(n):
    """All of {0,1}^n in lexicographic order."""
    return list(product((0, 1), repeat=n))


def _m_by_sign(d: TangleDiagram, v, i):
    m = 0
    for j in range(i):
        pos = d.crossing_sign(d.order[j]) > 0
        if (v[j] == 1 and pos) or (v[j] == 0 and not pos):
            m += 1
    return m


def _m_barnatan(d, v, i):
    return sum(v[:i])


def sprinkle_sign(d: TangleDiagram, v, v2, rule="paper") -> int:
    """(-1)^m(v, v2) for an immediate successor pair v < v2."""
    diff = [i for i in range(len(v)) if v[i] != v2[i]]
    if len(diff) != 1 or v[diff[0]] != 0:
        raise ValueError("not an immediate successor pair")
    i = diff[0]
    if MUTATION == "sign-rule":
        return 1
    m = _m_by_sign(d, v, i) if rule == "paper" else _m_barnatan(d, v, i)
    return -1 if m % 2 else 1


def bs_complex(d: TangleDiagram, sign_rule="paper", check=True) -> CurvedComplex:
    """Objects T_v{n+ - n-} at grading |v| - n-, with the sprinkled saddles as
    d+ and the weighted reverse saddles as d-."""
    if sign_rule not in SIGN_RULES:
        raise ValueError(f"unknown sign rule {sign_rule!r}")
    ring = d.ring
    for e in d.edges.values():
        if e.weight is None:
            raise DiagramError("MissingWeight", e.id)
        if e.left_shaded is None:
            raise DiagramError("MissingShading", e.id)
    n = d.n
    npl, nmi = d.n_plus(), d.n_minus()
    verts = vertices(n)
    gens = [Gen(v, d.resolve(v), sum(v) - nmi, npl - nmi) for v in verts]
    idx = {v: k for k, v in enumerate(verts)}
    alg_c = CurvedComplex(ring, gens, {}, {}, "formal", frozenset(d.boundary),
                          {"n_plus": npl, "n_minus": nmi, "sign_rule": sign_rule})
    dplus, dminus = {}, {}
    coef = []
    for i, c in enumerate(d.order):
        coef.append(ring(d.shading_sign(c)) * (ring(d.w_over(c)) - ring(d.w_under(c))))
    for v in verts:
        for i in range(n):
            if v[i]:
                continue
            v2 = v[:i] + (1,) + v[i + 1:]
            s = sprinkle_sign(d, v, v2, sign_rule)
            a, b = gens[idx[v]].obj, gens[idx[v2]].obj
            mat_add_into(dplus, idx[v], idx[v2], cobcat.standard(a, b, ring, ring(s)), alg_c.alg)
            if coef[i]:
                mat_add_into(dminus, idx[v2], idx[v], cobcat.standard(b, a, ring, s * coef[i]), alg_c.alg)
    alg_c.dplus, alg_c.dminus = dplus, dminus
    if check:
        alg_c.check_squares()
    return alg_c


def expected_curvature(d: TangleDiagram, res):
    """sum over boundary points p of s(p) w(p) X_p on the resolution ``res``."""
    ring = d.ring
    total = cobcat.CobMorphism(res, res, {}, ring)
    for p in d.boundary:
        e = d.boundary_edge(p)
        coeff = ring(d.boundary_sign(p)) * ring(e.weight)
        if coeff:
            total = total + cobcat.dot_at(res, p, ring, coeff)
    return total


def check_curvature(d: TangleDiagram, c: CurvedComplex | None = None):
    """Compare the curvature of BS(d) with the boundary-dot formula on every
    vertex; raises IntegrityError on mismatch."""
    c = c or bs_complex(d)
    lam = curvature(c)
    for i, g in enumerate(c.gens):
        want = expected_curvature(d, g.obj)
        got = lam.get(i, cobcat.CobMorphism(g.obj, g.obj, {}, d.ring))
        if not got == want:
            raise IntegrityError(f"curvature mismatch at {g.key}: {got!r} vs {want!r}")
    return True


def bs_link_module(d: TangleDiagram, ring=None, sign_rule="paper"):
    """The module-level Batson-Seed complex of a link diagram."""
    from .tqft import apply_tqft

    if not d.is_link():
        raise DiagramError("NonemptyBoundary", "bs_link_module needs a link")
    return apply_tqft(bs_complex(d, sign_rule), ring or d.ring)


def sign_rule_iso(d: TangleDiagram, rule_a="paper", rule_b="barnatan"):
    """The isomorphism (-1)^phi(v) id from the rule_a complex to the rule_b one."""
    return sign_iso(bs_complex(d, rule_a), bs_complex(d, rule_b))


# ---------------------------------------------------------------------------
# decomposition into one-crossing pieces

def one_crossing_pieces(d: TangleDiagram):
    """Cut ``d`` into one-crossing tangles and the arc diagram joining them.

    Each edge end at a crossing becomes a boundary point named ``edge~h``
    (the edge's head) or ``edge~t`` (its tail).  Returns ``(arcs, pieces)``
    with ``arcs`` a crossingless tangle whose arcs join those names to each
    other and to the original boundary points.
    """
    comps = []
    for e in d.edges.values():
        if e.tail is None:
            comps.append(cobcat.circle([e.label]))
            continue
        ends = []
        for end, tag in ((e.tail, "t"), (e.head, "h")):
            ends.append(end[1] if end[0] == "B" else f"{e.id}~{tag}")
        comps.append(cobcat.arc([e.label], ends))
    arcs = cobcat.Resolution(frozenset(comps))
    pieces = []
    for c in d.order:
        slots = d.crossings[c]
        edges = {}
        names = []
        for k, eid in enumerate(slots):
            e = d.edges[eid]
            head = e.head == ("X", c, k)
            # a kink uses one edge at two slots; keep the local edges apart
            local = f"{eid}@{k}"
            pt = f"{eid}~{'h' if head else 't'}"
            names.append(pt)
            tail, hd = (("B", pt), ("X", c, k)) if head else (("X", c, k), ("B", pt))
            edges[local] = Edge(local, tail, hd, e.weight, e.part, e.left_shaded, e.label, e.component)
        crossing = {c: tuple(f"{eid}@{k}" for k, eid in enumerate(slots))}
        pieces.append(TangleDiagram(d.ring, crossing, [c], edges, tuple(names), names[-1],
                                    d.convention, {}, embedded=False))
    return arcs, pieces


def glued_complex(d: TangleDiagram, sign_rule="paper") -> CurvedComplex:
    """BS(d) assembled by gluing the one-crossing complexes, re-keyed by
    flat cube vertices so it can be compared with ``bs_complex(d)``."""
    arcs, pieces = one_crossing_pieces(d)
    g = glue([bs_complex(p, sign_rule, check=False) for p in pieces], arcs, d.ring)
    gens = [Gen(tuple(k[0] for k in x.key), x.obj, x.r, x.q) for x in g.gens]
    return CurvedComplex(d.ring, gens, g.dplus, g.dminus, "formal", g.boundary, g.meta)
