"""Property suites run by ``khcob verify``.

Each suite is a list of named checks; a check returns None on success and a
short message on failure.  Random inputs come from one seeded generator so a
failing run can be replayed with the same ``--seed``.
"""

from __future__ import annotations

import random

from . import cobcat
from .bs import bs_complex, check_curvature, glued_complex, sign_rule_iso
from .ckom import complex_differences, curvature, identity_map, verify_chain_map
from .coeff import Ring, is_invertible, ring_make
from .diagram import (disjoint_union, euler_check, format_tangle, from_braid, mirror, parse_tangle,
                      reverse_component, unknot, with_weights)


def random_braid(rng, strands, length):
    return [rng.choice([1, -1]) * rng.randint(1, strands - 1) for _ in range(length)]


def random_diagram(rng, ring, max_crossings=4, closed=False, weights=(0, 1, 2)):
    """A weighted braid-like tangle or link with random component
    orientations and weights drawn from ``weights``."""
    strands = rng.randint(2, 3)
    word = random_braid(rng, strands, rng.randint(1, max_crossings))
    d = from_braid(word, strands, ring=ring, closed=closed)
    for name in sorted(d.components):
        if rng.random() < 0.5:
            d = reverse_component(d, name)
    if rng.random() < 0.5:
        d = mirror(d)
    return with_weights(d, {k: rng.choice(weights) for k in sorted(d.components)})


# ---------------------------------------------------------------------------
# suites

def _coeff(rng):
    def axioms():
        for spec in ("Z", "Q", "Fp:5"):
            R = ring_make(spec)
            for _ in range(30):
                a, b, c = (R(rng.randint(-9, 9)) for _ in range(3))
                if R.is_field:
                    a = a / R(rng.choice([1, 2, 3]))
                if (a + b) * c != a * c + b * c or (a * b) * c != a * (b * c) or a + R.zero != a:
                    return f"ring axioms fail in {spec}"
        return None

    def units():
        Z, Q = Ring("Z"), Ring("Q")
        if not all(is_invertible(Z(x)) == (x in (1, -1)) for x in range(-5, 6)):
            return "units of Z"
        if not all(is_invertible(Q(x)) == (x != 0) for x in range(-5, 6)):
            return "units of Q"
        return None

    return [("ring axioms", axioms), ("units", units)]


def _diagram(rng):
    Q = Ring("Q")

    def roundtrip():
        for _ in range(10):
            d = random_diagram(rng, Q, 5, closed=rng.random() < 0.5)
            d2 = parse_tangle(format_tangle(d), Q)
            if format_tangle(d2) != format_tangle(d):
                return "format/parse round trip changed the diagram"
            euler_check(d2)
        return None

    def writhe():
        for _ in range(10):
            d = random_diagram(rng, Q, 5)
            if mirror(d).n_plus() != d.n_minus():
                return "mirror does not swap crossing signs"
        return None

    return [("parse round trip", roundtrip), ("mirror swaps signs", writhe)]


def _cobcat(rng):
    Q = Ring("Q")
    c = cobcat.circle(["a"])
    E = cobcat.EMPTY
    S = cobcat.Resolution.of([c])

    def closed(dots):
        b = cobcat.birth(E, c, Q)
        mid = cobcat.identity(S, Q)
        for _ in range(dots):
            mid = cobcat.compose(cobcat.dot_on(S, c, Q), mid)
        return cobcat.compose(cobcat.death(S, c, Q), cobcat.compose(mid, b)).scalar()

    def spheres():
        got = [closed(k) for k in range(3)]
        return None if got == [0, 1, 0] else f"sphere values {got}"

    def torus():
        # one circle with two atoms splits into two circles and merges back
        ab = cobcat.circle(["a", "b"])
        one = cobcat.Resolution.of([ab])
        two = cobcat.Resolution.of([c, cobcat.circle(["b"])])
        tube = cobcat.compose(cobcat.standard(two, one, Q), cobcat.standard(one, two, Q))
        t = cobcat.compose(cobcat.death(one, ab, Q), cobcat.compose(tube, cobcat.birth(E, ab, Q)))
        return None if t.scalar() == 2 else f"torus value {t.scalar()}"

    return [("sphere relations", spheres), ("torus", torus)]


def _bs(rng):
    Q = Ring("Q")

    def curv():
        for _ in range(8):
            check_curvature(random_diagram(rng, Q, 4))
        return None

    def links():
        for _ in range(5):
            c = bs_complex(random_diagram(rng, Q, 4, closed=True))
            if any(curvature(c).values()):
                return "link complex is curved"
        return None

    def rules():
        for _ in range(4):
            d = random_diagram(rng, Q, 4)
            f = sign_rule_iso(d)
            if not verify_chain_map(f)["ok"]:
                return "sign rules not isomorphic"
        return None

    return [("curvature formula", curv), ("links are flat", links), ("sign-rule isomorphism", rules)]


def _ckom(rng):
    Q = Ring("Q")

    def gluing():
        for _ in range(4):
            d = random_diagram(rng, Q, 4)
            diff = complex_differences(glued_complex(d), bs_complex(d))
            if diff:
                return "glued complex differs: " + "; ".join(diff)
        return None

    return [("gluing", gluing)]


def _moves(rng):
    from .moves import crossing_change, event, reidemeister_map, step

    Q = Ring("Q")

    def cc():
        for _ in range(4):
            d = random_diagram(rng, Q, 3)
            c = rng.choice(d.order)
            d2, f = crossing_change(d, c)
            _, g = crossing_change(d2, c)
            if not verify_chain_map(f)["ok"]:
                return "crossing change is not a chain map"
            k = Q(d.shading_sign(c)) * (Q(d.w_over(c)) - Q(d.w_under(c)))
            if not f.then(g).equals(identity_map(f.source, k)):
                return "CC_rev CC is not the weight difference"
        return None

    def r1():
        for _ in range(3):
            d = random_diagram(rng, Q, 3, closed=True)
            e = rng.choice(sorted(d.edges))
            side, sign = rng.choice("LR"), rng.choice("+-")
            ev = event(f"r1 add edge={e} side={side} sign={sign} new_crossing=z new_edges=(z1,z2)")
            st = step(d, ev)
            f = reidemeister_map(d, None, ev)
            g = reidemeister_map(st.after, None, event("r1 remove crossing=z"))
            if not verify_chain_map(f)["ok"] or not f.then(g).equals(identity_map(f.source)):
                return f"R1 on {e}: gf is not the identity"
        return None

    return [("crossing change", cc), ("R1 round trip", r1)]


def _tqft(rng):
    from .tqft import euler_check as chain_euler, homology, spectral_pages, apply_tqft

    Q = Ring("Q")

    def unknot_rank():
        h = homology(bs_complex(unknot(0, Ring("Z"))), "kh")
        return None if h.ranks() == {(0, -1): 1, (0, 1): 1} else f"unknot {h.ranks()}"

    def euler():
        for _ in range(4):
            d = random_diagram(rng, Q, 4, closed=True)
            mc = apply_tqft(bs_complex(d), Q)
            for w in ("kh", "bs"):
                if not chain_euler(mc, homology(mc, w), w):
                    return f"Euler characteristic mismatch ({w})"
        return None

    def pages():
        for _ in range(3):
            d = random_diagram(rng, Q, 4, closed=True)
            p = spectral_pages(bs_complex(d), Q)
            if sum(p.infinity.values()) != homology(bs_complex(d), "bs").rank():
                return "E_infinity differs from the total homology"
        return None

    def kunneth():
        a = random_diagram(rng, Q, 3, closed=True, weights=(0,))
        b = random_diagram(rng, Q, 3, closed=True, weights=(0,))
        ha, hb = homology(bs_complex(a), "kh").ranks(), homology(bs_complex(b), "kh").ranks()
        want = {}
        for (i1, j1), r1 in ha.items():
            for (i2, j2), r2 in hb.items():
                want[(i1 + i2, j1 + j2)] = want.get((i1 + i2, j1 + j2), 0) + r1 * r2
        got = homology(bs_complex(disjoint_union(a, b)), "kh").ranks()
        return None if got == want else "Kunneth fails"

    return [("unknot", unknot_rank), ("Euler characteristic", euler), ("spectral sequence", pages),
            ("Kunneth", kunneth)]


SUITES = {"coeff": _coeff, "diagram": _diagram, "cobcat": _cobcat, "ckom": _ckom, "bs": _bs,
          "moves": _moves, "tqft": _tqft}


def run(suite="all", seed=0):
    """Run one suite (or all); returns a list of (suite, check, message)
    where message is None for a pass."""
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        rng = random.Random(f"{seed}:{name}")
        for label, check in SUITES[name](rng):
            try:
                msg = check()
            except Exception as exc:  # a crash is a failed check, reported with its type
                msg = f"{type(exc).__name__}: {exc}"
            out.append((name, label, msg))
    return out


__all__ = ["SUITES", "random_diagram", "random_braid", "run"]
