"""Maps induced by movies: Reidemeister moves, closed surfaces and a
crossing change.

Run from the repository root:  python demos/movie_maps.py
"""

from pathlib import Path

from khcob import Ring, kj_number
from khcob.ckom import filtration_level, identity_map, verify_chain_map
from khcob.moves import crossing_change, movie_map, parse_movie
from khcob.tqft import homotopy_solve, induced_map

DATA = Path(__file__).parent / "data"
Z, Q = Ring("Z"), Ring("Q")

# A Reidemeister 1 move on the weighted Hopf link.  The chain map is filtered
# of degree 0 and induces an isomorphism on homology.
m = parse_movie((DATA / "hopf_r1.movie").read_text())
f = movie_map(m)
print("R1 on the Hopf link: chain map", verify_chain_map(f)["ok"],
      " degree", f.degree(), " filtration level", filtration_level(f))
print("  induced map on Kh_BS:", [[Q.to_json(x) for x in row] for row in induced_map(f, "bs", Q).matrix()])

# Closed surfaces evaluate to scalars (Khovanov-Jacobsson numbers)
for name in ("torus", "dotted_sphere"):
    mv = parse_movie((DATA / f"{name}.movie").read_text(), Z)
    print(f"KJ({name}) = {kj_number(mv)}")

# Changing a crossing between strands of weights 0 and 1 is invertible up to
# the weight difference: doing it twice is (w_over - w_under) times the
# identity, up to the shading sign.
hopf = m.initial
c = hopf.order[0]
h2, cc = crossing_change(hopf, c)
_, back = crossing_change(h2, c)
k = hopf.shading_sign(c) * (hopf.w_over(c) - hopf.w_under(c))
print("CC twice equals", k, "times the identity:", cc.then(back).equals(identity_map(cc.source, k)))

# The R1 round trip is homotopic to the identity, with the homotopy found by
# solving a linear system
from khcob.moves import event, reidemeister_map, step

ev = m.events[0]
g = reidemeister_map(step(hopf, ev).after, None, event("r1 remove crossing=k"))
res = homotopy_solve(f.then(g), identity_map(f.source), filtered_level=0, unit="sign")
print("g o f homotopic to", res.unit, "times the identity")
