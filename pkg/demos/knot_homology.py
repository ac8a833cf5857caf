"""Khovanov and Batson-Seed homology of a few small links.

Run from the repository root:  python demos/knot_homology.py
"""

from pathlib import Path

from khcob import Ring, bs_complex, from_pd, homology, spectral_pages
from khcob.diagram import parse_tangle

DATA = Path(__file__).parent / "data"
Z, Q = Ring("Z"), Ring("Q")

# A PD code lists each crossing's four edges counterclockwise, starting at
# the incoming under-strand.  Weights are given per component.
trefoil = from_pd([(1, 5, 2, 4), (3, 1, 4, 6), (5, 3, 6, 2)], [0], ring=Z)
print("right trefoil: n+ =", trefoil.n_plus(), " n- =", trefoil.n_minus())

# Khovanov homology over Z is bigraded; the trefoil has a Z/2 in degree (3, 7)
for (i, j), (rank, torsion) in sorted(homology(bs_complex(trefoil), "kh", Z).groups.items()):
    if rank or torsion:
        terms = ([f"Z^{rank}"] if rank else []) + [f"Z/{t}" for t in torsion]
        print(f"  Kh^{{{i},{j}}} = " + " + ".join(terms))

# The same file format the CLI reads
fig8 = parse_tangle((DATA / "figure8.tng").read_text(), Q)
print("figure eight, total rank over Q:", homology(bs_complex(fig8), "kh").rank())

# Give the two components of the Hopf link different weights.  The
# Batson-Seed differential d = d+ + d- then sees the linking and the total
# homology is that of the two-component unlink, shifted in the l grading.
hopf = parse_tangle((DATA / "hopf.tng").read_text(), Q)
c = bs_complex(hopf)
print("Hopf, weights (0, 1)")
print("  Kh dims:   ", homology(c, "kh").ranks())
print("  Kh_BS dims:", homology(c, "bs").ranks())

# The j-filtration gives a spectral sequence from Kh (page 2) to Kh_BS
pages = spectral_pages(c, Q)
for k, table in sorted(pages.pages.items()):
    print(f"  E_{k}: total {sum(table.values())}")
print("  collapses at E_%d" % pages.collapse)
