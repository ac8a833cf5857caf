"""Separating a two-part movie and splitting it into its parts.

Run from the repository root:  python demos/splitting.py
"""

from pathlib import Path

from khcob.moves import format_movie, parse_movie, sep_movie, sep_square, split_movie

DATA = Path(__file__).parent / "data"

# Two circles in different parts (weights 0 and 1) are pushed through each
# other with two R2 moves, saddled, and pulled apart again.
m = parse_movie((DATA / "splitting.movie").read_text())
print(format_movie(m))

# Separation changes crossings so the higher part is always on top.  The
# crossing changes are isomorphisms because 1 - 0 is a unit.
s = sep_movie(m)
print("crossings changed per frame:", s.changed)
print(format_movie(s.movie))

res = sep_square(m)
print("square commutes up to homotopy, unit", res.unit)

# With the parts separated, each part runs in its own disk
print(format_movie(split_movie(s.movie)))
