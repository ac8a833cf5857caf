"""Khovanov and Batson-Seed homology of weighted tangles, with the maps
induced by link cobordisms given as movies."""

from .bs import bs_complex, check_curvature, glued_complex, sign_rule_iso
from .ckom import ChainMap, CurvedComplex, IntegrityError, identity_map, verify_chain_map
from .coeff import Ring, RingError, is_invertible, ring_make
from .diagram import (DiagramError, TangleDiagram, disjoint_union, format_tangle, from_braid,
                      from_pd, parse_tangle, unknot)
from .moves import (Movie, event, format_movie, movie_map, parse_movie, sep_movie, sep_square,
                    split_movie)
from .tqft import homology, homotopy_solve, induced_map, kj_number, spectral_pages

__version__ = "0.1.0"
