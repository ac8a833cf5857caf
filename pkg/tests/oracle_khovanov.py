"""Brute-force Khovanov homology over Z, written without any package code.

PD codes follow the KnotTheory convention: X[i,j,k,l] lists the edges
counterclockwise from the incoming lower strand, edge labels increase along
the orientation (consecutive within each component), the 0-smoothing pairs
(i,j),(k,l) and the 1-smoothing pairs (i,l),(j,k).  Signs on cube edges are
(-1)^(number of 1s before the changed position).  Homology per (i, j) block
via sympy's Smith normal form.
"""

from itertools import product

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form


def _positive(x, succ):
    i, j, k, l = x
    return succ[l] == j


def _successors(pd):
    labels = sorted({e for x in pd for e in x})
    # components: under strand i -> k, over strand j/l; edges chain by +1
    comps = []
    seen = set()
    adj = {}
    for x in pd:
        i, j, k, l = x
        adj.setdefault(i, set()).add(k)
        adj.setdefault(k, set()).add(i)
        adj.setdefault(j, set()).add(l)
        adj.setdefault(l, set()).add(j)
    for e in labels:
        if e in seen:
            continue
        comp = []
        stack = [e]
        while stack:
            a = stack.pop()
            if a in seen:
                continue
            seen.add(a)
            comp.append(a)
            stack.extend(adj[a])
        comps.append(sorted(comp))
    succ = {}
    for comp in comps:
        for n, a in enumerate(comp):
            succ[a] = comp[(n + 1) % len(comp)]
    return succ


def _circles(pd, state):
    parent = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x, s in zip(pd, state):
        i, j, k, l = x
        pairs = [(i, j), (k, l)] if s == 0 else [(i, l), (j, k)]
        for a, b in pairs:
            parent[find(a)] = find(b)
    for x in pd:
        for e in x:
            find(e)
    roots = sorted({find(e) for e in parent})
    return [frozenset(e for e in parent if find(e) == r) for r in roots]


def khovanov_homology(pd):
    """{(i, j): (rank, [torsion])} for a PD code (list of 4-tuples)."""
    n = len(pd)
    succ = _successors(pd)
    npos = sum(1 for x in pd if _positive(x, succ))
    nneg = n - npos
    gens = []  # (state, circles, labels)
    for state in product((0, 1), repeat=n):
        circ = _circles(pd, state)
        for lab in product((1, -1), repeat=len(circ)):  # +1 is v+ (unit), -1 is v- (X)
            gens.append((state, tuple(circ), lab))
    index = {(g[0], g[2]): k for k, g in enumerate(gens)}

    def grading(g):
        r = sum(g[0])
        return r - nneg, sum(g[2]) + r + npos - 2 * nneg

    def image(g):
        state, circ, lab = g
        out = {}
        for pos in range(n):
            if state[pos]:
                continue
            sign = (-1) ** sum(state[:pos])
            new = state[:pos] + (1,) + state[pos + 1:]
            ncirc = _circles(pd, new)
            value = dict(zip(circ, lab))
            kept = [c for c in circ if c in ncirc]
            old = [c for c in circ if c not in ncirc]
            fresh = [c for c in ncirc if c not in circ]
            results = []
            if len(old) == 2:  # merge: v+v+ -> v+, v+v- -> v-, v-v- -> 0
                a, b = value[old[0]], value[old[1]]
                if a == -1 and b == -1:
                    continue
                results.append({fresh[0]: -1 if -1 in (a, b) else 1})
            else:  # split: v+ -> v+v- + v-v+, v- -> v-v-
                a = value[old[0]]
                if a == 1:
                    results.append({fresh[0]: 1, fresh[1]: -1})
                    results.append({fresh[0]: -1, fresh[1]: 1})
                else:
                    results.append({fresh[0]: -1, fresh[1]: -1})
            for res in results:
                full = {c: value[c] for c in kept}
                full.update(res)
                key = (new, tuple(full[c] for c in ncirc))
                t = index[key]
                out[t] = out.get(t, 0) + sign
        return out

    blocks = {}
    for k, g in enumerate(gens):
        blocks.setdefault(grading(g), []).append(k)
    maps = {}
    for (i, j), idx in blocks.items():
        tgt = blocks.get((i + 1, j), [])
        tpos = {t: a for a, t in enumerate(tgt)}
        M = [[0] * len(idx) for _ in tgt]
        for b, k in enumerate(idx):
            for t, v in image(gens[k]).items():
                M[tpos[t]][b] = v
        maps[(i, j)] = M

    def invariants(M):
        if not M or not M[0]:
            return []
        D = smith_normal_form(Matrix(M), domain=ZZ)
        return [abs(int(D[a, a])) for a in range(min(D.shape)) if D[a, a] != 0]

    result = {}
    for (i, j), idx in blocks.items():
        out_inv = invariants(maps[(i, j)])
        in_inv = invariants(maps.get((i - 1, j), []))
        rank = len(idx) - len(out_inv) - len(in_inv)
        tors = sorted(d for d in in_inv if d > 1)
        if rank or tors:
            result[(i, j)] = (rank, tors)
    return result


TREFOIL_LEFT = [(1, 4, 2, 5), (3, 6, 4, 1), (5, 2, 6, 3)]
TREFOIL_RIGHT = [(1, 5, 2, 4), (3, 1, 4, 6), (5, 3, 6, 2)]
FIGURE_EIGHT = [(4, 2, 5, 1), (8, 6, 1, 5), (6, 3, 7, 4), (2, 7, 3, 8)]
