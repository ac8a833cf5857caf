"""The Khovanov TQFT on closed complexes, homology, induced maps, homotopies
and the j-filtration spectral sequence.

Module generators label each circle of a resolution with ``0`` (the unit
``1`` of V = R[X]/(X^2), degree +1) or ``1`` (``X``, degree -1).  A module
generator stores ``q = l`` (the Batson-Seed grading); ``i = r`` and
``j = l + i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import linalg
from .ckom import (ChainMap, CurvedComplex, Gen, IntegrityError, ModuleAlg, associated_graded,
                   curvature, mat_add_into, mat_compose, mat_entries, mat_sum, verify_chain_map)
from .coeff import Ring


class NotAField(ValueError):
    pass


# ---------------------------------------------------------------------------
# the functor

def _labels(res):
    return list(product((0, 1), repeat=len(res.circles)))


def _evaluate(m, ring):
    """Matrix of a closed cobordism: ``src labels -> {tgt labels: coeff}``."""
    S = m.source.circles
    T = m.target.circles
    spos = {c: k for k, c in enumerate(S)}
    out = {}
    for lab in product((0, 1), repeat=len(S)):
        row = {}
        for cfg, coeff in m.terms.items():
            partial = [({}, ring(coeff))]
            for part in cfg.parts:
                if any(not c.is_circle for c in part.src | part.tgt):
                    raise IntegrityError("TQFT applied to a cobordism with boundary")
                a = part.dot + sum(lab[spos[c]] for c in part.src)
                if a >= 2:
                    partial = []
                    break
                tg = list(part.tgt)
                if not tg:
                    if a == 1:
                        continue
                    partial = []
                    break
                if a == 1:
                    opts = [{t: 1 for t in tg}]
                else:
                    opts = [{t: (0 if t == t0 else 1) for t in tg} for t0 in tg]
                partial = [({**asg, **o}, c) for asg, c in partial for o in opts]
            for asg, c in partial:
                key = tuple(asg[t] for t in T)
                v = row.get(key, 0) + c
                if v:
                    row[key] = v
                else:
                    row.pop(key, None)
        if row:
            out[lab] = row
    return out


@dataclass
class _Layout:
    module: CurvedComplex
    start: list
    labels: list


def _layout(c: CurvedComplex, ring) -> _Layout:
    cache = c.meta.setdefault("_tqft", {})
    if ring in cache:
        return cache[ring]
    if c.boundary:
        raise IntegrityError("TQFT needs a closed complex (empty boundary)")
    gens, start, labels = [], [], []
    for g in c.gens:
        start.append(len(gens))
        labs = _labels(g.obj)
        labels.append({lab: k for k, lab in enumerate(labs)})
        for lab in labs:
            deg = sum(1 - 2 * b for b in lab)
            gens.append(Gen((g.key, lab), lab, g.r, g.q + deg))
    mc = CurvedComplex(ring, gens, {}, {}, "module", frozenset(), dict(c.meta, formal=c))
    mc.meta.pop("_tqft", None)
    lay = _Layout(mc, start, labels)
    cache[ring] = lay
    mc.dplus = _tqft_matrix(c.dplus, lay, lay, ring)
    mc.dminus = _tqft_matrix(c.dminus, lay, lay, ring)
    return lay


def _tqft_matrix(M, src: _Layout, tgt: _Layout, ring):
    alg = ModuleAlg(ring)
    out = {}
    for i, j, mor in mat_entries(M):
        for lab, row in _evaluate(mor, ring).items():
            a = src.start[i] + src.labels[i][lab]
            for lab2, v in row.items():
                mat_add_into(out, a, tgt.start[j] + tgt.labels[j][lab2], v, alg)
    return out


def apply_tqft(x, ring=None):
    """Module complex of a closed formal complex, or module map of a formal
    ChainMap (the complexes are converted on the way)."""
    if isinstance(x, ChainMap):
        ring = ring or x.source.ring
        if x.source.carrier == "module":
            return x
        s, t = _layout(x.source, ring), _layout(x.target, ring)
        return ChainMap(s.module, t.module, _tqft_matrix(x.blocks, s, t, ring), x.odd, x.label)
    ring = ring or x.ring
    if x.carrier == "module":
        return x
    return _layout(x, ring).module


def i_grading(g: Gen):
    return g.r


def j_grading(g: Gen):
    return g.q + g.r


# ---------------------------------------------------------------------------
# homology

@dataclass
class GradedHomology:
    ring: Ring
    grading: str  # "ij" or "l"
    groups: dict = field(default_factory=dict)  # grading -> (rank, torsion)

    def rank(self, key=None):
        if key is None:
            return sum(r for r, _ in self.groups.values())
        return self.groups.get(key, (0, []))[0]

    def ranks(self):
        return {k: r for k, (r, _) in self.groups.items() if r}

    def to_json(self):
        out = []
        for k in sorted(self.groups):
            rank, tors = self.groups[k]
            if not rank and not tors:
                continue
            if self.grading == "ij":
                out.append({"i": k[0], "j": k[1], "rank": rank, "torsion": list(tors)})
            else:
                out.append({"l": k, "rank": rank, "torsion": list(tors)})
        return {"ring": self.ring.spec, "grading": self.grading, "groups": out}


def _blocks(mc: CurvedComplex, which):
    """Returns (D, key, step): key(g) = (block, t) with D mapping t -> t + step."""
    if which == "kh":
        return mc.dplus, (lambda g: ((j_grading(g),), g.r)), 1
    if which == "bs":
        return mc.d(), (lambda g: ((), g.q)), -1
    raise ValueError(f"unknown homology flavour {which!r}")


def _out_key(k, step):
    return (k[0], k[1] + step)


class _Block:
    """Homology of one grading block with explicit representatives."""

    def __init__(self, ring, idx, out_rows, in_cols):
        self.ring = ring
        self.idx = idx
        self.pos = {g: k for k, g in enumerate(idx)}
        self.out_rows = out_rows  # source gen -> {tgt gen: v}
        self.in_cols = in_cols  # list of vectors {gen in idx: v}
        if ring.is_field:
            self._field()
        else:
            self._integer()

    # -- fields
    def _field(self):
        ring = self.ring
        keys = list(self.idx)
        rows = {}
        for g in keys:
            for t, v in self.out_rows.get(g, {}).items():
                rows.setdefault(t, {})[g] = v
        kernel = linalg.kernel_basis(rows, keys, ring)
        kernel.sort(key=lambda vec: max(vec))
        self.piv = {}
        for vec in self.in_cols:
            self._insert(vec, {})
        self.reps = []
        for vec in kernel:
            k = len(self.reps)
            if self._insert(vec, {k: ring.one}):
                self.reps.append(vec)
        self.rank = len(self.reps)
        self.torsion = []

    def _insert(self, vec, tag):
        r = {c: self.ring(v) for c, v in vec.items() if v}
        tag = dict(tag)
        while r:
            c = min(r)
            p = self.piv.get(c)
            if p is None:
                inv = self.ring.inv(r[c])
                self.piv[c] = ({k: v * inv for k, v in r.items()}, {k: v * inv for k, v in tag.items()})
                return True
            f = r[c]
            row, ptag = p
            for k, v in row.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
            for k, v in ptag.items():
                nv = tag.get(k, 0) - f * v
                if nv:
                    tag[k] = nv
                else:
                    tag.pop(k, None)
        return False

    def coords(self, z):
        """Coordinates of the class of cycle z in the representative basis."""
        if not self.ring.is_field:
            return self._int_coords(z)
        r = {c: self.ring(v) for c, v in z.items() if v}
        acc = {}
        while r:
            c = min(r)
            p = self.piv.get(c)
            if p is None:
                raise IntegrityError("vector is not a cycle")
            f = r[c]
            row, tag = p
            for k, v in row.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
            for k, v in tag.items():
                acc[k] = acc.get(k, 0) + f * v
        return {k: v for k, v in acc.items() if v}

    # -- integers
    def _integer(self):
        n = len(self.idx)
        tgts = sorted({t for g in self.idx for t in self.out_rows.get(g, {})})
        tpos = {t: k for k, t in enumerate(tgts)}
        A = [[0] * n for _ in tgts]
        for g in self.idx:
            for t, v in self.out_rows.get(g, {}).items():
                A[tpos[t]][self.pos[g]] = int(v)
        if tgts:
            _, D, V = linalg.smith_normal_form(A)
            rk = sum(1 for k in range(min(len(tgts), n)) if D[k][k])
        else:
            V = [[int(a == b) for b in range(n)] for a in range(n)]
            rk = 0
        self.Vinv = unimodular_inverse(V)
        self.r1 = rk
        f0 = n - rk
        Y = [[0] * len(self.in_cols) for _ in range(f0)]
        for col, vec in enumerate(self.in_cols):
            y = self._kernel_coords(vec)
            for a in range(f0):
                Y[a][col] = y[a]
        if f0 and self.in_cols:
            U2, D2, _ = linalg.smith_normal_form(Y)
            r2 = sum(1 for k in range(min(f0, len(self.in_cols))) if D2[k][k])
            divs = [D2[k][k] for k in range(r2)]
        else:
            U2 = [[int(a == b) for b in range(f0)] for a in range(f0)]
            r2, divs = 0, []
        self.U2 = U2
        self.r2 = r2
        self.divs = divs
        U2inv = unimodular_inverse(U2) if f0 else []
        # kernel basis K = V[:, rk:]; new basis K' = K U2^{-1}
        K = [[V[a][rk + b] for b in range(f0)] for a in range(n)]
        Kp = [[sum(K[a][t] * U2inv[t][b] for t in range(f0)) for b in range(f0)] for a in range(n)]
        self.reps = []
        for b in range(r2, f0):
            self.reps.append({self.idx[a]: Kp[a][b] for a in range(n) if Kp[a][b]})
        self.torsion = [d for d in divs if d > 1]
        self.torsion_reps = [{self.idx[a]: Kp[a][b] for a in range(n) if Kp[a][b]}
                             for b in range(r2) if divs[b] > 1]
        self.rank = f0 - r2

    def _kernel_coords(self, vec):
        n = len(self.idx)
        x = [0] * n
        for g, v in vec.items():
            x[self.pos[g]] = int(v)
        y = [sum(self.Vinv[a][b] * x[b] for b in range(n)) for a in range(n)]
        if any(y[:self.r1]):
            raise IntegrityError("vector is not a cycle")
        return y[self.r1:]

    def _int_coords(self, z):
        y = self._kernel_coords(z)
        f0 = len(y)
        yp = [sum(self.U2[a][b] * y[b] for b in range(f0)) for a in range(f0)]
        return {k: yp[self.r2 + k] for k in range(f0 - self.r2) if yp[self.r2 + k]}


def unimodular_inverse(M):
    n = len(M)
    if n == 0:
        return []
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c])
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    out = [[x for x in row[n:]] for row in A]
    if any(x.denominator != 1 for row in out for x in row):
        raise IntegrityError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


class HomologyData:
    """Homology of a module complex together with per-block representatives."""

    def __init__(self, mc: CurvedComplex, which="kh", ring=None):
        ring = ring or mc.ring
        self.ring = ring
        self.mc = mc
        self.which = which
        if which == "bs" and mc.dminus and mc.dplus:
            lam = curvature(mc)
            if any(v for v in lam.values()):
                raise IntegrityError("total differential does not square to zero")
        D, key, step = _blocks(mc, which)
        self.key = key
        self.step = step
        self.D = D
        blocks = {}
        for i, g in enumerate(mc.gens):
            blocks.setdefault(key(g), []).append(i)
        for i, j, _ in mat_entries(D):
            if key(mc.gens[j]) != _out_key(key(mc.gens[i]), step):
                raise IntegrityError("differential is not homogeneous")
        incoming = {}
        for i, j, v in mat_entries(D):
            incoming.setdefault(key(mc.gens[j]), {}).setdefault(i, {})[j] = v
        self.blocks = {}
        for k, idx in sorted(blocks.items()):
            cols = [dict(sorted(c.items())) for _, c in sorted(incoming.get(k, {}).items())]
            self.blocks[k] = _Block(ring, idx, {i: D.get(i, {}) for i in idx}, cols)

    def grading_of(self, k):
        block, t = k
        if self.which == "kh":
            return (t, block[0])
        return t

    def result(self) -> GradedHomology:
        h = GradedHomology(self.ring, "ij" if self.which == "kh" else "l")
        for k, b in self.blocks.items():
            if b.rank or b.torsion:
                h.groups[self.grading_of(k)] = (b.rank, list(b.torsion))
        return h

    def basis(self):
        """Ordered list of (grading, rep index) for the free part."""
        out = []
        for k in sorted(self.blocks, key=lambda k: self.grading_of(k)):
            for r in range(self.blocks[k].rank):
                out.append((self.grading_of(k), r))
        return out


def homology(x, which="kh", ring=None) -> GradedHomology:
    """Graded homology of a complex (formal closed complexes go through the TQFT).

    ``kh``: d+ only, bigraded (i, j).  ``bs``: the total differential,
    graded by l."""
    mc = apply_tqft(x, ring) if x.carrier == "formal" else x
    return HomologyData(mc, which, ring or mc.ring).result()


def euler_check(mc: CurvedComplex, h: GradedHomology, which="kh"):
    """Alternating sums of chain ranks and homology ranks agree (per j for kh,
    with sign (-1)^l for bs)."""
    chain, hom = {}, {}
    for g in mc.gens:
        if which == "kh":
            chain[j_grading(g)] = chain.get(j_grading(g), 0) + (-1) ** (g.r % 2)
        else:
            chain[0] = chain.get(0, 0) + (-1) ** (g.q % 2)
    for k, (rank, _) in h.groups.items():
        if which == "kh":
            hom[k[1]] = hom.get(k[1], 0) + (-1) ** (k[0] % 2) * rank
        else:
            hom[0] = hom.get(0, 0) + (-1) ** (k % 2) * rank
    return {k: v for k, v in chain.items() if v} == {k: v for k, v in hom.items() if v}


# ---------------------------------------------------------------------------
# induced maps

@dataclass
class InducedMap:
    source_basis: list
    target_basis: list
    entries: dict  # (src pos, tgt pos) -> coeff

    def matrix(self):
        m = [[0] * len(self.source_basis) for _ in self.target_basis]
        for (a, b), v in self.entries.items():
            m[b][a] = v
        return m

    def is_zero(self):
        return not self.entries

    def scaled(self, s):
        return InducedMap(self.source_basis, self.target_basis,
                          {k: v * s for k, v in self.entries.items() if v * s})

    def equal_up_to_sign(self, other):
        return self.entries == other.entries or self.entries == other.scaled(-1).entries

    def to_json(self, ring):
        return {"source": [list(_jsonable(b)) for b in self.source_basis],
                "target": [list(_jsonable(b)) for b in self.target_basis],
                "entries": [[a, b, ring.to_json(v)] for (a, b), v in sorted(self.entries.items())]}


def _jsonable(b):
    g, r = b
    return (list(g) if isinstance(g, tuple) else g, r)


def induced_map(f: ChainMap, which="kh", ring=None, check=True) -> InducedMap:
    """Matrix of the map on homology in the representative bases."""
    ring = ring or f.source.ring
    if which == "kh":
        f = associated_graded(f)
    if check:
        rep = verify_chain_map(f, plus_only=(which == "kh"))
        if not rep["ok"]:
            raise IntegrityError(f"not a chain map: {rep['residual'][:3]}")
    fm = apply_tqft(f, ring)
    src = HomologyData(fm.source, which, ring)
    tgt = HomologyData(fm.target, which, ring)
    sb, tb = src.basis(), tgt.basis()
    tpos = {b: k for k, b in enumerate(tb)}
    entries = {}
    for a, (grading, r) in enumerate(sb):
        blk = next(b for k, b in src.blocks.items() if src.grading_of(k) == grading)
        rep = blk.reps[r]
        img = {}
        for i, v in rep.items():
            for j, w in fm.blocks.get(i, {}).items():
                img[j] = img.get(j, 0) + v * w
        img = {j: v for j, v in img.items() if v}
        by_block = {}
        for j, v in img.items():
            by_block.setdefault(tgt.key(fm.target.gens[j]), {})[j] = v
        for k, vec in by_block.items():
            blk2 = tgt.blocks[k]
            for r2, v in blk2.coords(vec).items():
                entries[(a, tpos[(tgt.grading_of(k), r2)])] = v
    return InducedMap(sb, tb, entries)


# ---------------------------------------------------------------------------
# homotopies

def _hom_basis(x: Gen, y: Gen, degree, carrier, nb):
    """Basis of the degree-``degree`` morphisms x -> y: scalars for modules,
    all-disk dotted configurations for formal objects."""
    if carrier == "module":
        return [None] if y.q - x.q == degree else []
    from . import cobcat

    curves = cobcat.curves(x.obj.comps, y.obj.comps)
    # each curve bounds a disk: degree = #curves - |B|/2 - 2 dots + (q(y) - q(x))
    dots2 = len(curves) - nb // 2 + (y.q - x.q) - degree
    if dots2 < 0 or dots2 % 2:
        return []
    k = dots2 // 2
    out = []
    from itertools import combinations

    for chosen in combinations(range(len(curves)), k):
        parts = [cobcat.Part(s, t, 1 if n in chosen else 0) for n, (s, t) in enumerate(curves)]
        out.append(cobcat.DottedConfig(frozenset(parts)))
    return out


def _vectorize(M, alg, carrier):
    """Flatten a matrix of morphisms into {(i, j, basis key): coeff}."""
    out = {}
    for i, j, v in mat_entries(M):
        if carrier == "module":
            out[(i, j, None)] = v
        else:
            for cfg, c in v.canonical().items():
                out[(i, j, cfg)] = c
    return {k: v for k, v in out.items() if v}


@dataclass
class HomotopyResult:
    unit: object
    h: ChainMap


def homotopy_solve(f: ChainMap, g: ChainMap, filtered_level=None, unit="fixed", plus_only=False,
                   shift=None):
    """Find (u, h) with f - u g = d h + h d.

    ``unit`` is ``"fixed"`` (u = 1), ``"sign"`` (u = +1 or -1) or
    ``"unknown"`` (any nonzero u).  With ``filtered_level`` p the homotopy
    is restricted to terms of filtration level at most p (for degree-0 maps
    this means homological shifts at most -1); ``shift`` keeps only terms of
    that exact homological shift.  Returns None if no such homotopy exists.
    """
    ring = f.source.ring
    if not ring.is_field:
        raise NotAField("homotopy_solve needs field coefficients")
    A, B = f.source, f.target
    alg = A.alg
    carrier = A.carrier
    degs = f.degrees() | g.degrees()
    if len(degs) > 1:
        raise ValueError("maps are not homogeneous of the same degree")
    deg = degs.pop() if degs else 0
    hdeg = deg + 1
    nb = len(A.boundary)
    da = A.dplus if plus_only else A.d()
    db = B.dplus if plus_only else B.d()
    # unknowns
    unknowns = []
    for i, x in enumerate(A.gens):
        for j, y in enumerate(B.gens):
            s = y.r - x.r
            if s % 2 == 0:
                continue
            if filtered_level is not None and hdeg + s > filtered_level:
                continue
            if shift is not None and s != shift:
                continue
            for cfg in _hom_basis(x, y, hdeg, carrier, nb):
                unknowns.append((i, j, cfg))
    columns = {}
    from . import cobcat

    da_in = {}
    for w, row in da.items():
        for i in row:
            da_in.setdefault(i, []).append(w)

    for k, (i, j, cfg) in enumerate(unknowns):
        if carrier == "module":
            ent = ring.one
        else:
            ent = cobcat.CobMorphism(A.gens[i].obj, B.gens[j].obj, {cfg: ring.one}, ring)
        L = {}
        for t, v in db.get(j, {}).items():
            mat_add_into(L, i, t, alg.compose(v, ent), alg)
        for w in da_in.get(i, ()):
            mat_add_into(L, w, j, alg.compose(ent, da[w][i]), alg)
        columns[k] = _vectorize(L, alg, carrier)
    fv = _vectorize(f.blocks, alg, carrier)
    gv = _vectorize(g.blocks, alg, carrier)
    rows_keys = set(fv) | set(gv)
    for col in columns.values():
        rows_keys |= set(col)
    rows_keys = sorted(rows_keys, key=repr)
    rpos = {r: n for n, r in enumerate(rows_keys)}
    U = "u"

    def system(with_g, fixed_u):
        rows = [dict() for _ in rows_keys]
        for k, col in columns.items():
            for r, v in col.items():
                rows[rpos[r]][k] = v
        rhs = [ring.zero] * len(rows_keys)
        for r, v in fv.items():
            rhs[rpos[r]] += v
        if with_g:
            for r, v in gv.items():
                if fixed_u is None:
                    rows[rpos[r]][U] = v
                else:
                    rhs[rpos[r]] -= fixed_u * v
        return rows, rhs

    def build(sol, u):
        H = {}
        for k, v in sol.items():
            if k == U or not v:
                continue
            i, j, cfg = unknowns[k]
            ent = v if carrier == "module" else cobcat.CobMorphism(A.gens[i].obj, B.gens[j].obj, {cfg: v}, ring)
            mat_add_into(H, i, j, ent, alg)
        return HomotopyResult(u, ChainMap(A, B, H, odd=True, label="h"))

    def keyed(rows):
        # linalg wants column keys comparable: map U to -1
        return [{(-1 if c == U else c): v for c, v in r.items()} for r in rows]

    if unit == "fixed":
        rows, rhs = system(True, ring.one)
        sol = linalg.solve(rows, rhs, ring)
        return None if sol is None else build(sol, ring.one)
    if unit == "sign":
        for u in (ring.one, -ring.one):
            rows, rhs = system(True, u)
            sol = linalg.solve(rows, rhs, ring)
            if sol is not None:
                return build(sol, u)
        return None
    rows, rhs = system(True, None)
    sol = linalg.solve(keyed(rows), rhs, ring)
    if sol is None:
        return None
    u = sol.pop(-1, ring.zero)
    if u:
        return build(sol, u)
    # u came out 0: a nonzero u is possible only if g is itself null-homotopic
    rows, _ = system(False, None)
    rhs = [ring.zero] * len(rows_keys)
    for r, v in gv.items():
        rhs[rpos[r]] += v
    solg = linalg.solve(rows, rhs, ring)
    if solg is None:
        return None
    for k, v in solg.items():
        sol[k] = sol.get(k, 0) - v
    return build(sol, ring.one)


# ---------------------------------------------------------------------------
# spectral sequence

@dataclass
class Pages:
    pages: dict  # page index -> {(l, j): dim}
    infinity: dict
    collapse: int

    def total(self, k):
        return sum(self.pages[k].values()) if k in self.pages else sum(self.infinity.values())


def spectral_pages(x, ring=None) -> Pages:
    """Pages of the spectral sequence of the j-filtration on the total complex.

    Computed from the persistence pairing of the filtered boundary matrix.
    Page ``E_k`` keeps the unpaired generators and the pairs whose j-gap is
    at least ``k``; E_2 is Khovanov homology.
    """
    mc = apply_tqft(x, ring) if x.carrier == "formal" else x
    ring = ring or mc.ring
    if not ring.is_field:
        raise NotAField("spectral pages need field coefficients")
    D = mc.d()
    gens = mc.gens
    # d+ keeps j and raises i, d- lowers j: ordering by (j, -i) puts every
    # boundary entry before its column
    order = sorted(range(len(gens)), key=lambda i: (j_grading(gens[i]), -gens[i].r, gens[i].key))
    rank_of = {g: k for k, g in enumerate(order)}
    # columns: d(x) written in filtration order positions
    low_owner = {}
    pair_of = {}
    reduced = {}
    for i in order:
        col = {rank_of[t]: ring(v) for t, v in D.get(i, {}).items() if v}
        while col:
            low = max(col)
            o = low_owner.get(low)
            if o is None:
                break
            other = reduced[o]
            f = col[low] / other[low]
            for k, v in other.items():
                nv = col.get(k, 0) - f * v
                if nv:
                    col[k] = nv
                else:
                    col.pop(k, None)
        reduced[i] = col
        if col:
            low = max(col)
            low_owner[low] = i
            pair_of[order[low]] = i
            pair_of[i] = order[low]
    pairs = [(a, b) for a, b in pair_of.items() if rank_of[a] < rank_of[b]]
    unpaired = [i for i in range(len(gens)) if i not in pair_of]

    def key(i):
        g = gens[i]
        return (g.q, j_grading(g))

    inf = {}
    for i in unpaired:
        inf[key(i)] = inf.get(key(i), 0) + 1
    gaps = [j_grading(gens[b]) - j_grading(gens[a]) for a, b in pairs]
    maxgap = max(gaps, default=0)
    pages = {}
    k = 2
    while True:
        tab = dict(inf)
        for (a, b), gap in zip(pairs, gaps):
            if gap >= k:
                for i in (a, b):
                    tab[key(i)] = tab.get(key(i), 0) + 1
        pages[k] = tab
        if k > maxgap:
            break
        k += 1
    collapse = min(k for k in pages if pages[k] == inf)
    return Pages(pages, inf, collapse)


def kj_number(movie):
    """The scalar a closed surface movie induces on Kh(empty) = R."""
    from .moves import movie_map

    if movie.initial.edges or movie.final().edges:
        raise ValueError("KJ numbers need a movie from the empty diagram to itself")
    f = movie_map(movie)
    m = induced_map(f, "kh")
    return m.entries.get((0, 0), movie.initial.ring.zero)
