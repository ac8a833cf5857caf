"""Curved complexes and their morphisms.

A complex has a list of generators (:class:`Gen`) and two sparse matrices
``dplus`` (raising the homological grading ``r`` by one) and ``dminus``
(lowering it by one).  Matrices are ``dict[src index] -> dict[tgt index] ->
entry``.  Entries are :class:`~khcob.cobcat.CobMorphism` values for the
formal carrier and ring elements for the module carrier; the small
:class:`FormalAlg` / :class:`ModuleAlg` classes hide the difference.

Gradings: for formal generators ``q`` is the internal shift ``{q}`` of the
object; for module generators ``q`` is the l-grading (``j - i``).  Either
way the degree of an entry ``x -> y`` is ``deg(entry) + q(y) - q(x)`` and
its homological shift is ``r(y) - r(x)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import cobcat
from .cobcat import CobMorphism, Resolution


class IntegrityError(RuntimeError):
    """A construction produced something that violates a theorem (a bug)."""


class CurvedNotSupported(ValueError):
    pass


@dataclass(frozen=True)
class Gen:
    key: tuple
    obj: object  # Resolution (formal) or a basis label (module)
    r: int
    q: int


# ---------------------------------------------------------------------------
# entry algebras

class FormalAlg:
    carrier = "formal"

    def __init__(self, ring):
        self.ring = ring

    def compose(self, g, f):
        return cobcat.compose(g, f)

    def zero(self, x: Gen, y: Gen):
        return CobMorphism(x.obj, y.obj, {}, self.ring)

    def identity(self, x: Gen, coeff=1):
        return cobcat.identity(x.obj, self.ring, coeff)

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def trivially_zero(self, a) -> bool:
        return not a.terms

    def scale(self, a, s):
        return a.scale(s)

    def degrees(self, a, x: Gen, y: Gen):
        return {d + y.q - x.q for d in a.degrees()}

    def equal(self, a, b) -> bool:
        return a == b


class ModuleAlg:
    carrier = "module"

    def __init__(self, ring):
        self.ring = ring

    def compose(self, g, f):
        return g * f

    def zero(self, x, y):
        return self.ring.zero

    def identity(self, x, coeff=1):
        return self.ring(coeff)

    def is_zero(self, a) -> bool:
        return not a

    trivially_zero = is_zero

    def scale(self, a, s):
        return a * s

    def degrees(self, a, x, y):
        return {y.q - x.q} if a else set()

    def equal(self, a, b) -> bool:
        return a == b


def algebra(carrier, ring):
    return FormalAlg(ring) if carrier == "formal" else ModuleAlg(ring)


# ---------------------------------------------------------------------------
# sparse matrices of morphisms

def mat_get(M, i, j):
    return M.get(i, {}).get(j)


def mat_add_into(M, i, j, val, alg):
    row = M.setdefault(i, {})
    if j in row:
        v = row[j] + val
        if alg.trivially_zero(v):
            del row[j]
            if not row:
                del M[i]
        else:
            row[j] = v
    elif not alg.trivially_zero(val):
        row[j] = val
    elif not row:
        del M[i]


def mat_compose(B, A, alg):
    """(B o A)[i][k] = sum_j B[j][k] o A[i][j]."""
    out = {}
    for i, row in A.items():
        for j, a in row.items():
            brow = B.get(j)
            if not brow:
                continue
            for k, b in brow.items():
                mat_add_into(out, i, k, alg.compose(b, a), alg)
    return out


def mat_sum(mats, alg, signs=None):
    out = {}
    for t, M in enumerate(mats):
        s = 1 if signs is None else signs[t]
        for i, row in M.items():
            for j, v in row.items():
                mat_add_into(out, i, j, v if s == 1 else alg.scale(v, s), alg)
    return out


def mat_scale(M, s, alg):
    if not s:
        return {}
    return {i: {j: alg.scale(v, s) for j, v in row.items()} for i, row in M.items()}


def mat_clean(M, alg):
    out = {}
    for i, row in M.items():
        r = {j: v for j, v in row.items() if not alg.is_zero(v)}
        if r:
            out[i] = r
    return out


def mat_entries(M):
    for i, row in M.items():
        for j, v in row.items():
            yield i, j, v


# ---------------------------------------------------------------------------
# complexes

class CurvedComplex:
    def __init__(self, ring, gens, dplus, dminus, carrier="formal", boundary=frozenset(), meta=None):
        self.ring = ring
        self.gens = list(gens)
        self.index = {g.key: i for i, g in enumerate(self.gens)}
        if len(self.index) != len(self.gens):
            raise IntegrityError("duplicate generator keys")
        self.dplus = dplus
        self.dminus = dminus
        self.carrier = carrier
        self.alg = algebra(carrier, ring)
        self.boundary = frozenset(boundary)
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.gens)

    def d(self):
        """Total differential d+ + d-."""
        return mat_sum([self.dplus, self.dminus], self.alg)

    def plus_only(self):
        """The same objects with d- dropped (the Khovanov part)."""
        meta = {k: v for k, v in self.meta.items() if k != "_tqft"}
        meta["plus_only"] = True
        return CurvedComplex(self.ring, self.gens, self.dplus, {}, self.carrier, self.boundary, meta)

    def gradings(self):
        return sorted({g.r for g in self.gens})

    def by_r(self):
        out = {}
        for i, g in enumerate(self.gens):
            out.setdefault(g.r, []).append(i)
        return out

    def check_squares(self):
        """Assert d+^2 = 0 and d-^2 = 0 exactly."""
        for name, M in (("d+", self.dplus), ("d-", self.dminus)):
            sq = mat_compose(M, M, self.alg)
            if sq:
                i, row = next(iter(sq.items()))
                raise IntegrityError(f"{name}^2 != 0 at generator {self.gens[i].key}")
        return True

    def check_gradings(self):
        for M, shift in ((self.dplus, 1), (self.dminus, -1)):
            for i, j, v in mat_entries(M):
                x, y = self.gens[i], self.gens[j]
                if y.r - x.r != shift:
                    raise IntegrityError("differential has the wrong homological shift")
                degs = self.alg.degrees(v, x, y)
                if degs and degs != {-1}:
                    raise IntegrityError(f"differential not of degree -1: {degs}")
        return True

    def dump(self) -> str:
        """Deterministic text dump: generators per r, then differential entries."""
        lines = []
        for r, idx in sorted(self.by_r().items()):
            lines.append(f"r={r}")
            for i in sorted(idx, key=lambda i: self.gens[i].key):
                g = self.gens[i]
                lines.append(f"  {g.key} {{{g.q}}} {g.obj!r}")
        for name, M in (("d+", self.dplus), ("d-", self.dminus)):
            for i, j, v in sorted(mat_entries(M), key=lambda t: (self.gens[t[0]].key, self.gens[t[1]].key)):
                lines.append(f"{name} {self.gens[i].key} -> {self.gens[j].key}: {v!r}")
        return "\n".join(lines)


def curvature(c: CurvedComplex):
    """d+ d- + d- d+; returns the diagonal as ``index -> entry`` and raises
    if an off-diagonal entry survives."""
    lam = mat_sum([mat_compose(c.dplus, c.dminus, c.alg), mat_compose(c.dminus, c.dplus, c.alg)], c.alg)
    diag = {}
    for i, j, v in mat_entries(lam):
        if i != j:
            raise IntegrityError(f"off-diagonal curvature {c.gens[i].key} -> {c.gens[j].key}")
        diag[i] = v
    return diag


def complex_differences(a: CurvedComplex, b: CurvedComplex, limit=5):
    """Where two complexes differ: generator lists (key, object, gradings in
    order) and then every d+/d- entry.  An empty list means equal."""
    out = []
    if [(g.key, g.obj, g.r, g.q) for g in a.gens] != [(g.key, g.obj, g.r, g.q) for g in b.gens]:
        return ["generators differ"]
    for name in ("dplus", "dminus"):
        Ma, Mb = getattr(a, name), getattr(b, name)
        keys = {(i, j) for i, j, _ in mat_entries(Ma)} | {(i, j) for i, j, _ in mat_entries(Mb)}
        for i, j in sorted(keys):
            va, vb = mat_get(Ma, i, j), mat_get(Mb, i, j)
            za = va is None or not va
            zb = vb is None or not vb
            if (za and zb) or (not za and not zb and a.alg.equal(va, vb)):
                continue
            out.append(f"{name} {a.gens[i].key} -> {a.gens[j].key}")
            if len(out) >= limit:
                return out
    return out


# ---------------------------------------------------------------------------
# chain maps

class ChainMap:
    """A matrix of morphisms between two complexes.  ``odd=True`` marks a
    homotopy (odd homological shifts)."""

    def __init__(self, source: CurvedComplex, target: CurvedComplex, blocks, odd=False, label=""):
        self.source = source
        self.target = target
        self.blocks = blocks
        self.odd = odd
        self.label = label

    @property
    def alg(self):
        return self.source.alg

    def entry(self, x_key, y_key):
        i = self.source.index[x_key]
        j = self.target.index[y_key]
        v = mat_get(self.blocks, i, j)
        return v if v is not None else self.alg.zero(self.source.gens[i], self.target.gens[j])

    def then(self, other: "ChainMap") -> "ChainMap":
        """``other o self``."""
        if other.source is not self.target and len(other.source) != len(self.target):
            raise IntegrityError("composing maps with mismatched complexes")
        return ChainMap(self.source, other.target, mat_compose(other.blocks, self.blocks, self.alg),
                        self.odd != other.odd, f"{other.label}*{self.label}")

    def __matmul__(self, other):
        return other.then(self)

    def __add__(self, other):
        return ChainMap(self.source, self.target, mat_sum([self.blocks, other.blocks], self.alg), self.odd)

    def __sub__(self, other):
        return ChainMap(self.source, self.target, mat_sum([self.blocks, other.blocks], self.alg, [1, -1]),
                        self.odd)

    def scale(self, s):
        return ChainMap(self.source, self.target, mat_scale(self.blocks, s, self.alg), self.odd)

    def is_zero(self):
        return not mat_clean(self.blocks, self.alg)

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def shifts(self):
        return {self.target.gens[j].r - self.source.gens[i].r for i, j, _ in mat_entries(self.blocks)}

    def degrees(self):
        out = set()
        for i, j, v in mat_entries(self.blocks):
            out |= self.alg.degrees(v, self.source.gens[i], self.target.gens[j])
        return out

    def degree(self):
        ds = self.degrees()
        if not ds:
            return None
        return ds.pop() if len(ds) == 1 else "inhomogeneous"


def identity_map(c: CurvedComplex, coeff=1) -> ChainMap:
    blocks = {i: {i: c.alg.identity(g, coeff)} for i, g in enumerate(c.gens)} if coeff else {}
    return ChainMap(c, c, blocks, label="id")


def zero_map(a: CurvedComplex, b: CurvedComplex, odd=False) -> ChainMap:
    return ChainMap(a, b, {}, odd)


def verify_chain_map(f: ChainMap, plus_only=False):
    """Exact check of ``f d = d f``.  Returns a report dict with ``ok`` and
    the residual entries (as generator key pairs)."""
    a, b = f.source, f.target
    da = a.dplus if plus_only else a.d()
    db = b.dplus if plus_only else b.d()
    res = mat_sum([mat_compose(f.blocks, da, f.alg), mat_compose(db, f.blocks, f.alg)], f.alg, [1, -1])
    res = mat_clean(res, f.alg)
    bad = [(a.gens[i].key, b.gens[j].key) for i, j, _ in mat_entries(res)]
    return {"ok": not bad, "residual": bad}


def homotopy_residual(f: ChainMap, g: ChainMap, h: ChainMap, u=1, plus_only=False):
    """f - u g - (d h + h d); zero iff h is a homotopy from f to u g."""
    a, b = f.source, f.target
    da = a.dplus if plus_only else a.d()
    db = b.dplus if plus_only else b.d()
    alg = f.alg
    M = mat_sum([f.blocks, g.blocks, mat_compose(db, h.blocks, alg), mat_compose(h.blocks, da, alg)],
                alg, [1, -u, -1, -1])
    return mat_clean(M, alg)


def filtration_level(f: ChainMap):
    """Largest ``n + shift`` over nonzero terms; f is p-filtered iff this is
    at most p.  None for the zero map."""
    best = None
    for i, j, v in mat_entries(f.blocks):
        x, y = f.source.gens[i], f.target.gens[j]
        for n in f.alg.degrees(v, x, y):
            m = n + (y.r - x.r)
            best = m if best is None else max(best, m)
    return best


def associated_graded(f: ChainMap, p=None) -> ChainMap:
    """The homological-grading-preserving part, as a map of the d+ complexes."""
    if p is not None:
        lvl = filtration_level(f)
        degs = f.degrees()
        if lvl is not None and lvl > p and (f.source.dminus or f.target.dminus):
            raise ValueError(f"map is not {p}-filtered (level {lvl})")
        if degs and degs != {p} and (f.source.dminus or f.target.dminus):
            raise ValueError(f"map is not homogeneous of degree {p}")
    blocks = {}
    for i, j, v in mat_entries(f.blocks):
        if f.target.gens[j].r == f.source.gens[i].r:
            blocks.setdefault(i, {})[j] = v
    return ChainMap(f.source.plus_only(), f.target.plus_only(), blocks, f.odd, f.label)


def sign_iso(ca: CurvedComplex, cb: CurvedComplex) -> ChainMap:
    """Isomorphism ``ca -> cb`` of the form ``(-1)^phi(x) id`` for two
    complexes with the same generators whose differentials agree up to sign.
    phi is propagated along a spanning tree and checked on every entry."""
    if [g.key for g in ca.gens] != [g.key for g in cb.gens]:
        raise IntegrityError("sign_iso needs identical generator lists")
    alg = ca.alg
    edges = {}
    for M_a, M_b in ((ca.dplus, cb.dplus), (ca.dminus, cb.dminus)):
        keys = {(i, j) for i, j, _ in mat_entries(M_a)} | {(i, j) for i, j, _ in mat_entries(M_b)}
        for i, j in keys:
            va, vb = mat_get(M_a, i, j), mat_get(M_b, i, j)
            if va is None or vb is None:
                raise IntegrityError("differentials differ by more than a sign")
            if alg.equal(va, vb):
                s = 0
            elif alg.equal(alg.scale(va, -1), vb):
                s = 1
            else:
                raise IntegrityError("differentials differ by more than a sign")
            if alg.equal(va, alg.scale(va, -1)):
                continue  # characteristic 2: no information
            edges.setdefault(i, []).append((j, s))
            edges.setdefault(j, []).append((i, s))
    phi = {}
    for start in range(len(ca.gens)):
        if start in phi:
            continue
        phi[start] = 0
        dq = deque([start])
        while dq:
            i = dq.popleft()
            for j, s in edges.get(i, ()):
                want = phi[i] ^ s
                if j in phi:
                    if phi[j] != want:
                        raise IntegrityError("sign rules are not related by a coboundary")
                else:
                    phi[j] = want
                    dq.append(j)
    blocks = {i: {i: alg.identity(g, -1 if phi[i] else 1)} for i, g in enumerate(ca.gens)}
    return ChainMap(ca, cb, blocks, label="sign-iso")


# ---------------------------------------------------------------------------
# planar gluing of complexes

def glue(complexes, arcs: Resolution | None = None, ring=None) -> CurvedComplex:
    """Glue formal complexes along shared boundary names.

    ``arcs`` is the arc diagram as a crossingless tangle (its arcs join the
    inputs' boundary names; they are carried along by identity cobordisms).
    Generators are keyed by the tuple of input keys; the differential of
    input ``i`` picks up the sign ``(-1)^(r_1 + ... + r_{i-1})``.
    """
    complexes = list(complexes)
    ring = ring or complexes[0].ring
    base = [arcs] if arcs is not None else []
    from itertools import product

    gens = []
    combos = list(product(*[range(len(c.gens)) for c in complexes]))
    objs = {}
    for combo in combos:
        parts = [complexes[t].gens[i] for t, i in enumerate(combo)]
        res, _, _ = cobcat.glue_resolutions(base + [p.obj for p in parts])
        key = tuple(p.key for p in parts)
        gens.append(Gen(key, res, sum(p.r for p in parts), sum(p.q for p in parts)))
        objs[combo] = len(gens) - 1
    out = CurvedComplex(ring, gens, {}, {}, "formal")
    ids = [{i: cobcat.identity(g.obj, ring) for i, g in enumerate(c.gens)} for c in complexes]
    arc_id = [cobcat.identity(arcs, ring)] if arcs is not None else []
    for name in ("dplus", "dminus"):
        M = {}
        for combo in combos:
            src = objs[combo]
            rsum = 0
            for t, c in enumerate(complexes):
                i = combo[t]
                for j, v in getattr(c, name).get(i, {}).items():
                    tgt_combo = combo[:t] + (j,) + combo[t + 1:]
                    pieces = arc_id + [ids[s][combo[s]] if s != t else v for s in range(len(complexes))]
                    ent = cobcat.hplug(pieces, ring)
                    if rsum % 2:
                        ent = -ent
                    mat_add_into(M, src, objs[tgt_combo], ent, out.alg)
                rsum += c.gens[i].r
        setattr(out, name, M)
    return out


# ---------------------------------------------------------------------------
# delooping and Gaussian elimination

def deloop(c: CurvedComplex):
    """Replace every circle by two shifted copies of the empty set.

    Returns ``(delooped complex, rho, iota)`` with rho: c -> c', iota: c' -> c
    mutually inverse isomorphisms.  Generator keys become ``(key, signs)``.
    """
    if c.carrier != "formal":
        raise ValueError("deloop works on formal complexes")
    ring = c.ring
    newgens = []
    rho, iota = {}, {}
    owner = {}
    from itertools import product

    for i, g in enumerate(c.gens):
        circles = g.obj.circles
        rest = Resolution(frozenset(x for x in g.obj.comps if not x.is_circle))
        for signs in product((1, -1), repeat=len(circles)):
            ng = Gen((g.key, signs), rest, g.r, g.q + sum(signs))
            j = len(newgens)
            newgens.append(ng)
            owner[j] = i
            inc = cobcat.from_parts(rest, g.obj, [((), (cc,), 0 if s > 0 else 1)
                                                  for cc, s in zip(circles, signs)], ring)
            proj = cobcat.from_parts(g.obj, rest, [((cc,), (), 1 if s > 0 else 0)
                                                   for cc, s in zip(circles, signs)], ring)
            rho.setdefault(i, {})[j] = proj
            iota.setdefault(j, {})[i] = inc
    out = CurvedComplex(ring, newgens, {}, {}, "formal", c.boundary, c.meta)
    a = FormalAlg(ring)
    for name in ("dplus", "dminus"):
        M = getattr(c, name)
        # iota then M then rho
        N = mat_compose(rho, mat_compose(M, iota, a), a)
        setattr(out, name, mat_clean(N, a))
    return out, ChainMap(c, out, rho, label="deloop"), ChainMap(out, c, iota, label="undeloop")


def _formal_inverse(v: CobMorphism, x: Gen, y: Gen, ring):
    """Inverse of an isomorphism entry between circle-free objects, or None.

    Differential entries have total degree -1, so an invertible one is an
    undotted identity-shaped cobordism with q(y) = q(x) - 1."""
    if x.obj.pairing() != y.obj.pairing():
        return None
    if any(cc.is_circle for cc in x.obj.comps) or any(cc.is_circle for cc in y.obj.comps):
        return None
    canon = v.canonical()
    if len(canon) != 1:
        return None
    (cfg, coeff), = canon.items()
    ident = cobcat.identity_between(x.obj, y.obj)
    (icfg, _), = ident.terms.items()
    if cfg != icfg or not ring.is_unit(coeff):
        return None
    return cobcat.identity_between(y.obj, x.obj, ring, ring.inv(coeff))


def gaussian_simplify(c: CurvedComplex, check_curvature=True):
    """Eliminate invertible differential entries.

    Returns ``(small, rho, iota)`` with rho: c -> small and iota: small -> c,
    ``rho o iota = id``.  The total differential is used; entries of the
    result are sorted back into d+ / d- by the sign of their homological
    shift.  Formal complexes are delooped first.
    """
    if check_curvature and (c.dminus and c.dplus):
        lam = curvature(c)
        if any(not c.alg.is_zero(v) for v in lam.values()):
            raise CurvedNotSupported("complex has nonzero curvature")
    ring = c.ring
    if c.carrier == "formal":
        work, rho0, iota0 = deloop(c)
    else:
        work, rho0, iota0 = c, identity_map(c), identity_map(c)
    alg = work.alg
    gens = work.gens
    D = {i: dict(row) for i, row in work.d().items()}
    Din = {}
    for i, j, _ in mat_entries(D):
        Din.setdefault(j, set()).add(i)
    rho = {i: dict(row) for i, row in rho0.blocks.items()}  # original -> work
    rho_in = {}
    for i, j, _ in mat_entries(rho):
        rho_in.setdefault(j, set()).add(i)
    iota = {i: dict(row) for i, row in iota0.blocks.items()}  # work -> original
    alive = set(range(len(gens)))

    def inverse(v, x, y):
        if c.carrier == "formal":
            return _formal_inverse(v, gens[x], gens[y], ring)
        return ring.inv(v) if ring.is_unit(v) else None

    def set_entry(M, Min, i, j, val):
        row = M.setdefault(i, {})
        if alg.is_zero(val):
            row.pop(j, None)
            if Min is not None:
                Min.get(j, set()).discard(i)
        else:
            row[j] = val
            if Min is not None:
                Min.setdefault(j, set()).add(i)

    changed = True
    while changed:
        changed = False
        for b1 in sorted(alive):
            row = D.get(b1, {})
            pick = None
            for b2 in sorted(row):
                if b2 == b1:
                    continue
                inv = inverse(row[b2], b1, b2)
                if inv is not None:
                    pick = (b2, inv)
                    break
            if pick is None:
                continue
            b2, phinv = pick
            srcs = [x for x in Din.get(b2, ()) if x != b1 and x in alive]
            tgts = [(y, g) for y, g in D.get(b1, {}).items() if y != b2]
            for x in srcs:
                delta = D[x][b2]
                pd = alg.compose(phinv, delta)
                for y, gam in tgts:
                    corr = alg.compose(gam, pd)
                    old = D.get(x, {}).get(y)
                    set_entry(D, Din, x, y, corr.__neg__() if old is None else old - corr)
                # iota(x) -= iota(b1) o phinv o delta
                for w, ib in iota.get(b1, {}).items():
                    corr = alg.compose(ib, pd)
                    old = iota.setdefault(x, {}).get(w)
                    set_entry(iota, None, x, w, -corr if old is None else old - corr)
            # rho(z -> y) -= gamma o phinv o rho(z -> b2)
            for z in list(rho_in.get(b2, ())):
                beta = rho[z].get(b2)
                if beta is None:
                    continue
                pb = alg.compose(phinv, beta)
                for y, gam in tgts:
                    corr = alg.compose(gam, pb)
                    old = rho[z].get(y)
                    set_entry(rho, rho_in, z, y, -corr if old is None else old - corr)
            for b in (b1, b2):
                alive.discard(b)
                D.pop(b, None)
                iota.pop(b, None)
                for x in Din.pop(b, set()):
                    if x in D:
                        D[x].pop(b, None)
                for z in rho_in.pop(b, set()):
                    rho[z].pop(b, None)
            for x in list(Din):
                Din[x].discard(b1)
                Din[x].discard(b2)
            changed = True
    keep = sorted(alive)
    newidx = {old: k for k, old in enumerate(keep)}
    small_gens = [gens[i] for i in keep]
    dp, dm = {}, {}
    for i in keep:
        for j, v in D.get(i, {}).items():
            if alg.is_zero(v):
                continue
            target = dp if gens[j].r > gens[i].r else dm
            target.setdefault(newidx[i], {})[newidx[j]] = v
    small = CurvedComplex(ring, small_gens, dp, dm, work.carrier, c.boundary, c.meta)
    rho_b = {}
    for z, row in rho.items():
        for y, v in row.items():
            if y in newidx and not alg.is_zero(v):
                rho_b.setdefault(z, {})[newidx[y]] = v
    iota_b = {}
    for x in keep:
        for w, v in iota.get(x, {}).items():
            if not alg.is_zero(v):
                iota_b.setdefault(newidx[x], {})[w] = v
    return small, ChainMap(c, small, rho_b, label="rho"), ChainMap(small, c, iota_b, label="iota")
