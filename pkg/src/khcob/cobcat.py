"""Dotted cobordisms between crossingless tangles, modulo the local relations.

A crossingless tangle (:class:`Resolution`) is a set of components.  Each
component remembers the diagram edges it is made of (``atoms``) and the
boundary points it ends on (``ends``; empty for a circle).

A cobordism in normal form is a :class:`DottedConfig`: a partition of the
source and target components into connected genus-0 parts, each carrying 0 or
1 dot.  The boundary verticals ``p x I`` are implicit: the source arc and the
target arc ending at ``p`` always share a part.  A :class:`CobMorphism` is a
linear combination of configs.

Composition and planar gluing recompute Euler characteristics of the glued
parts, read off the genus and reduce with the relations

* a handle becomes ``2 x`` an extra dot (so genus g with d dots is
  ``2**g`` times genus 0 with ``d+g`` dots),
* two dots on a part vanish,
* sphere = 0, dotted sphere = 1.

The compact form is not unique (a tube is the sum of its two dotted cuts), so
equality is tested on the fully neck-cut form, see :meth:`CobMorphism.canonical`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product


class CobError(ValueError):
    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Comp:
    """A component of a crossingless tangle: a circle iff ``ends`` is empty."""

    atoms: frozenset
    ends: frozenset

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.atoms, self.ends)))

    def __hash__(self):
        return self._hash

    @property
    def is_circle(self) -> bool:
        return not self.ends

    def key(self):
        return (tuple(sorted(self.ends)), tuple(sorted(self.atoms)))

    def __repr__(self):
        a = ",".join(sorted(self.atoms))
        if self.ends:
            return f"Arc[{'-'.join(sorted(self.ends))}|{a}]"
        return f"Circ[{a}]"


def circle(atoms) -> Comp:
    return Comp(frozenset(atoms), frozenset())


def arc(atoms, ends) -> Comp:
    return Comp(frozenset(atoms), frozenset(ends))


@dataclass(frozen=True)
class Resolution:
    """A crossingless tangle, i.e. a set of components."""

    comps: frozenset

    @classmethod
    def of(cls, comps):
        return cls(frozenset(comps))

    @property
    def boundary(self) -> frozenset:
        out = set()
        for c in self.comps:
            out |= c.ends
        return frozenset(out)

    @property
    def circles(self):
        return [c for c in self.sorted() if c.is_circle]

    @property
    def arcs(self):
        return [c for c in self.sorted() if not c.is_circle]

    def sorted(self):
        return sorted(self.comps, key=Comp.key)

    def pairing(self) -> frozenset:
        """Boundary connectivity: the set of end-pairs of the arcs."""
        return frozenset(c.ends for c in self.comps if c.ends)

    def comp_of_atom(self, atom) -> Comp:
        for c in self.comps:
            if atom in c.atoms:
                return c
        raise CobError("NoSuchAtom", str(atom))

    def __repr__(self):
        return "Res(" + " ".join(map(repr, self.sorted())) + ")"


EMPTY = Resolution(frozenset())


@dataclass(frozen=True)
class Part:
    """One connected genus-0 piece of a cobordism with 0 or 1 dot."""

    src: frozenset
    tgt: frozenset
    dot: int = 0

    def key(self):
        return (sorted(c.key() for c in self.src), sorted(c.key() for c in self.tgt), self.dot)


@dataclass(frozen=True)
class DottedConfig:
    parts: frozenset

    def sorted_parts(self):
        return sorted(self.parts, key=Part.key)

    @property
    def dots(self) -> int:
        return sum(p.dot for p in self.parts)

    def __repr__(self):
        def side(cs):
            return "+".join(repr(c) for c in sorted(cs, key=Comp.key)) or "0"

        bits = []
        for p in self.sorted_parts():
            bits.append(f"{{{side(p.src)} -> {side(p.tgt)}{' *' if p.dot else ''}}}")
        return " ".join(bits)


class _UF:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent = {}

    def find(self, x):
        parent = self.parent
        p = parent.get(x)
        if p is None:
            parent[x] = x
            return x
        if p == x:
            return x
        root = p
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def curves(src, tgt):
    """Boundary curves of a part, each as ``(source comps, target comps)``:
    every circle is a curve; arcs chain up through shared boundary points
    into closed loops."""
    out = [(frozenset([c]), frozenset()) for c in src if c.is_circle]
    out += [(frozenset(), frozenset([c])) for c in tgt if c.is_circle]
    arcs_ = [(0, c) for c in src if c.ends] + [(1, c) for c in tgt if c.ends]
    if arcs_:
        uf = _UF()
        for i, (_, c) in enumerate(arcs_):
            for e in c.ends:
                uf.union(("a", i), ("p", e))
        groups = {}
        for i, (side, c) in enumerate(arcs_):
            groups.setdefault(uf.find(("a", i)), ([], []))[side].append(c)
        out += [(frozenset(s_), frozenset(t_)) for s_, t_ in groups.values()]
    return out


@lru_cache(maxsize=1 << 16)
def n_curves(src, tgt) -> int:
    n = sum(1 for c in src if c.is_circle) + sum(1 for c in tgt if c.is_circle)
    arcs_ = [c for c in src if c.ends] + [c for c in tgt if c.ends]
    if not arcs_:
        return n
    # each arc is an edge between its two ends; every end has degree 2,
    # so loops = vertices - edges + loops ... count components directly
    uf = _UF()
    for c in arcs_:
        a, b = tuple(c.ends)
        uf.union(a, b)
    roots = {uf.find(e) for c in arcs_ for e in c.ends}
    return n + len(roots)


@lru_cache(maxsize=1 << 16)
def part_chi(p: Part) -> int:
    return 2 - n_curves(p.src, p.tgt)


def degree(config: DottedConfig, boundary_size: int) -> int:
    """deg = chi - |B|/2 - 2 * dots."""
    chi = sum(part_chi(p) for p in config.parts)
    return chi - boundary_size // 2 - 2 * config.dots


def _reduce_piece(src, tgt, chi, dots):
    """Return (factor, Part or None) for a glued connected piece; factor 0
    means the term dies, Part None means the piece was closed."""
    b = n_curves(frozenset(src), frozenset(tgt)) if (src or tgt) else 0
    g2 = 2 - b - chi
    if g2 < 0 or g2 % 2:
        raise CobError("Integrity", f"bad Euler characteristic chi={chi} with {b} curves")
    g = g2 // 2
    n = dots + g
    if n >= 2:
        return 0, None
    factor = 2 ** g
    if not src and not tgt:
        return (factor if n == 1 else 0), None
    return factor, Part(frozenset(src), frozenset(tgt), n)


class CobMorphism:
    """A linear combination of dotted configs from ``source`` to ``target``."""

    __slots__ = ("source", "target", "terms", "ring", "_canon")

    def __init__(self, source: Resolution, target: Resolution, terms=None, ring=None):
        self.source = source
        self.target = target
        self.ring = ring
        self.terms = {}
        self._canon = None
        if terms:
            for cfg, c in terms.items():
                if c:
                    self.terms[cfg] = c

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, source, target, ring=None):
        return cls(source, target, {}, ring)

    def _new(self, terms):
        return CobMorphism(self.source, self.target, terms, self.ring)

    def is_zero(self) -> bool:
        return not self.terms or not self.canonical()

    def __bool__(self):
        return not self.is_zero()

    # linear structure ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check_same(other)
        out = dict(self.terms)
        for cfg, c in other.terms.items():
            v = out.get(cfg, 0) + c
            if v:
                out[cfg] = v
            else:
                out.pop(cfg, None)
        return CobMorphism(self.source, self.target, out, self.ring or other.ring)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        if not s:
            return self._new({})
        return self._new({k: v * s for k, v in self.terms.items()})

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def _check_same(self, other):
        if self.source != other.source or self.target != other.target:
            raise CobError("Mismatch", "adding morphisms with different source/target")

    # equality via the fully neck-cut form ---------------------------------
    def canonical(self) -> dict:
        if self._canon is None:
            out = {}
            for cfg, c in self.terms.items():
                for cfg2 in _cut_all(cfg):
                    v = out.get(cfg2, 0) + c
                    if v:
                        out[cfg2] = v
                    else:
                        out.pop(cfg2, None)
            self._canon = out
        return self._canon

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, CobMorphism):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        if self.terms == other.terms:
            return True
        return self.canonical() == other.canonical()

    def __hash__(self):
        raise TypeError("CobMorphism is not hashable")

    # grading ---------------------------------------------------------------
    def degrees(self) -> set:
        nb = len(self.source.boundary)
        return {degree(cfg, nb) for cfg in self.terms}

    def degree(self):
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            return "inhomogeneous"
        return ds.pop()

    def scalar(self):
        """The coefficient of a morphism between empty resolutions."""
        if self.source.comps or self.target.comps:
            raise CobError("NotScalar", "morphism has nonempty source or target")
        return self.terms.get(DottedConfig(frozenset()), 0)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{cfg!r}" for cfg, c in sorted(self.terms.items(), key=lambda kv: repr(kv[0])))


def _cut_all(cfg: DottedConfig):
    """Neck-cut every part into disks (one per boundary curve)."""
    choices = []
    for p in cfg.parts:
        cs = curves(p.src, p.tgt)
        if len(cs) == 1:
            choices.append([[p]])
            continue
        pieces = sorted(cs, key=lambda st: (sorted(c.key() for c in st[0]), sorted(c.key() for c in st[1])))
        if p.dot:
            choices.append([[Part(s, t, 1) for s, t in pieces]])
        else:
            opts = []
            for i in range(len(pieces)):
                opts.append([Part(s, t, 0 if j == i else 1) for j, (s, t) in enumerate(pieces)])
            choices.append(opts)
    for combo in product(*choices):
        parts = []
        for grp in combo:
            parts.extend(grp)
        yield DottedConfig(frozenset(parts))


# ---------------------------------------------------------------------------
# composition

def compose(g: CobMorphism, f: CobMorphism) -> CobMorphism:
    """Vertical composition ``g o f`` (stack ``g`` on top of ``f``)."""
    if f.target != g.source:
        raise CobError("Mismatch", "middle resolutions differ")
    ring = f.ring or g.ring
    out = {}
    if not f.terms or not g.terms:
        return CobMorphism(f.source, g.target, {}, ring)
    middle_arcs = {c for c in f.target.comps if c.ends}
    for cf, af in f.terms.items():
        fparts = list(cf.parts)
        f_of = {}
        for i, p in enumerate(fparts):
            for c in p.tgt:
                f_of[c] = i
        fchi = [part_chi(p) for p in fparts]
        for cg, ag in g.terms.items():
            gparts = list(cg.parts)
            uf = _UF()
            for j, p in enumerate(gparts):
                uf.find(("g", j))
                for c in p.src:
                    uf.union(("g", j), ("f", f_of[c]))
            for i in range(len(fparts)):
                uf.find(("f", i))
            groups = {}
            for i in range(len(fparts)):
                groups.setdefault(uf.find(("f", i)), []).append(("f", i))
            for j in range(len(gparts)):
                groups.setdefault(uf.find(("g", j)), []).append(("g", j))
            coeff = af * ag
            parts = []
            for members in groups.values():
                src, tgt = set(), set()
                chi = 0
                dots = 0
                mid_arcs = 0
                for side, k in members:
                    if side == "f":
                        p = fparts[k]
                        src |= p.src
                        chi += fchi[k]
                        mid_arcs += sum(1 for c in p.tgt if c in middle_arcs)
                    else:
                        p = gparts[k]
                        tgt |= p.tgt
                        chi += part_chi(p)
                    dots += p.dot
                chi -= mid_arcs
                factor, part = _reduce_piece(src, tgt, chi, dots)
                if factor == 0:
                    coeff = 0
                    break
                coeff = coeff * factor
                if part is not None:
                    parts.append(part)
            if not coeff:
                continue
            cfg = DottedConfig(frozenset(parts))
            v = out.get(cfg, 0) + coeff
            if v:
                out[cfg] = v
            else:
                out.pop(cfg, None)
    return CobMorphism(f.source, g.target, out, ring)


# ---------------------------------------------------------------------------
# planar gluing

def glue_resolutions(resolutions):
    """Glue crossingless tangles along boundary names that occur twice.

    Returns the glued resolution and a map ``(input index, comp) -> glued comp``.
    """
    uf = _UF()
    owner = {}
    for i, res in enumerate(resolutions):
        for c in res.comps:
            uf.find((i, c))
            for e in c.ends:
                owner.setdefault(e, []).append((i, c))
    shared = set()
    for e, occ in owner.items():
        if len(occ) > 2:
            raise CobError("BoundaryMismatch", f"boundary point {e} used {len(occ)} times")
        if len(occ) == 2:
            shared.add(e)
            uf.union(occ[0], occ[1])
    groups = {}
    for i, res in enumerate(resolutions):
        for c in res.comps:
            groups.setdefault(uf.find((i, c)), []).append((i, c))
    mapping = {}
    comps = []
    for members in groups.values():
        atoms = set()
        ends = set()
        for _, c in members:
            atoms |= c.atoms
            ends |= c.ends
        g = Comp(frozenset(atoms), frozenset(ends - shared))
        comps.append(g)
        for m in members:
            mapping[m] = g
    return Resolution(frozenset(comps)), mapping, shared


def hplug(morphisms, ring=None) -> CobMorphism:
    """Horizontal composition: glue cobordisms along shared boundary names.

    Arc diagrams are passed in as identity morphisms of their arcs, so a
    planar arc diagram ``D`` applied to ``f_1..f_d`` is
    ``hplug([identity(D), f_1, ..., f_d])``.
    """
    morphisms = list(morphisms)
    S, smap, shared = glue_resolutions([m.source for m in morphisms])
    T, tmap, shared_t = glue_resolutions([m.target for m in morphisms])
    if shared != shared_t:
        raise CobError("BoundaryMismatch", "source and target boundaries glue differently")
    ring = ring or next((m.ring for m in morphisms if m.ring is not None), None)
    # which input owns each shared name
    where = {}
    for i, m in enumerate(morphisms):
        for e in m.source.boundary:
            if e in shared:
                where.setdefault(e, []).append(i)
    out = {}
    term_lists = [list(m.terms.items()) for m in morphisms]
    for combo in product(*term_lists):
        coeff = 1
        for _, c in combo:
            coeff = coeff * c
        uf = _UF()
        part_of_end = {}
        allparts = []
        for i, (cfg, _) in enumerate(combo):
            for p in cfg.parts:
                allparts.append((i, p))
                uf.find(len(allparts) - 1)
                for c in p.src:
                    for e in c.ends:
                        if e in shared:
                            part_of_end[(i, e)] = len(allparts) - 1
        for e in shared:
            i, j = where[e]
            uf.union(part_of_end[(i, e)], part_of_end[(j, e)])
        groups = {}
        for k in range(len(allparts)):
            groups.setdefault(uf.find(k), []).append(k)
        parts = []
        for members in groups.values():
            src, tgt = set(), set()
            chi = 0
            dots = 0
            glued = set()
            for k in members:
                i, p = allparts[k]
                chi += part_chi(p)
                dots += p.dot
                for c in p.src:
                    src.add(smap[(i, c)])
                    glued |= c.ends & shared
                for c in p.tgt:
                    tgt.add(tmap[(i, c)])
            chi -= len(glued)
            factor, part = _reduce_piece(src, tgt, chi, dots)
            if factor == 0:
                coeff = 0
                break
            coeff = coeff * factor
            if part is not None:
                parts.append(part)
        if not coeff:
            continue
        cfg = DottedConfig(frozenset(parts))
        v = out.get(cfg, 0) + coeff
        if v:
            out[cfg] = v
        else:
            out.pop(cfg, None)
    return CobMorphism(S, T, out, ring)


# ---------------------------------------------------------------------------
# elementary morphisms

def identity(res: Resolution, ring=None, coeff=1) -> CobMorphism:
    parts = frozenset(Part(frozenset([c]), frozenset([c]), 0) for c in res.comps)
    return CobMorphism(res, res, {DottedConfig(parts): coeff}, ring)


def identity_between(S: Resolution, T: Resolution, ring=None, coeff=1) -> CobMorphism:
    """The product cobordism between two tangles with the same shape.

    Arcs are matched by their ends, circles by their atoms."""
    by_ends = {}
    by_atoms = {}
    for c in T.comps:
        if c.ends:
            by_ends[c.ends] = c
        else:
            by_atoms[c.atoms] = c
    parts = []
    used = set()
    for c in S.comps:
        d = by_ends.get(c.ends) if c.ends else by_atoms.get(c.atoms)
        if d is None or d in used:
            raise CobError("ShapeMismatch", f"no partner for {c!r}")
        used.add(d)
        parts.append(Part(frozenset([c]), frozenset([d]), 0))
    if len(used) != len(T.comps):
        raise CobError("ShapeMismatch", "target has unmatched components")
    return CobMorphism(S, T, {DottedConfig(frozenset(parts)): coeff}, ring)


def standard(S: Resolution, T: Resolution, ring=None, coeff=1, dot=0) -> CobMorphism:
    """Components present in both ends get cylinders; everything else forms
    one connected part.  This is the saddle, birth or death cobordism when
    ``S`` and ``T`` differ by one of those moves."""
    common = S.comps & T.comps
    parts = [Part(frozenset([c]), frozenset([c]), 0) for c in common]
    rs, rt = S.comps - common, T.comps - common
    if rs or rt:
        parts.append(Part(frozenset(rs), frozenset(rt), dot))
    return CobMorphism(S, T, {DottedConfig(frozenset(parts)): coeff}, ring)


def from_parts(S: Resolution, T: Resolution, groups, ring=None, coeff=1) -> CobMorphism:
    """Build a one-term morphism from explicit ``(src comps, tgt comps, dot)``
    groups; components not mentioned must appear in both ends and get
    cylinders."""
    parts = []
    seen_s, seen_t = set(), set()
    for s, t, d in groups:
        s, t = frozenset(s), frozenset(t)
        seen_s |= s
        seen_t |= t
        parts.append(Part(s, t, d))
    for c in S.comps - seen_s:
        if c not in T.comps or c in seen_t:
            raise CobError("ShapeMismatch", f"unassigned component {c!r}")
        parts.append(Part(frozenset([c]), frozenset([c]), 0))
        seen_t.add(c)
    if seen_t != set(T.comps):
        raise CobError("ShapeMismatch", "target components not covered")
    return CobMorphism(S, T, {DottedConfig(frozenset(parts)): coeff}, ring)


def birth(S: Resolution, new: Comp, ring=None, dot=0) -> CobMorphism:
    T = Resolution(S.comps | {new})
    return standard(S, T, ring, dot=dot)


def death(S: Resolution, old: Comp, ring=None, dot=0) -> CobMorphism:
    T = Resolution(S.comps - {old})
    return standard(S, T, ring, dot=dot)


def dot_on(res: Resolution, comp: Comp, ring=None, coeff=1) -> CobMorphism:
    """Identity with a dot on the cylinder over ``comp``."""
    if comp not in res.comps:
        raise CobError("NoSuchComponent", repr(comp))
    parts = [Part(frozenset([c]), frozenset([c]), 1 if c == comp else 0) for c in res.comps]
    return CobMorphism(res, res, {DottedConfig(frozenset(parts)): coeff}, ring)


def dot_at(res: Resolution, atom, ring=None, coeff=1) -> CobMorphism:
    """The map X_p: a dot on the component containing the edge/point ``atom``."""
    for c in res.comps:
        if atom in c.atoms or atom in c.ends:
            return dot_on(res, c, ring, coeff)
    raise CobError("NoSuchAtom", str(atom))


def elementary(kind: str, source: Resolution, location=None, ring=None) -> CobMorphism:
    """One-term elementary morphisms.

    ``location`` is: a Comp (birth: the new circle; death: the circle;
    dot: the component), a pair of Comps (merge-saddle), or a pair
    ``(comp, target resolution)`` style target for saddles given as the
    target resolution directly.
    """
    if kind == "identity":
        return identity(source, ring)
    if kind == "birth":
        return birth(source, location, ring)
    if kind == "death":
        if location not in source.comps or not location.is_circle:
            raise CobError("BadLocation", "death needs a circle of the source")
        return death(source, location, ring)
    if kind == "dot":
        return dot_on(source, location, ring)
    if kind == "merge-saddle":
        a, b = location
        if a not in source.comps or b not in source.comps or a == b:
            raise CobError("BadLocation", "merge needs two components of the source")
        merged = Comp(a.atoms | b.atoms, a.ends | b.ends)
        T = Resolution((source.comps - {a, b}) | {merged})
        return standard(source, T, ring)
    if kind in ("split-saddle", "boundary-saddle"):
        T = location
        if not isinstance(T, Resolution):
            raise CobError("BadLocation", "saddle needs the target resolution")
        return standard(source, T, ring)
    raise CobError("UnknownKind", kind)
