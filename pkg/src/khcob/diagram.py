"""Oriented, weighted, checkerboard-shaded tangle diagrams.

Conventions
-----------
* A crossing lists its four edges counterclockwise, starting with the incoming
  under-strand: ``(a, b, c, d)``.  The under-strand runs ``a -> c``.
* The crossing is positive when the over-strand runs ``d -> b``.
* The 0-smoothing joins ``a`` with ``b`` and ``c`` with ``d``; the 1-smoothing
  joins ``a`` with ``d`` and ``b`` with ``c``.
* Corner ``k`` of a crossing is the region between slots ``k`` and ``k+1``.
  The crossing sign of the shading, ``s(c)``, is ``+1`` iff corner 0 is shaded.
* Boundary points are listed counterclockwise.  ``s(p) = +1`` iff walking
  the boundary counterclockwise one passes from a shaded region to an
  unshaded one at ``p``.

Shading is stored per edge as "the region on the left of this edge is
shaded", which is enough for every sign and survives local surgery.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Optional

from .coeff import Ring, ring_make
from .cobcat import Comp, Resolution, _UF


class DiagramError(ValueError):
    """Parse or validation failure; ``code`` names the rejection reason."""

    def __init__(self, code, message=""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


CONVENTIONS = ("outer-unshaded", "outer-shaded")


@dataclass(frozen=True)
class Edge:
    id: str
    tail: Optional[tuple]  # ('X', crossing, slot) | ('B', point) | None for free loops
    head: Optional[tuple]
    weight: object = 0
    part: Optional[int] = None
    left_shaded: Optional[bool] = None
    atom: Optional[str] = None
    component: Optional[str] = None

    @property
    def label(self):
        return self.atom if self.atom is not None else self.id

    @property
    def is_free_loop(self):
        return self.tail is None


@dataclass(frozen=True)
class SignAssignment:
    crossing_signs: dict
    boundary_signs: dict


@dataclass(frozen=True)
class CrossingData:
    n_plus: int
    n_minus: int
    signs: dict
    w_over: dict
    w_under: dict


class TangleDiagram:
    """An oriented weighted shaded tangle (or link) diagram.

    Treated as immutable: every operation returns a new diagram.
    """

    def __init__(self, ring, crossings, order, edges, boundary=(), basepoint_after=None,
                 convention="outer-unshaded", components=None, embedded=True):
        self.ring = ring
        self.crossings = dict(crossings)
        self.order = list(order)
        self.edges = dict(edges)
        self.boundary = tuple(boundary)
        self.basepoint_after = basepoint_after
        self.convention = convention
        self.components = dict(components or {})
        self.embedded = embedded
        self._cache = {}

    # ------------------------------------------------------------------ basics
    @property
    def n(self) -> int:
        return len(self.order)

    def copy(self, **kw):
        args = dict(ring=self.ring, crossings=self.crossings, order=self.order, edges=self.edges,
                    boundary=self.boundary, basepoint_after=self.basepoint_after,
                    convention=self.convention, components=self.components, embedded=self.embedded)
        args.update(kw)
        return TangleDiagram(**args)

    def is_link(self) -> bool:
        return not self.boundary

    def boundary_edge(self, p):
        for e in self.edges.values():
            if e.tail == ("B", p) or e.head == ("B", p):
                return e
        raise DiagramError("NoSuchPoint", p)

    def boundary_points(self):
        """All boundary names used by edges (for non-embedded local tangles)."""
        pts = []
        for e in self.edges.values():
            for end in (e.tail, e.head):
                if end is not None and end[0] == "B":
                    pts.append(end[1])
        return pts

    def slot_is_head(self, c, k) -> bool:
        e = self.edges[self.crossings[c][k]]
        return e.head == ("X", c, k)

    # ------------------------------------------------------------------ signs
    def crossing_sign(self, c) -> int:
        return 1 if self.slot_is_head(c, 3) else -1

    def shading_sign(self, c) -> int:
        """s(c): +1 iff the corner between slots 0 and 1 is shaded.  Slot 0 is
        the head of its edge, so that corner is the edge's right side."""
        e = self.edges[self.crossings[c][0]]
        return 1 if not e.left_shaded else -1

    def boundary_sign(self, p) -> int:
        e = self.boundary_edge(p)
        if e.head == ("B", p):
            return 1 if not e.left_shaded else -1
        return 1 if e.left_shaded else -1

    def w_over(self, c):
        return self.edges[self.crossings[c][1]].weight

    def w_under(self, c):
        return self.edges[self.crossings[c][0]].weight

    def n_plus(self):
        return sum(1 for c in self.order if self.crossing_sign(c) > 0)

    def n_minus(self):
        return sum(1 for c in self.order if self.crossing_sign(c) < 0)

    # ------------------------------------------------------------------ resolutions
    def resolve(self, v) -> Resolution:
        if len(v) != self.n:
            raise DiagramError("LengthMismatch", f"vertex of length {len(v)} for {self.n} crossings")
        key = tuple(v)
        res = self._cache.get(("res", key))
        if res is not None:
            return res
        uf = _UF()
        for eid in self.edges:
            uf.find(eid)
        for c, bit in zip(self.order, key):
            a, b, cc, d = self.crossings[c]
            if bit == 0:
                uf.union(a, b)
                uf.union(cc, d)
            else:
                uf.union(a, d)
                uf.union(b, cc)
        groups = {}
        for eid in self.edges:
            groups.setdefault(uf.find(eid), []).append(eid)
        comps = []
        for members in groups.values():
            atoms = set()
            ends = set()
            for eid in members:
                e = self.edges[eid]
                atoms.add(e.label)
                for end in (e.tail, e.head):
                    if end is not None and end[0] == "B":
                        ends.add(end[1])
            comps.append(Comp(frozenset(atoms), frozenset(ends)))
        res = Resolution(frozenset(comps))
        self._cache[("res", key)] = res
        return res

    def __repr__(self):
        return f"TangleDiagram(n={self.n}, edges={len(self.edges)}, boundary={self.boundary})"


# ---------------------------------------------------------------------------
# public operations

def checkerboard(diagram: TangleDiagram, convention: str = "outer-unshaded"):
    """Shade ``diagram`` with the given convention and return
    ``(shaded diagram, SignAssignment)``."""
    if convention not in CONVENTIONS:
        raise DiagramError("UnknownConvention", convention)
    d = diagram
    if convention != diagram.convention:
        d = flip_shading(diagram)
    signs = {c: d.shading_sign(c) for c in d.order}
    bsigns = {p: d.boundary_sign(p) for p in d.boundary}
    return d, SignAssignment(signs, bsigns)


def flip_shading(d: TangleDiagram) -> TangleDiagram:
    edges = {k: replace(e, left_shaded=not e.left_shaded) for k, e in d.edges.items()}
    conv = "outer-shaded" if d.convention == "outer-unshaded" else "outer-unshaded"
    return d.copy(edges=edges, convention=conv)


def crossing_data(d: TangleDiagram) -> CrossingData:
    signs = {c: d.crossing_sign(c) for c in d.order}
    return CrossingData(
        n_plus=sum(1 for s in signs.values() if s > 0),
        n_minus=sum(1 for s in signs.values() if s < 0),
        signs=signs,
        w_over={c: d.w_over(c) for c in d.order},
        w_under={c: d.w_under(c) for c in d.order},
    )


def resolve(d: TangleDiagram, v) -> Resolution:
    return d.resolve(v)


# ---------------------------------------------------------------------------
# faces and shading

def face_classes(d: TangleDiagram):
    """Union-find over edge sides ``('L', e)``, ``('R', e)`` and outer arcs
    ``('O', i)``; returns (uf, nodes).  Free loops are left alone."""
    uf = _UF()
    nodes = []
    for e in d.edges.values():
        if e.is_free_loop:
            continue
        nodes += [("L", e.id), ("R", e.id)]
    for i in range(len(d.boundary)):
        nodes.append(("O", i))
    for n in nodes:
        uf.find(n)
    for c in d.order:
        slots = d.crossings[c]
        for k in range(4):
            e0, e1 = slots[k], slots[(k + 1) % 4]
            t0 = d.edges[e0].tail == ("X", c, k)
            t1 = d.edges[e1].tail == ("X", c, (k + 1) % 4)
            uf.union((("L" if t0 else "R"), e0), (("R" if t1 else "L"), e1))
    nb = len(d.boundary)
    for i, p in enumerate(d.boundary):
        e = d.boundary_edge(p)
        if e.head == ("B", p):
            uf.union(("L", e.id), ("O", i))
            uf.union(("R", e.id), ("O", (i - 1) % nb))
        else:
            uf.union(("L", e.id), ("O", (i - 1) % nb))
            uf.union(("R", e.id), ("O", i))
    return uf, nodes


def pieces(d: TangleDiagram):
    """Connected pieces of the underlying graph, as lists of edge ids.  All
    edges touching the boundary share one piece (through the outer vertex)."""
    uf = _UF()
    for e in d.edges.values():
        uf.find(e.id)
        for end in (e.tail, e.head):
            if end is None:
                continue
            uf.union(e.id, ("X", end[1]) if end[0] == "X" else ("O",))
    out = {}
    for e in d.edges.values():
        out.setdefault(uf.find(e.id), []).append(e.id)
    return sorted(out.values(), key=lambda es: min(es))


def faces(d: TangleDiagram):
    """Map face representative -> list of sides."""
    uf, nodes = face_classes(d)
    out = {}
    for n in nodes:
        out.setdefault(uf.find(n), []).append(n)
    return out


def euler_check(d: TangleDiagram):
    """V - E + F = 2 for every piece (the disk exterior counts as one vertex)."""
    uf, nodes = face_classes(d)
    for piece in pieces(d):
        es = [d.edges[x] for x in piece]
        if all(e.is_free_loop for e in es):
            continue
        xs = set()
        has_o = False
        for e in es:
            for end in (e.tail, e.head):
                if end[0] == "X":
                    xs.add(end[1])
                else:
                    has_o = True
        sides = set()
        for e in es:
            sides.add(uf.find(("L", e.id)))
            sides.add(uf.find(("R", e.id)))
        V = len(xs) + (1 if has_o else 0)
        E = len(es)
        F = len(sides)
        if V - E + F != 2:
            raise DiagramError("NonPlanar", f"piece {sorted(piece)[:4]}...: V-E+F = {V - E + F}")
    return True


def recolor(d: TangleDiagram) -> TangleDiagram:
    """Fill in unknown ``left_shaded`` values from the known ones and the
    convention, checking consistency."""
    uf, nodes = face_classes(d)
    color = {}
    conflicts = []

    def setc(node, val):
        f = uf.find(node)
        if f in color and color[f] != val:
            conflicts.append(node)
        color[f] = val

    for e in d.edges.values():
        if e.is_free_loop or e.left_shaded is None:
            continue
        setc(("L", e.id), e.left_shaded)
        setc(("R", e.id), not e.left_shaded)
    if conflicts:
        raise DiagramError("ShadingConflict", str(conflicts[:3]))
    outer_shaded = d.convention == "outer-shaded"
    live = [e for e in d.edges.values() if not e.is_free_loop]
    # adjacency between faces across edges
    adj = {}
    for e in live:
        a, b = uf.find(("L", e.id)), uf.find(("R", e.id))
        if a == b:
            raise DiagramError("NonPlanar", f"edge {e.id} has the same face on both sides")
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    def spread(start):
        stack = [start]
        while stack:
            f = stack.pop()
            for g in adj.get(f, ()):
                want = not color[f]
                if g in color:
                    if color[g] != want:
                        raise DiagramError("ShadingConflict", "faces cannot be 2-coloured")
                else:
                    color[g] = want
                    stack.append(g)

    for f in list(color):
        spread(f)
    # pieces with nothing known: anchor the outer face
    for piece in pieces(d):
        es = [d.edges[x] for x in piece if not d.edges[x].is_free_loop]
        if not es:
            continue
        fs = {uf.find(("L", e.id)) for e in es} | {uf.find(("R", e.id)) for e in es}
        if any(f in color for f in fs):
            continue
        anchor = None
        if d.boundary and any(end[0] == "B" for e in es for end in (e.tail, e.head)):
            bp = d.basepoint_after if d.basepoint_after is not None else d.boundary[-1]
            anchor = uf.find(("O", d.boundary.index(bp)))
        if anchor is None:
            anchor = _outer_face(uf, es)
        color[anchor] = outer_shaded
        spread(anchor)
    edges = {}
    for e in d.edges.values():
        if e.is_free_loop:
            ls = e.left_shaded
            if ls is None:
                ls = not outer_shaded  # counterclockwise loop in the outer region
            edges[e.id] = replace(e, left_shaded=ls)
        else:
            edges[e.id] = replace(e, left_shaded=color[uf.find(("L", e.id))])
    return d.copy(edges=edges)


def _outer_face(uf, es):
    """Pick the face taken to be unbounded for a closed piece: the one with
    the most sides, ties broken by the smallest side label."""
    sizes = {}
    for e in es:
        for s in ("L", "R"):
            f = uf.find((s, e.id))
            sizes.setdefault(f, []).append((s, e.id))
    return min(sizes, key=lambda f: (-len(sizes[f]), min(str(x) for x in sizes[f])))


# ---------------------------------------------------------------------------
# assembly from crossing lists (shared by the parser and the builders)

def _continuation(crossings):
    """Map (crossing, slot) -> (crossing, opposite slot)."""
    return {(c, k): (c, (k + 2) % 4) for c in crossings for k in range(4)}


def assemble(ring, crossings, order, boundary=(), boundary_map=None, basepoint_after=None,
             convention="outer-unshaded", components=None, weights=None, parts=None,
             free_loops=(), directions=None, head_at=None, left_of=None):
    """Build and validate a diagram.

    ``crossings``: id -> 4 edge ids.  ``boundary_map``: point -> edge.
    ``components``: name -> ordered edge list (optional; discovered if absent).
    ``weights``/``parts``: name -> value, per component.
    ``directions``: optional edge -> (tail end, head end) forcing orientation.
    ``head_at``: optional edge -> crossing id or boundary point where the
    edge ends; needed only for strands whose listing reads the same both
    ways round (closed strands that never pass under, and bare arcs).
    """
    if len(boundary) % 2:
        raise DiagramError("OddBoundary", f"{len(boundary)} boundary points")
    occ = {}
    for c in order:
        slots = crossings[c]
        if len(slots) != 4:
            raise DiagramError("BadCrossing", f"{c} needs four edges")
        for k, e in enumerate(slots):
            occ.setdefault(e, []).append(("X", c, k))
    boundary_map = dict(boundary_map or {})
    for p in boundary:
        if p not in boundary_map:
            raise DiagramError("DanglingEdge", f"boundary point {p} has no edge")
        occ.setdefault(boundary_map[p], []).append(("B", p))
    for e in free_loops:
        if e in occ:
            raise DiagramError("BadLoop", f"free loop {e} also used at a crossing")
    for e, ends in occ.items():
        if len(ends) != 2:
            raise DiagramError("DanglingEdge", f"edge {e} occurs {len(ends)} times")
    # orientation: choose which of the two ends is the head
    head_of = {}
    if directions:
        for e, (t, h) in directions.items():
            head_of[e] = h
    constraints = []  # (edge, end, is_head)
    pairs = []  # over strand: exactly one of the two ends is a head
    for c in order:
        a, b, cc, d = crossings[c]
        constraints.append((a, ("X", c, 0), True))
        constraints.append((cc, ("X", c, 2), False))
        pairs.append(((b, ("X", c, 1)), (d, ("X", c, 3))))

    def other(e, end):
        ends = occ[e]
        return ends[1] if ends[0] == end else ends[0]

    def fix(e, end, is_head):
        h = end if is_head else other(e, end)
        if e in head_of:
            if head_of[e] != h:
                raise DiagramError("BadOrientation", f"edge {e} cannot be oriented consistently")
            return False
        head_of[e] = h
        return True

    for e, end, is_head in constraints:
        fix(e, end, is_head)
    for e, c in (head_at or {}).items():
        ends = [x for x in occ.get(e, ()) if x[1] == c]
        if len(ends) != 1:
            raise DiagramError("BadOrientation", f"edge {e} does not end at a single slot of {c}")
        fix(e, ends[0], True)
    # propagate through over-strand pairs until stable
    comps_given = components or {}
    changed = True
    while changed:
        changed = False
        for (e1, s1), (e3, s3) in pairs:
            k1 = e1 in head_of
            k3 = e3 in head_of
            if k1 and not k3:
                changed |= fix(e3, s3, head_of[e1] != s1)
            elif k3 and not k1:
                changed |= fix(e1, s1, head_of[e3] != s3)
            elif k1 and k3:
                if (head_of[e1] == s1) == (head_of[e3] == s3):
                    raise DiagramError("BadOrientation", f"over-strand through {s1[1]} is inconsistent")
        if not changed:
            # seed an unoriented strand from the component listing
            for e in _unoriented(occ, head_of):
                seed = _seed_direction(e, occ, comps_given, crossings)
                fix(e, seed, True)
                changed = True
                break
    # build edges
    strand_edges = sorted(occ)
    edges = {}
    for e in strand_edges:
        h = head_of[e]
        t = other(e, h)
        edges[e] = Edge(e, t, h)
    for e in free_loops:
        edges[e] = Edge(e, None, None)
    # components
    found = _trace_components(edges, crossings)
    if components:
        named = {}
        for name, es in components.items():
            key = frozenset(es)
            named[key] = name
        comp_of = {}
        for es in found:
            key = frozenset(es)
            if key not in named:
                raise DiagramError("BadComponent", f"edges {sorted(es)} do not match a listed component")
            for e in es:
                comp_of[e] = named[key]
        ordered = {named[frozenset(es)]: es for es in found}
    else:
        ordered = {f"k{i + 1}": es for i, es in enumerate(found)}
        comp_of = {e: name for name, es in ordered.items() for e in es}
    weights = {} if weights is None else weights
    parts = {} if parts is None else parts
    for name in ordered:
        if name not in weights:
            raise DiagramError("MissingWeight", f"component {name} has no weight")
    for e in list(edges):
        name = comp_of[e]
        edges[e] = replace(edges[e], weight=ring(weights[name]), part=parts.get(name),
                           component=name)
    for e, ls in (left_of or {}).items():
        if e in edges:
            edges[e] = replace(edges[e], left_shaded=ls)
    d = TangleDiagram(ring, crossings, order, edges, boundary, basepoint_after, convention, ordered)
    euler_check(d)
    return recolor(d)


def _unoriented(occ, head_of):
    return [e for e in occ if e not in head_of]


def _seed_direction(e, occ, components, crossings):
    """For a strand without under-crossings, read the direction off the
    component listing: the listed successor starts where this edge ends."""
    for es in components.values():
        if e in es:
            i = es.index(e)
            if len(es) > 1:
                # the successor starts at this edge's head; the last edge of
                # an open strand has none, so use the predecessor instead
                fwd = i + 1 < len(es)
                other = es[i + 1] if fwd else es[i - 1]
                ends = occ[e]
                hits = []
                for end in ends:
                    if end[0] == "X":
                        c, k = end[1], end[2]
                        if crossings[c][(k + 2) % 4] == other:
                            hits.append(end)
                if len(hits) == 1:
                    if fwd:
                        return hits[0]
                    rest = [x for x in ends if x != hits[0]]
                    if len(rest) == 1:
                        return rest[0]
            break
    # fall back: the second occurrence in file order is the head
    return occ[e][1]


def _trace_components(edges, crossings):
    """Group edges into strands, each listed in orientation order."""
    nxt = {}
    for e in edges.values():
        if e.head is not None and e.head[0] == "X":
            c, k = e.head[1], e.head[2]
            nxt[e.id] = crossings[c][(k + 2) % 4]
    prev = {v: k for k, v in nxt.items()}
    seen = set()
    out = []
    # open strands start at the boundary
    for e in sorted(edges):
        if e in seen or edges[e].tail is None:
            continue
        if edges[e].tail[0] == "B":
            path = [e]
            seen.add(e)
            while path[-1] in nxt:
                n2 = nxt[path[-1]]
                path.append(n2)
                seen.add(n2)
            out.append(path)
    for e in sorted(edges):
        if e in seen:
            continue
        path = [e]
        seen.add(e)
        cur = e
        while cur in nxt and nxt[cur] not in seen:
            cur = nxt[cur]
            path.append(cur)
            seen.add(cur)
        out.append(path)
    return out


# ---------------------------------------------------------------------------
# the .tng format

_KV = re.compile(r"([A-Za-z_][\w\-]*)=(\([^)]*\)|\S+)")


def _kv(text):
    out = {}
    for k, v in _KV.findall(text):
        if v.startswith("("):
            v = [x.strip() for x in v[1:-1].split(",") if x.strip()]
        out[k] = v
    return out


def parse_tangle(text: str, ring: Ring | None = None, convention: str | None = None) -> TangleDiagram:
    """Parse the ``.tng`` format.

    Boundary points may be written ``b1:e1`` to name their edge; plain names
    are paired with the dangling crossing slots in file order.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("tangle"):
        raise DiagramError("ParseError", "expected a 'tangle' header")
    head = _kv(lines[0])
    try:
        ring = ring or ring_make(head.get("ring", "Q"))
    except ValueError as exc:
        raise DiagramError("ParseError", str(exc))
    conv = convention or head.get("shading", "outer-unshaded")
    if conv not in CONVENTIONS:
        raise DiagramError("ParseError", f"unknown shading {conv}")
    bnames = head.get("boundary", [])
    if isinstance(bnames, str):
        bnames = [bnames]
    boundary, bmap = [], {}
    for b in bnames:
        if ":" in b:
            p, e = (x.strip() for x in b.split(":", 1))
            bmap[p] = e
        else:
            p = b
        boundary.append(p)
    crossings, order, components, weights, parts = {}, [], {}, {}, {}
    head_at, loop_shading = {}, {}
    ended = False
    for ln in lines[1:]:
        if ln == "end":
            ended = True
            break
        m = re.fullmatch(r"X\s+(\S+)\s*=\s*\(([^)]*)\)", ln)
        if m:
            cid = m.group(1)
            slots = tuple(x.strip() for x in m.group(2).split(","))
            if cid in crossings:
                raise DiagramError("ParseError", f"duplicate crossing {cid}")
            if len(slots) != 4:
                raise DiagramError("BadCrossing", f"{cid} needs four edges")
            crossings[cid] = slots
            order.append(cid)
            continue
        m = re.fullmatch(r"component\s+(\S+)\s+(.*)", ln)
        if m:
            name = m.group(1)
            kv = _kv(m.group(2))
            es = kv.get("edges", [])
            if isinstance(es, str):
                es = [es]
            components[name] = list(es)
            if "weight" in kv:
                try:
                    weights[name] = ring.parse(kv["weight"])
                except ValueError as exc:
                    raise DiagramError("ParseError", str(exc))
            if "part" in kv:
                parts[name] = int(kv["part"])
            if "heads" in kv:
                hs = kv["heads"] if isinstance(kv["heads"], list) else [kv["heads"]]
                if len(hs) != len(es):
                    raise DiagramError("ParseError", f"component {name}: heads and edges differ in length")
                head_at.update(zip(es, hs))
            if "left" in kv:
                if kv["left"] not in ("shaded", "unshaded"):
                    raise DiagramError("ParseError", f"component {name}: left must be shaded or unshaded")
                if es:
                    loop_shading[es[0]] = kv["left"] == "shaded"
            continue
        raise DiagramError("ParseError", f"cannot read line: {ln}")
    if not ended:
        raise DiagramError("ParseError", "missing 'end'")
    if len(boundary) % 2:
        raise DiagramError("OddBoundary", f"{len(boundary)} boundary points")
    counts = {}
    for c in order:
        for e in crossings[c]:
            counts[e] = counts.get(e, 0) + 1
    dangling = []
    for c in order:
        for k, e in enumerate(crossings[c]):
            if counts[e] == 1 and e not in bmap.values():
                dangling.append(e)
    free_pts = [p for p in boundary if p not in bmap]
    if len(free_pts) != len(dangling) and free_pts:
        raise DiagramError("DanglingEdge", "boundary points and dangling edges do not match up")
    for p, e in zip(free_pts, dangling):
        bmap[p] = e
    used = set(counts) | set(bmap.values())
    free_loops = []
    for name, es in components.items():
        for e in es:
            if e not in used:
                free_loops.append(e)
    for e, k in counts.items():
        if k > 2:
            raise DiagramError("DanglingEdge", f"edge {e} occurs {k} times")
    return assemble(ring, crossings, order, boundary, bmap, head.get("basepoint-after"), conv,
                    components or None, weights, parts, free_loops, head_at=head_at, left_of=loop_shading)


def format_tangle(d: TangleDiagram) -> str:
    """Serialize to ``.tng`` (boundary points written with their edges)."""
    head = f"tangle ring={d.ring.spec}"
    if d.boundary:
        pts = ",".join(f"{p}:{d.boundary_edge(p).id}" for p in d.boundary)
        head += f" boundary=({pts})"
        if d.basepoint_after:
            head += f" basepoint-after={d.basepoint_after}"
    head += f" shading={d.convention}"
    out = [head]
    for c in d.order:
        out.append(f"X {c} = ({','.join(d.crossings[c])})")
    # list components the way the parser traces them, so text round trips
    comps = []
    for es in _trace_components(d.edges, d.crossings):
        name = d.edges[es[0]].component
        w = d.edges[es[0]].weight
        line = f"component {name} edges=({','.join(es)}) weight={_lit(w)}"
        part = d.edges[es[0]].part
        if part is not None:
            line += f" part={part}"
        if _needs_heads(d, es):
            line += f" heads=({','.join(d.edges[e].head[1] for e in es)})"
        e0 = d.edges[es[0]]
        if e0.is_free_loop and e0.left_shaded != (d.convention == "outer-unshaded"):
            # not the counterclockwise loop in the outer region the parser assumes
            line += f" left={'shaded' if e0.left_shaded else 'unshaded'}"
        comps.append([e0, line])
    text = "\n".join(out + [ln for _, ln in comps] + ["end"]) + "\n"
    if d.n and any(e.left_shaded is not None for e in d.edges.values()):
        # where the parser would pick a different outer face, say so
        trial = parse_tangle(text, d.ring)
        for c in comps:
            e0 = c[0]
            if not e0.is_free_loop and trial.edges[e0.id].left_shaded != e0.left_shaded:
                c[1] += f" left={'shaded' if e0.left_shaded else 'unshaded'}"
        text = "\n".join(out + [ln for _, ln in comps] + ["end"]) + "\n"
    return text


def _needs_heads(d, es):
    # a closed strand that is over at every crossing it meets has no slot 0
    # or slot 2 to pin its direction
    e0 = d.edges[es[0]]
    if e0.tail is None:
        return False
    if e0.tail[0] == "B" or d.edges[es[-1]].head[0] == "B":
        return len(es) == 1 and e0.head[0] == "B"
    return all(d.edges[e].head[2] in (1, 3) for e in es)


def _lit(w):
    from fractions import Fraction
    from .coeff import Fp

    if isinstance(w, Fp):
        return f"{w.value} mod {w.p}"
    if isinstance(w, Fraction) and w.denominator != 1:
        return f"{w.numerator}/{w.denominator}"
    return str(int(w) if not isinstance(w, Fp) else w)


# ---------------------------------------------------------------------------
# builders

def from_pd(pd, weights=None, ring=None, convention="outer-unshaded", parts=None, names=None):
    """Link diagram from a PD code: a list of 4-tuples of edge labels.

    Components are discovered and named ``k1, k2, ...`` in order of their
    smallest edge label; ``weights`` is a list (per component) or a dict.
    """
    ring = ring or Ring("Q")
    crossings = {}
    order = []
    for i, x in enumerate(pd):
        cid = names[i] if names else f"c{i + 1}"
        crossings[cid] = tuple(str(e) for e in x)
        order.append(cid)
    probe = assemble(ring, crossings, order, weights=_AllZero(), convention=convention)
    comps = sorted(probe.components.values(), key=lambda es: min(_natural(e) for e in es))
    named = {f"k{i + 1}": es for i, es in enumerate(comps)}
    if weights is None:
        weights = [0] * len(named)
    if not isinstance(weights, dict):
        weights = {f"k{i + 1}": w for i, w in enumerate(weights)}
    if parts is not None and not isinstance(parts, dict):
        parts = {f"k{i + 1}": p for i, p in enumerate(parts)}
    return assemble(ring, crossings, order, convention=convention, components=named,
                    weights=weights, parts=parts)


class _AllZero(dict):
    def __contains__(self, k):
        return True

    def __getitem__(self, k):
        return 0


def _natural(e):
    return (0, int(e), "") if str(e).isdigit() else (1, 0, str(e))


def unknot(weight=0, ring=None, convention="outer-unshaded", name="k1", edge="e1", part=None):
    ring = ring or Ring("Q")
    parts = {name: part} if part is not None else None
    return assemble(ring, {}, [], convention=convention, components={name: [edge]},
                    weights={name: weight}, parts=parts, free_loops=[edge])


def from_braid(word, strands, weights=None, ring=None, closed=True, convention="outer-unshaded",
               parts=None):
    """Closure (or the open tangle) of a braid word.

    ``word`` is a list of nonzero ints: ``+i`` is sigma_i (the strand going
    from position i to i+1 passes over), ``-i`` its inverse.  All strands
    point up.  For an open braid the boundary is the bottom points
    ``b1..bn`` followed by the top points ``tn..t1`` (counterclockwise).
    """
    ring = ring or Ring("Q")
    cur = [f"s{j}_0" for j in range(1, strands + 1)]
    bottom = list(cur)
    tail_end, head_end = {}, {}
    crossings, order = {}, []
    for idx, g in enumerate(word):
        i = abs(g)
        if not 1 <= i < strands:
            raise DiagramError("BadBraid", f"generator {g} on {strands} strands")
        left_in, right_in = cur[i - 1], cur[i]
        cid = f"x{idx + 1}"
        left_out = f"s{i}_{idx + 1}"
        right_out = f"s{i + 1}_{idx + 1}"
        # positions counterclockwise: SE, NE, NW, SW
        # strand A: SW -> NE (left_in -> right_out), strand B: SE -> NW (right_in -> left_out)
        if g > 0:  # A over, B under: start at SE (B incoming)
            slots = (right_in, right_out, left_out, left_in)
        else:  # B over, A under: start at SW (A incoming)
            slots = (left_in, right_in, right_out, left_out)
        crossings[cid] = slots
        order.append(cid)
        for k, e in enumerate(slots):
            if e in (left_in, right_in):
                head_end[e] = ("X", cid, k)
            else:
                tail_end[e] = ("X", cid, k)
        cur[i - 1], cur[i] = left_out, right_out
    top = list(cur)
    if closed:
        ren = {t: b for b, t in zip(bottom, top)}
        crossings = {c: tuple(ren.get(e, e) for e in s) for c, s in crossings.items()}
        loops = [b for b, t in zip(bottom, top) if b == t]
        dirs = {}
        for b, t in zip(bottom, top):
            if b != t:
                dirs[b] = (tail_end[t], head_end[b])
        for e in tail_end:
            if e in head_end and e not in ren:
                dirs[e] = (tail_end[e], head_end[e])
        probe = assemble(ring, crossings, order, weights=_AllZero(), free_loops=loops,
                         convention=convention, directions=dirs)
        named = {f"k{i + 1}": es for i, es in enumerate(probe.components.values())}
        w = _per_comp(weights, named)
        pp = _per_comp(parts, named) if parts is not None else None
        return assemble(ring, crossings, order, components=named, weights=w, parts=pp,
                        free_loops=loops, convention=convention, directions=dirs)
    boundary = [f"b{j}" for j in range(1, strands + 1)] + [f"t{j}" for j in range(strands, 0, -1)]
    bmap = {f"b{j}": bottom[j - 1] for j in range(1, strands + 1)}
    bmap.update({f"t{j}": top[j - 1] for j in range(1, strands + 1)})
    dirs = {}
    for j in range(strands):
        b, t = bottom[j], top[j]
        if b == t:
            dirs[b] = (("B", f"b{j + 1}"), ("B", f"t{j + 1}"))
        else:
            dirs[b] = (("B", f"b{j + 1}"), head_end[b])
            dirs[t] = (tail_end[t], ("B", f"t{j + 1}"))
    for e in tail_end:
        if e in head_end:
            dirs[e] = (tail_end[e], head_end[e])
    probe = assemble(ring, crossings, order, boundary, bmap, "t1", convention, weights=_AllZero(),
                     directions=dirs)
    named = {f"k{i + 1}": es for i, es in enumerate(probe.components.values())}
    w = _per_comp(weights, named)
    pp = _per_comp(parts, named) if parts is not None else None
    return assemble(ring, crossings, order, boundary, bmap, "t1", convention, named, w, pp,
                    directions=dirs)


def _per_comp(values, named):
    if values is None:
        return {k: 0 for k in named}
    if isinstance(values, dict):
        return values
    vals = list(values)
    return {k: vals[i] for i, k in enumerate(named)}


def disjoint_union(d1: TangleDiagram, d2: TangleDiagram, prefix=("a.", "b.")) -> TangleDiagram:
    """Split union of two link diagrams (each in its own disk)."""
    if d1.boundary or d2.boundary:
        raise DiagramError("NotALink", "disjoint_union is for links")
    if d1.convention != d2.convention:
        d2 = flip_shading(d2)
    crossings, order, edges, comps = {}, [], {}, {}
    for d, pre in ((d1, prefix[0]), (d2, prefix[1])):
        for c in d.order:
            crossings[pre + c] = tuple(pre + e for e in d.crossings[c])
            order.append(pre + c)
        for e in d.edges.values():
            def mv(end):
                if end is None:
                    return None
                return ("X", pre + end[1], end[2])
            edges[pre + e.id] = replace(e, id=pre + e.id, tail=mv(e.tail), head=mv(e.head),
                                        atom=None if e.atom is None else pre + e.atom,
                                        component=pre + (e.component or ""))
        for name, es in d.components.items():
            comps[pre + name] = [pre + e for e in es]
    return TangleDiagram(d1.ring, crossings, order, edges, (), None, d1.convention, comps)


def change_crossing(d: TangleDiagram, c) -> TangleDiagram:
    """Swap over and under at ``c``; edges, weights and shading are kept."""
    a, b, cc, dd = d.crossings[c]
    if d.slot_is_head(c, 3):  # over runs d -> b; new slot 0 is d
        new = (dd, a, b, cc)
        rot = 3
    else:  # over runs b -> d; new slot 0 is b
        new = (b, cc, dd, a)
        rot = 1
    crossings = dict(d.crossings)
    crossings[c] = new
    edges = dict(d.edges)

    def moved(end):
        if end is not None and end[0] == "X" and end[1] == c:
            return ("X", c, (end[2] - rot) % 4)
        return end

    for e in set(new):
        ed = edges[e]
        edges[e] = replace(ed, tail=moved(ed.tail), head=moved(ed.head))
    return d.copy(crossings=crossings, edges=edges)


def with_weights(d: TangleDiagram, weights: dict, ring=None) -> TangleDiagram:
    """Replace component weights (component name -> value)."""
    ring = ring or d.ring
    edges = {}
    for e in d.edges.values():
        w = weights.get(e.component, e.weight)
        edges[e.id] = replace(e, weight=ring(w))
    return d.copy(edges=edges, ring=ring)


def with_parts(d: TangleDiagram, parts: dict) -> TangleDiagram:
    edges = {e.id: replace(e, part=parts.get(e.component, e.part)) for e in d.edges.values()}
    return d.copy(edges=edges)


def reorder(d: TangleDiagram, order) -> TangleDiagram:
    if sorted(order) != sorted(d.order):
        raise DiagramError("BadOrder", "not a permutation of the crossings")
    return d.copy(order=list(order))


def reverse_component(d: TangleDiagram, name) -> TangleDiagram:
    """Reverse the orientation of one component.  Crossing tuples are
    re-rooted so slot 0 is again the incoming under-strand."""
    es = set(d.components[name])
    edges = {}
    for e in d.edges.values():
        if e.id in es:
            edges[e.id] = replace(e, tail=e.head, head=e.tail,
                                  left_shaded=None if e.left_shaded is None else not e.left_shaded)
        else:
            edges[e.id] = e
    crossings = dict(d.crossings)
    for c in d.order:
        slots = d.crossings[c]
        e0 = edges[slots[0]]
        if e0.head == ("X", c, 0):
            continue
        # slot 2 is now the incoming under strand: rotate by two
        new = (slots[2], slots[3], slots[0], slots[1])
        crossings[c] = new
        for e in set(slots):
            ed = edges[e]

            def mv(end):
                if end is not None and end[0] == "X" and end[1] == c:
                    return ("X", c, (end[2] + 2) % 4)
                return end

            edges[e] = replace(ed, tail=mv(ed.tail), head=mv(ed.head))
    comps = dict(d.components)
    comps[name] = list(reversed(d.components[name]))
    return d.copy(crossings=crossings, edges=edges, components=comps)


def mirror(d: TangleDiagram) -> TangleDiagram:
    out = d
    for c in d.order:
        out = change_crossing(out, c)
    return out
