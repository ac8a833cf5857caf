"""Movies: elementary moves on diagrams and the chain maps they induce.

Reidemeister maps are built locally and extended by the identity.  The local
map on the Khovanov level comes from delooping and Gaussian elimination on
both sides (the two minimal complexes are matched by an isomorphism); the
curved correction of negative homological shift is then solved for so that
the sum commutes with the total differential.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace

from . import cobcat
from .bs import bs_complex, vertices
from .ckom import (ChainMap, IntegrityError, identity_map, mat_add_into, mat_clean, mat_compose,
                   mat_entries, mat_get, mat_sum, verify_chain_map, gaussian_simplify)
from .diagram import (DiagramError, Edge, TangleDiagram, _trace_components, change_crossing,
                      euler_check, face_classes, faces, parse_tangle, recolor)

KINDS = ("R1", "R2", "R3", "birth", "death", "saddle", "dot", "plane-isotopy")


# ---------------------------------------------------------------------------
# events and movies

@dataclass
class MovieEvent:
    kind: str
    direction: str | None = None
    args: dict = field(default_factory=dict)
    line: int | None = None

    def get(self, key, default=None):
        return self.args.get(key, default)

    def __str__(self):
        bits = [self.kind.lower()]
        if self.direction:
            bits.append(self.direction)
        for k, v in self.args.items():
            bits.append(f"{k}=({','.join(v)})" if isinstance(v, (list, tuple)) else f"{k}={v}")
        return " ".join(bits)


def event(text: str) -> MovieEvent:
    """Parse one event line (without the leading ``event``)."""
    words = text.split()
    if not words:
        raise DiagramError("ParseError", "empty event")
    kind = words[0].lower()
    kind = {"r1": "R1", "r2": "R2", "r3": "R3", "isotopy": "plane-isotopy"}.get(kind, kind)
    if kind not in KINDS:
        raise DiagramError("ParseError", f"unknown event kind {words[0]}")
    rest = text.split(None, 1)[1] if len(words) > 1 else ""
    direction = None
    if kind in ("R1", "R2"):
        if len(words) < 2 or words[1] not in ("add", "remove"):
            raise DiagramError("ParseError", f"{kind} needs add or remove")
        direction = words[1]
        rest = rest.split(None, 1)[1] if len(rest.split()) > 1 else ""
    args = {}
    for k, v in re.findall(r"([A-Za-z_][\w\-]*)=(\([^)]*\)|\S+)", rest):
        if v.startswith("("):
            v = [x.strip() for x in v[1:-1].split(",") if x.strip()]
        args[k] = v
    return MovieEvent(kind, direction, args)


@dataclass
class Movie:
    initial: TangleDiagram
    events: list = field(default_factory=list)
    partition: dict | None = None

    def frames(self):
        d = self.initial
        out = [d]
        for n, e in enumerate(self.events):
            try:
                d = apply_event(d, e)
            except DiagramError as exc:
                raise DiagramError(exc.code, f"event {n + 1} ({e}): {exc}") from exc
            out.append(d)
        return out

    def final(self):
        return self.frames()[-1]


def parse_movie(text: str, ring=None, convention=None) -> Movie:
    """Read the ``.movie`` format: header, inline tangle, ``part`` lines,
    ``event`` lines, ``end``."""
    from .coeff import ring_make

    lines = [ln.split("#", 1)[0].rstrip() for ln in text.splitlines()]
    lines = [(n + 1, ln.strip()) for n, ln in enumerate(lines) if ln.strip()]
    if not lines or not lines[0][1].startswith("movie"):
        raise DiagramError("ParseError", "expected a 'movie' header")
    head = dict(re.findall(r"(\w[\w\-]*)=(\S+)", lines[0][1]))
    try:
        ring = ring or ring_make(head.get("ring", "Q"))
    except ValueError as exc:
        raise DiagramError("ParseError", str(exc))
    k = 1
    tng = []
    while k < len(lines):
        tng.append(lines[k][1])
        k += 1
        if tng[-1] == "end":
            break
    if not tng or not tng[0].startswith("tangle") or tng[-1] != "end":
        raise DiagramError("ParseError", "movie needs an inline tangle")
    d = parse_tangle("\n".join(tng), ring, convention or head.get("shading"))
    partition = None
    events = []
    ended = False
    for n, ln in lines[k:]:
        if ln == "end":
            ended = True
            break
        if ln.startswith("part"):
            partition = partition or {}
            for name, p in re.findall(r"(\S+)=(\d+)", ln):
                partition[name] = int(p)
            continue
        if ln.startswith("event"):
            ev = event(ln[5:].strip())
            ev.line = n
            events.append(ev)
            continue
        raise DiagramError("ParseError", f"line {n}: cannot read {ln!r}")
    if not ended:
        raise DiagramError("ParseError", "missing final 'end'")
    if partition:
        from .diagram import with_parts

        d = with_parts(d, partition)
    return Movie(d, events, partition)


def format_movie(m: Movie) -> str:
    from .diagram import format_tangle

    out = [f"movie ring={m.initial.ring.spec} shading={m.initial.convention}"]
    out.append(format_tangle(m.initial).rstrip("\n"))
    if m.partition:
        out.append("part " + " ".join(f"{k}={v}" for k, v in sorted(m.partition.items())))
    for e in m.events:
        out.append(f"event {e}")
    out.append("end")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# regions: a diagram cut into a local tangle and its outside

@dataclass
class Region:
    crossings: tuple  # crossings inside, in the diagram's order
    internal: frozenset  # edges lying entirely inside
    through: dict  # edge -> list of (entry name, exit name) for crossingless passes


def split_region(d: TangleDiagram, region: Region):
    """Cut ``d`` along the boundary of ``region``.

    Returns ``(local, outside)``, two non-embedded tangles whose pieces keep
    the labels of the edges they came from.  An edge end at a crossing of
    the region is cut at the point ``edge~h`` / ``edge~t``.
    """
    S = set(region.crossings)
    edges_l, edges_o = {}, {}

    def piece(store, eid, e, tail, head):
        store[eid] = Edge(eid, tail, head, e.weight, e.part, e.left_shaded, e.label, e.component)

    inside = lambda end: end is not None and end[0] == "X" and end[1] in S  # noqa: E731
    for e in d.edges.values():
        if e.id in region.through:
            passes = region.through[e.id]
            for i, (a, b) in enumerate(passes):
                piece(edges_l, f"{e.id}@{i}", e, ("B", a), ("B", b))
            if e.is_free_loop:
                n = len(passes)
                for i in range(n):
                    piece(edges_o, f"{e.id}@o{i}", e, ("B", passes[i][1]), ("B", passes[(i + 1) % n][0]))
            else:
                ends = [e.tail] + [("B", x) for ab in passes for x in ab] + [e.head]
                for i in range(len(passes) + 1):
                    piece(edges_o, f"{e.id}@o{i}", e, ends[2 * i], ends[2 * i + 1])
            continue
        if e.is_free_loop:
            piece(edges_o, e.id, e, None, None)
            continue
        tin, hin = inside(e.tail), inside(e.head)
        if e.id in region.internal:
            if not (tin and hin):
                raise IntegrityError(f"internal edge {e.id} leaves the region")
            piece(edges_l, e.id, e, e.tail, e.head)
        elif not tin and not hin:
            piece(edges_o, e.id, e, e.tail, e.head)
        else:
            piece(edges_o, e.id, e, ("B", f"{e.id}~t") if tin else e.tail,
                  ("B", f"{e.id}~h") if hin else e.head)
            if tin:
                piece(edges_l, f"{e.id}@t", e, e.tail, ("B", f"{e.id}~t"))
            if hin:
                piece(edges_l, f"{e.id}@h", e, ("B", f"{e.id}~h"), e.head)

    def build(store, crossings):
        slot = {}
        for e in store.values():
            for end in (e.tail, e.head):
                if end is not None and end[0] == "X":
                    slot[(end[1], end[2])] = e.id
        cr = {c: tuple(slot[(c, k)] for k in range(4)) for c in crossings}
        pts = sorted({end[1] for e in store.values() for end in (e.tail, e.head)
                      if end is not None and end[0] == "B"})
        return TangleDiagram(d.ring, cr, list(crossings), store, tuple(pts), None, d.convention, {},
                             embedded=False)

    local = build(edges_l, [c for c in d.order if c in S])
    outside = build(edges_o, [c for c in d.order if c not in S])
    return local, outside


# ---------------------------------------------------------------------------
# surgery helpers

_COMPASS = ("E", "N", "W", "S")


def _place(c, at, under_in):
    """Crossing tuple from compass positions: ``at`` maps a direction to
    ``(edge, 'h' | 't')``; slots run counterclockwise from ``under_in``."""
    k0 = _COMPASS.index(under_in)
    slots = [at[_COMPASS[(k0 + j) % 4]] for j in range(4)]
    ends = {}
    for j, (e, tag) in enumerate(slots):
        ends.setdefault(e, {})[tag] = ("X", c, j)
    return tuple(e for e, _ in slots), ends


def _reroute(crossings, end, new_id):
    if end is not None and end[0] == "X":
        c, k = end[1], end[2]
        s = list(crossings[c])
        s[k] = new_id
        crossings[c] = tuple(s)


def _fresh(d, edges=(), crossings=()):
    for e in edges:
        if e in d.edges:
            raise DiagramError("LabelInUse", f"edge {e} already exists")
    for c in crossings:
        if c in d.crossings:
            raise DiagramError("LabelInUse", f"crossing {c} already exists")
    if len(set(edges)) != len(edges) or len(set(crossings)) != len(crossings):
        raise DiagramError("LabelInUse", "fresh labels repeat")


def _finish(d, crossings, order, edges, names=None):
    """Rebuild components (keeping old names where possible), check
    planarity and fill in shading."""
    found = _trace_components(edges, crossings)
    used, comps = set(), {}
    names = names or {}
    for path in found:
        name = None
        for e in path:
            cand = names.get(e) or edges[e].component
            if cand is not None and cand not in used:
                name = cand
                break
        if name is None:
            n = 1
            while f"k{n}" in used or f"k{n}" in d.components:
                n += 1
            name = f"k{n}"
        used.add(name)
        comps[name] = path
    for name, path in comps.items():
        ws = {edges[e].weight for e in path}
        if len(ws) > 1:
            raise DiagramError("WeightMismatch", f"component {name} has weights {sorted(map(str, ws))}")
        for e in path:
            edges[e] = replace(edges[e], component=name)
    out = d.copy(crossings=crossings, order=order, edges=edges, components=comps)
    if out.embedded:
        euler_check(out)
    return recolor(out)


def _edge(d, eid):
    if eid not in d.edges:
        raise DiagramError("BadAddress", f"no edge {eid}")
    return d.edges[eid]


def _crossing(d, c):
    if c not in d.crossings:
        raise DiagramError("BadAddress", f"no crossing {c}")
    return c


def _one(v, what):
    if isinstance(v, (list, tuple)):
        if len(v) != 1:
            raise DiagramError("BadAddress", f"{what} takes one label")
        return v[0]
    if v is None:
        raise DiagramError("BadAddress", f"missing {what}")
    return v


def _many(v, n, what):
    if v is None:
        raise DiagramError("BadAddress", f"missing {what}")
    v = [v] if isinstance(v, str) else list(v)
    if len(v) != n:
        raise DiagramError("BadAddress", f"{what} needs {n} labels")
    return v


def _walk_out(d, S, internal):
    """Strands through the crossings ``S`` after those crossings are removed.

    Returns a list of ``(start edge, tail, head, passes)``; ``tail`` is None
    for strands that close up into free loops.
    """
    S = set(S)
    inside = lambda end: end is not None and end[0] == "X" and end[1] in S  # noqa: E731
    touching = [e for e in d.edges.values() if not e.is_free_loop and (inside(e.tail) or inside(e.head))]
    external = {e.id for e in touching if e.id not in internal}
    seen = set()
    out = []

    def walk(start, closed):
        cur = start
        passes = []
        entry = None
        while True:
            seen.add(cur)
            e = d.edges[cur]
            if not inside(e.head):
                return e.head, passes
            if cur in external:
                entry = f"{cur}~h"
            c, k = e.head[1], e.head[2]
            nxt = d.crossings[c][(k + 2) % 4]
            if nxt in external:
                passes.append((entry, f"{nxt}~t"))
            if closed and nxt == start:
                return None, passes
            cur = nxt

    for e in sorted(touching, key=lambda e: e.id):
        if e.id in external and not inside(e.tail):
            head, passes = walk(e.id, False)
            out.append((e.id, e.tail, head, passes))
    for e in sorted(touching, key=lambda e: e.id):
        if e.id in external and e.id not in seen:
            _, passes = walk(e.id, True)
            out.append((e.id, None, None, passes))
    if any(e.id not in seen for e in touching):
        raise DiagramError("BadAddress", "a closed strand lies inside the region")
    return out


def _remove_crossings(d, S, internal):
    """Delete the crossings ``S`` (and ``internal`` edges), joining strands.
    Returns the new crossings/order/edges and the ``through`` map."""
    chains = _walk_out(d, S, internal)
    crossings = {c: s for c, s in d.crossings.items() if c not in S}
    order = [c for c in d.order if c not in S]
    inside = lambda end: end is not None and end[0] == "X" and end[1] in S  # noqa: E731
    edges = {k: e for k, e in d.edges.items()
             if e.is_free_loop or not (inside(e.tail) or inside(e.head))}
    through = {}
    for start, tail, head, passes in chains:
        e = d.edges[start]
        edges[start] = replace(e, tail=tail, head=head)
        if head is not None:
            _reroute(crossings, head, start)
        through[start] = passes
    return crossings, order, edges, through


# ---------------------------------------------------------------------------
# the moves

@dataclass
class Step:
    before: TangleDiagram
    after: TangleDiagram
    event: MovieEvent
    region_before: Region | None = None
    region_after: Region | None = None


def _r1_add(d, ev):
    e = _edge(d, _one(ev.get("edge"), "edge"))
    c = _one(ev.get("new_crossing") or ev.get("new_crossings"), "new_crossing")
    new = ev.get("new_edges")
    new = [new] if isinstance(new, str) else list(new or [])
    if len(new) not in (1, 2):
        raise DiagramError("BadAddress", "R1 add needs new_edges=(loop,after)")
    loop = new[0]
    fin = e.id if e.is_free_loop else (new[1] if len(new) > 1 else None)
    if fin is None:
        raise DiagramError("BadAddress", "R1 add on an arc needs two new edges")
    _fresh(d, [x for x in new], [c])
    side = ev.get("side", "L")
    sign = ev.get("sign", "+")
    if side not in ("L", "R") or sign not in ("+", "-"):
        raise DiagramError("BadAddress", "side is L or R, sign is + or -")
    over_first = (sign == "+") == (side == "R")
    out2 = "E" if side == "L" else "W"
    back = "W" if side == "L" else "E"
    at = {"S": (e.id, "h"), "N": (loop, "t"), back: (loop, "h"), out2: (fin, "t")}
    under_in = back if over_first else "S"
    slots, ends = _place(c, at, under_in)
    crossings = dict(d.crossings)
    edges = dict(d.edges)
    crossings[c] = slots
    base = dict(weight=e.weight, part=e.part, component=e.component)
    edges[loop] = Edge(loop, ends[loop]["t"], ends[loop]["h"], **base)
    if e.is_free_loop:
        edges[e.id] = replace(e, tail=ends[e.id]["t"], head=ends[e.id]["h"])
        through = {e.id: [(f"{e.id}~h", f"{e.id}~t")]}
    else:
        _reroute(crossings, e.head, fin)
        edges[fin] = Edge(fin, ends[fin]["t"], e.head, left_shaded=e.left_shaded, **base)
        edges[e.id] = replace(e, head=ends[e.id]["h"])
        through = {e.id: [(f"{e.id}~h", f"{fin}~t")]}
    after = _finish(d, crossings, d.order + [c], edges)
    return Step(d, after, ev, Region((), frozenset(), through), Region((c,), frozenset([loop]), {}))


def _r1_remove(d, ev):
    c = _crossing(d, _one(ev.get("crossing") or ev.get("crossings"), "crossing"))
    loops = sorted({e for e in d.crossings[c]
                    if d.edges[e].tail[:2] == ("X", c) and d.edges[e].head[:2] == ("X", c)
                    and (d.edges[e].tail[2] - d.edges[e].head[2]) % 4 in (1, 3)})
    if ev.get("loop"):
        loops = [x for x in loops if x == ev.get("loop")]
    if not loops:
        raise DiagramError("BadAddress", f"crossing {c} is not a kink")
    loop = loops[-1]  # a one-crossing circle has two kinks: keep the older label
    crossings, order, edges, through = _remove_crossings(d, [c], {loop})
    after = _finish(d, crossings, order, edges)
    return Step(d, after, ev, Region((c,), frozenset([loop]), {}), Region((), frozenset(), through))


def _common_face(d, e, f, want=None):
    """Sides (of e, of f) facing a common region."""
    uf, _ = face_classes(d)
    combos = [("L", "L"), ("L", "R"), ("R", "L"), ("R", "R")]
    if want:
        combos = [(want[0], want[1])]

    def colour(edge, side):
        return edge.left_shaded if side == "L" else not edge.left_shaded

    for se, sf in combos:
        if e.is_free_loop or f.is_free_loop:
            if colour(e, se) == colour(f, sf):
                return se, sf
        elif uf.find((se, e.id)) == uf.find((sf, f.id)):
            return se, sf
    raise DiagramError("BadAddress", f"edges {e.id} and {f.id} share no region")


def _r2_add(d, ev):
    e = _edge(d, _one(ev.get("over"), "over"))
    f = _edge(d, _one(ev.get("under"), "under"))
    if e.id == f.id:
        raise DiagramError("BadAddress", "R2 needs two different edges")
    c1, c2 = _many(ev.get("new_crossings"), 2, "new_crossings")
    e_mid, e_post, f_mid, f_post = _many(ev.get("new_edges"), 4, "new_edges")
    _fresh(d, [e_mid, e_post, f_mid, f_post], [c1, c2])
    se, sf = _common_face(d, e, f, ev.get("face"))
    de = 1 if se == "R" else -1
    df = 1 if sf == "L" else -1
    # the over strand dips through the shared region and crosses f twice
    pos_e = ("P", "Q") if de > 0 else ("Q", "P")
    pos_f = ("P", "Q") if df > 0 else ("Q", "P")
    cid = {pos_e[0]: c1, pos_e[1]: c2}
    f_in, f_out = ("W", "E") if df > 0 else ("E", "W")
    e_post_id = e.id if e.is_free_loop else e_post
    f_post_id = f.id if f.is_free_loop else f_post
    at = {p: {} for p in ("P", "Q")}
    at[pos_e[0]].update({"N": (e.id, "h"), "S": (e_mid, "t")})
    at[pos_e[1]].update({"S": (e_mid, "h"), "N": (e_post_id, "t")})
    at[pos_f[0]].update({f_in: (f.id, "h"), f_out: (f_mid, "t")})
    at[pos_f[1]].update({f_in: (f_mid, "h"), f_out: (f_post_id, "t")})
    crossings = dict(d.crossings)
    ends = {}
    for p in ("P", "Q"):
        slots, en = _place(cid[p], at[p], f_in)
        crossings[cid[p]] = slots
        for k, v in en.items():
            ends.setdefault(k, {}).update(v)
    edges = dict(d.edges)
    through = {}
    for strand, mid, post_id in ((e, e_mid, e_post_id), (f, f_mid, f_post_id)):
        base = dict(weight=strand.weight, part=strand.part, component=strand.component)
        edges[mid] = Edge(mid, ends[mid]["t"], ends[mid]["h"], **base)
        if strand.is_free_loop:
            edges[strand.id] = replace(strand, tail=ends[strand.id]["t"], head=ends[strand.id]["h"])
        else:
            _reroute(crossings, strand.head, post_id)
            edges[post_id] = Edge(post_id, ends[post_id]["t"], strand.head,
                                  left_shaded=strand.left_shaded, **base)
            edges[strand.id] = replace(strand, head=ends[strand.id]["h"])
        through[strand.id] = [(f"{strand.id}~h", f"{post_id}~t")]
    after = _finish(d, crossings, d.order + [c1, c2], edges)
    return Step(d, after, ev, Region((), frozenset(), through),
                Region(tuple(c for c in after.order if c in (c1, c2)), frozenset([e_mid, f_mid]), {}))


def _bigon(d, c1, c2, want_over=None, want_under=None):
    """The two edges bounding a bigon between c1 and c2: (over, under).
    When several faces are bigons ``want_over``/``want_under`` pick one."""
    over = under = None
    face_sides = faces(d)
    uf, _ = face_classes(d)
    between = [e for e in d.edges.values() if not e.is_free_loop
               and {e.tail[:2], e.head[:2]} == {("X", c1), ("X", c2)}]
    for a in between:
        for b in between:
            if a.id >= b.id:
                continue
            for sa in ("L", "R"):
                for sb in ("L", "R"):
                    fa = uf.find((sa, a.id))
                    if fa == uf.find((sb, b.id)) and len(face_sides[fa]) == 2:
                        lv = [a.tail[2] % 2, a.head[2] % 2, b.tail[2] % 2, b.head[2] % 2]
                        if lv[0] == lv[1] and lv[2] == lv[3] and lv[0] != lv[2]:
                            over, under = (a, b) if lv[0] == 1 else (b, a)
                            if want_under in (None, under.id) and want_over in (None, over.id):
                                return over, under
    raise DiagramError("BadAddress", f"crossings {c1}, {c2} do not bound an R2 bigon")


def _r2_remove(d, ev):
    c1, c2 = (_crossing(d, c) for c in _many(ev.get("crossings"), 2, "crossings"))
    over, under = _bigon(d, c1, c2, ev.get("over"), ev.get("under"))
    S = [c for c in d.order if c in (c1, c2)]
    crossings, order, edges, through = _remove_crossings(d, S, {over.id, under.id})
    after = _finish(d, crossings, order, edges)
    return Step(d, after, ev, Region(tuple(S), frozenset([over.id, under.id]), {}),
                Region((), frozenset(), through))


def _r3(d, ev):
    cs = [_crossing(d, c) for c in _many(ev.get("crossings"), 3, "crossings")]
    S = set(cs)
    face_sides = faces(d)
    uf, _ = face_classes(d)
    mids = []
    for e in d.edges.values():
        if e.is_free_loop or e.tail[0] != "X" or e.head[0] != "X":
            continue
        if e.tail[1] in S and e.head[1] in S and e.tail[1] != e.head[1]:
            mids.append(e)
    tri = None
    for fa, sides in face_sides.items():
        if len(sides) != 3:
            continue
        es = [d.edges[s[1]] for s in sides if s[0] != "O"]
        if len(es) == 3 and all(x in mids for x in es):
            pairs = {frozenset([x.tail[1], x.head[1]]) for x in es}
            if len(pairs) == 3:
                tri = es
                break
    if tri is None:
        raise DiagramError("NotATriangle", f"crossings {cs} do not bound a triangular face")
    kinds = sorted((m.tail[2] % 2) + (m.head[2] % 2) for m in tri)
    if kinds != [0, 1, 2]:
        raise DiagramError("NotATriangle", "no strand passes over both of its crossings")
    new_in, new_out = {}, {}  # (crossing, level) -> edge
    edges = dict(d.edges)
    for m in tri:
        x, kx = m.tail[1], m.tail[2]
        y, ky = m.head[1], m.head[2]
        p = d.crossings[x][(kx + 2) % 4]  # comes into x on this strand
        q = d.crossings[y][(ky + 2) % 4]  # leaves y on this strand
        lx, ly = kx % 2, ky % 2
        new_in[(y, ly)] = p
        new_out[(y, ly)] = m.id
        new_in[(x, lx)] = m.id
        new_out[(x, lx)] = q
    crossings = dict(d.crossings)
    ends = {}
    for c in cs:
        slots = []
        for k in range(4):
            is_head = d.slot_is_head(c, k)
            e = (new_in if is_head else new_out)[(c, k % 2)]
            slots.append(e)
            ends.setdefault(e, {})["h" if is_head else "t"] = ("X", c, k)
        crossings[c] = tuple(slots)
    for e, en in ends.items():
        old = edges[e]
        edges[e] = replace(old, tail=en.get("t", old.tail), head=en.get("h", old.head),
                           left_shaded=None if e in {m.id for m in tri} else old.left_shaded)
    after = _finish(d, crossings, list(d.order), edges)
    order = tuple(c for c in d.order if c in S)
    internal = frozenset(m.id for m in tri)
    return Step(d, after, ev, Region(order, internal, {}), Region(order, internal, {}))


def _saddle(d, ev):
    a_id, b_id = _many(ev.get("edges"), 2, "edges")
    a, b = _edge(d, a_id), _edge(d, b_id)
    new = _many(ev.get("new_edges"), 2, "new_edges")
    _fresh(d, new)
    g1, g2 = new
    if a.weight != b.weight or a.part != b.part:
        raise DiagramError("WeightMismatch", f"saddle joins {a.component} (weight {a.weight}) and "
                                             f"{b.component} (weight {b.weight})")
    crossings = dict(d.crossings)
    edges = {k: v for k, v in d.edges.items() if k not in (a.id, b.id)}
    base = dict(weight=a.weight, part=a.part)
    names = {}
    if a.id == b.id:
        if a.is_free_loop:
            edges[g1] = Edge(g1, None, None, left_shaded=a.left_shaded, component=a.component, **base)
        else:
            edges[g1] = Edge(g1, a.tail, a.head, left_shaded=a.left_shaded, component=a.component, **base)
            _reroute(crossings, a.tail, g1)
            _reroute(crossings, a.head, g1)
        edges[g2] = Edge(g2, None, None, left_shaded=a.left_shaded, **base)
    else:
        if not a.is_free_loop and not b.is_free_loop:
            _common_face(d, a, b, ev.get("face"))
        if a.is_free_loop and b.is_free_loop:
            edges[g1] = Edge(g1, None, None, left_shaded=a.left_shaded, component=a.component, **base)
            names[g1] = a.component
        elif a.is_free_loop or b.is_free_loop:
            loop, arc = (a, b) if a.is_free_loop else (b, a)
            edges[g1] = Edge(g1, arc.tail, arc.head, component=arc.component, **base)
            _reroute(crossings, arc.tail, g1)
            _reroute(crossings, arc.head, g1)
        else:
            edges[g1] = Edge(g1, a.tail, b.head, component=a.component, **base)
            edges[g2] = Edge(g2, b.tail, a.head, component=b.component, **base)
            # tails before heads: an edge may start and end at the same slot pair
            for end, gid in ((a.tail, g1), (b.head, g1), (b.tail, g2), (a.head, g2)):
                _reroute(crossings, end, gid)
    after = _finish(d, crossings, list(d.order), edges, names)
    return Step(d, after, ev)


def _birth(d, ev):
    eid = _one(ev.get("edge") or ev.get("new_edge"), "edge")
    _fresh(d, [eid])
    w = d.ring.parse(ev.get("weight", "0")) if isinstance(ev.get("weight", "0"), str) else d.ring(ev.get("weight"))
    part = ev.get("part")
    part = int(part) if part is not None else None
    name = ev.get("component")
    if name is None:
        n = 1
        while f"k{n}" in d.components:
            n += 1
        name = f"k{n}"
    elif name in d.components:
        raise DiagramError("LabelInUse", f"component {name} already exists")
    inner = d.convention != "outer-shaded"
    near = ev.get("near")
    if near is not None:
        ne = _edge(d, near)
        side = ev.get("side", "L")
        outer_colour = ne.left_shaded if side == "L" else not ne.left_shaded
        inner = not outer_colour
    edges = dict(d.edges)
    edges[eid] = Edge(eid, None, None, w, part, inner, None, name)
    comps = dict(d.components)
    comps[name] = [eid]
    return Step(d, d.copy(edges=edges, components=comps), ev)


def _death(d, ev):
    eid = _one(ev.get("circle_edge") or ev.get("edge"), "circle_edge")
    e = _edge(d, eid)
    if not e.is_free_loop:
        raise DiagramError("BadAddress", f"{eid} is not a crossingless circle")
    edges = {k: v for k, v in d.edges.items() if k != eid}
    comps = {k: v for k, v in d.components.items() if v != [eid]}
    return Step(d, d.copy(edges=edges, components=comps), ev)


def _dot(d, ev):
    _edge(d, _one(ev.get("edge"), "edge"))
    return Step(d, d.copy(), ev)


def step(d: TangleDiagram, ev: MovieEvent) -> Step:
    if ev.kind == "R1":
        return _r1_add(d, ev) if ev.direction == "add" else _r1_remove(d, ev)
    if ev.kind == "R2":
        return _r2_add(d, ev) if ev.direction == "add" else _r2_remove(d, ev)
    if ev.kind == "R3":
        return _r3(d, ev)
    if ev.kind == "saddle":
        return _saddle(d, ev)
    if ev.kind == "birth":
        return _birth(d, ev)
    if ev.kind == "death":
        return _death(d, ev)
    if ev.kind == "dot":
        return _dot(d, ev)
    if ev.kind == "plane-isotopy":
        return Step(d, d.copy(), ev)
    raise DiagramError("ParseError", f"unknown event {ev.kind}")


def apply_event(d: TangleDiagram, ev: MovieEvent) -> TangleDiagram:
    return step(d, ev).after


# ---------------------------------------------------------------------------
# local Reidemeister maps

def _match_minimal(small, small2):
    """Isomorphism between two minimal d+ complexes with the same objects:
    identity cobordisms times scalars propagated along the differential."""
    ring, alg = small.ring, small.alg

    def key(g):
        return (g.obj.pairing(), g.r, g.q)

    by2 = {}
    for j, g in enumerate(small2.gens):
        by2.setdefault(key(g), []).append(j)
    partner = {}
    for i, g in enumerate(small.gens):
        cand = by2.get(key(g), [])
        if len(cand) != 1:
            raise IntegrityError("minimal complexes do not match one-to-one")
        partner[i] = cand[0]
    if len(set(partner.values())) != len(small2.gens):
        raise IntegrityError("minimal complexes have different sizes")
    to2 = {i: cobcat.identity_between(small.gens[i].obj, small2.gens[j].obj, ring) for i, j in partner.items()}
    fro2 = {j: cobcat.identity_between(small2.gens[j].obj, small.gens[i].obj, ring) for i, j in partner.items()}
    links = {}
    inv = {j: i for i, j in partner.items()}
    pairs = {(i, k) for i, k, _ in mat_entries(small.dplus)}
    pairs |= {(inv[j], inv[l]) for j, l, _ in mat_entries(small2.dplus)}
    for i, k in sorted(pairs):
        a = mat_get(small.dplus, i, k)
        b = mat_get(small2.dplus, partner[i], partner[k])
        ta = {} if a is None else cobcat.compose(to2[k], cobcat.compose(a, fro2[partner[i]])).canonical()
        tb = {} if b is None else b.canonical()
        if not ta and not tb:
            continue
        if set(ta) != set(tb):
            raise IntegrityError("minimal differentials differ in shape")
        cfg = min(ta, key=repr)
        if not ring.is_unit(ta[cfg]):
            raise IntegrityError("non-unit ratio between minimal differentials")
        lam = tb[cfg] * ring.inv(ta[cfg])
        if any(tb[c] != lam * ta[c] for c in ta):
            raise IntegrityError("minimal differentials are not proportional")
        links.setdefault(i, []).append((k, lam, False))
        links.setdefault(k, []).append((i, lam, True))
    psi = {}
    for start in range(len(small.gens)):
        if start in psi:
            continue
        psi[start] = ring.one
        dq = deque([start])
        while dq:
            i = dq.popleft()
            for k, lam, backwards in links.get(i, ()):
                # psi_k d_ik = d'_ik psi_i with d' = lam d
                want = psi[i] * ring.inv(lam) if backwards else lam * psi[i]
                if k in psi:
                    if psi[k] != want:
                        raise IntegrityError("no consistent matching of minimal complexes")
                else:
                    psi[k] = want
                    dq.append(k)
    blocks = {i: {partner[i]: to2[i].scale(psi[i])} for i in partner}
    m = ChainMap(small, small2, blocks, label="match")
    if not verify_chain_map(m, plus_only=True)["ok"]:
        raise IntegrityError("matching of minimal complexes is not a chain map")
    return m


def _solve_correction(f0: ChainMap):
    """Add terms of homological shift <= -2 so that the map commutes with
    the total differential."""
    from . import linalg
    from .tqft import _hom_basis, _vectorize

    A, B = f0.source, f0.target
    alg, ring = A.alg, A.ring
    dA, dB = A.d(), B.d()
    err = mat_clean(mat_sum([mat_compose(dB, f0.blocks, alg), mat_compose(f0.blocks, dA, alg)], alg, [1, -1]), alg)
    if not err:
        return f0
    nb = len(A.boundary)
    unknowns = []
    for i, x in enumerate(A.gens):
        for j, y in enumerate(B.gens):
            s = y.r - x.r
            if s > -2 or s % 2:
                continue
            for cfg in _hom_basis(x, y, 0, "formal", nb):
                unknowns.append((i, j, cfg))
    cols = []
    for i, j, cfg in unknowns:
        E = {i: {j: cobcat.CobMorphism(A.gens[i].obj, B.gens[j].obj, {cfg: ring.one}, ring)}}
        L = mat_sum([mat_compose(E, dA, alg), mat_compose(dB, E, alg)], alg, [1, -1])
        cols.append(_vectorize(L, alg, "formal"))
    rhs_v = _vectorize(err, alg, "formal")
    keys = sorted(set(rhs_v).union(*[set(c) for c in cols]) if cols else set(rhs_v), key=repr)
    pos = {k: n for n, k in enumerate(keys)}
    rows = [dict() for _ in keys]
    for n, col in enumerate(cols):
        for k, v in col.items():
            rows[pos[k]][n] = v
    rhs = [ring.zero] * len(keys)
    for k, v in rhs_v.items():
        rhs[pos[k]] = v
    sol = linalg.solve(rows, rhs, ring)
    if sol is None:
        raise IntegrityError("no filtered correction makes the Reidemeister map a chain map")
    blocks = {i: dict(r) for i, r in f0.blocks.items()}
    for n, v in sorted(sol.items()):
        if v:
            i, j, cfg = unknowns[n]
            mat_add_into(blocks, i, j, cobcat.CobMorphism(A.gens[i].obj, B.gens[j].obj, {cfg: v}, ring), alg)
    return ChainMap(A, B, mat_clean(blocks, alg), label=f0.label)


@dataclass
class LocalMap:
    f: ChainMap  # full map, f0 + f1
    f0: ChainMap  # Khovanov-level part
    small: tuple  # (minimal source, minimal target)


def local_reidemeister(T: TangleDiagram, T2: TangleDiagram) -> LocalMap:
    """A filtered degree-0 homotopy equivalence BS(T) -> BS(T2) for two
    tangles related by a Reidemeister move."""
    A, B = bs_complex(T), bs_complex(T2)
    small, rho, _ = gaussian_simplify(A.plus_only())
    small2, _, iota2 = gaussian_simplify(B.plus_only())
    psi = _match_minimal(small, small2)
    alg = A.alg
    blocks = mat_compose(iota2.blocks, mat_compose(psi.blocks, rho.blocks, alg), alg)
    f0 = ChainMap(A, B, mat_clean(blocks, alg), label="reidemeister")
    if not verify_chain_map(f0, plus_only=True)["ok"]:
        raise IntegrityError("Khovanov part of the Reidemeister map is not a chain map")
    f = _solve_correction(f0)
    if not verify_chain_map(f)["ok"]:
        raise IntegrityError("Reidemeister map is not a chain map")
    return LocalMap(f, f0, (small, small2))


# ---------------------------------------------------------------------------
# extension by the identity

def _m(order, signs, v, i):
    m = 0
    for j in range(i):
        pos = signs[order[j]] > 0
        if (v[j] == 1 and pos) or (v[j] == 0 and not pos):
            m += 1
    return m


def order_signs(d: TangleDiagram, new_order):
    """phi(v) with (-1)^phi id: BS(d) -> BS(d reordered) a chain isomorphism.
    Returned as ``v -> +-1`` with v in d's crossing order."""
    signs = {c: d.crossing_sign(c) for c in d.order}
    perm = [d.order.index(c) for c in new_order]
    phi = {}
    for v in vertices(d.n):
        ones = [i for i in range(d.n) if v[i]]
        if not ones:
            phi[v] = 0
            continue
        i = ones[-1]
        u = v[:i] + (0,) + v[i + 1:]
        u2 = tuple(u[p] for p in perm)
        i2 = new_order.index(d.order[i])
        phi[v] = (phi[u] + _m(d.order, signs, u, i) + _m(new_order, signs, u2, i2)) % 2
    return {v: -1 if p else 1 for v, p in phi.items()}


def extend(before: TangleDiagram, after: TangleDiagram, rb: Region, ra: Region, f_loc: ChainMap,
           A=None, B=None) -> ChainMap:
    """Extend a local map between the region pieces of ``before`` and
    ``after`` by the identity outside."""
    ring = before.ring
    A = A or bs_complex(before)
    B = B or bs_complex(after)
    _, out_b = split_region(before, rb)
    _, out_a = split_region(after, ra)
    O = [c for c in before.order if c not in rb.crossings]
    if O != [c for c in after.order if c not in ra.crossings]:
        raise IntegrityError("outside crossings differ")
    sa = order_signs(before, list(rb.crossings) + O)
    sb = order_signs(after, list(ra.crossings) + O)
    pos_b = {c: k for k, c in enumerate(before.order)}
    pos_a = {c: k for k, c in enumerate(after.order)}
    idO = {}
    blocks = {}
    alg = A.alg
    for i, j, cob in mat_entries(f_loc.blocks):
        x = f_loc.source.gens[i].key
        y = f_loc.target.gens[j].key
        for vO in vertices(len(O)):
            if vO not in idO:
                idO[vO] = cobcat.identity_between(out_b.resolve(vO), out_a.resolve(vO), ring)
            v = [0] * before.n
            for c, bit in zip(rb.crossings, x):
                v[pos_b[c]] = bit
            for c, bit in zip(O, vO):
                v[pos_b[c]] = bit
            w = [0] * after.n
            for c, bit in zip(ra.crossings, y):
                w[pos_a[c]] = bit
            for c, bit in zip(O, vO):
                w[pos_a[c]] = bit
            v, w = tuple(v), tuple(w)
            ent = cobcat.hplug([cob, idO[vO]], ring)
            src, tgt = A.gens[A.index[v]].obj, B.gens[B.index[w]].obj
            if ent.source != src or ent.target != tgt:
                raise IntegrityError("glued local map does not land on the ambient resolutions")
            s = sa[v] * sb[w]
            mat_add_into(blocks, A.index[v], B.index[w], ent if s > 0 else -ent, alg)
    return ChainMap(A, B, blocks, label=f_loc.label)


# ---------------------------------------------------------------------------
# maps of events

def reidemeister_map(before: TangleDiagram, after: TangleDiagram | None, ev: MovieEvent,
                     with_parts=False):
    st = step(before, ev)
    if after is not None and sorted(after.crossings) != sorted(st.after.crossings):
        raise DiagramError("BadAddress", "frames do not match the move")
    T, _ = split_region(st.before, st.region_before)
    T2, _ = split_region(st.after, st.region_after)
    loc = local_reidemeister(T, T2)
    f = extend(st.before, st.after, st.region_before, st.region_after, loc.f)
    if with_parts:
        f0 = extend(st.before, st.after, st.region_before, st.region_after, loc.f0)
        return f, f0, loc
    return f


def elementary_map(before: TangleDiagram, after: TangleDiagram | None, ev: MovieEvent) -> ChainMap:
    """Birth, death, saddle and dot maps, vertex by vertex on the cube."""
    st = step(before, ev)
    after = st.after
    A, B = bs_complex(before), bs_complex(after)
    ring = before.ring
    if before.order != after.order:
        raise IntegrityError("elementary move changed the crossings")
    blocks = {}
    for i, g in enumerate(A.gens):
        j = B.index[g.key]
        S, T = g.obj, B.gens[j].obj
        if ev.kind == "dot":
            ent = cobcat.dot_at(S, _one(ev.get("edge"), "edge"), ring)
        elif ev.kind == "plane-isotopy":
            ent = cobcat.identity(S, ring)
        else:
            ent = cobcat.standard(S, T, ring)
            if ev.kind == "saddle" and len(S.comps - T.comps) + len(T.comps - S.comps) != 3:
                raise IntegrityError("saddle did not change one or two components")
        blocks[i] = {j: ent}
    return ChainMap(A, B, blocks, label=ev.kind)


def event_map(before: TangleDiagram, ev: MovieEvent) -> ChainMap:
    if ev.kind in ("R1", "R2", "R3"):
        return reidemeister_map(before, None, ev)
    return elementary_map(before, None, ev)


def crossing_change(d: TangleDiagram, c):
    """``(d', CC)`` with d' the diagram with crossing c switched and CC the
    identity cobordisms, weighted by s(c)(w_over - w_under) on the 1-side."""
    _crossing(d, c)
    d2 = change_crossing(d, c)
    A, B = bs_complex(d), bs_complex(d2)
    ring = d.ring
    i = d.order.index(c)
    coef = ring(d.shading_sign(c)) * (ring(d.w_over(c)) - ring(d.w_under(c)))
    blocks = {}
    for a, g in enumerate(A.gens):
        v = g.key
        w = v[:i] + (1 - v[i],) + v[i + 1:]
        b = B.index[w]
        if B.gens[b].obj != g.obj:
            raise IntegrityError("crossing change moved a resolution")
        k = ring.one if v[i] == 0 else coef
        if k:
            blocks[a] = {b: cobcat.identity(g.obj, ring, k)}
    return d2, ChainMap(A, B, blocks, label=f"CC({c})")


def movie_map(m: Movie) -> ChainMap:
    """Composite of the event maps of a movie."""
    d = m.initial
    total = None
    for n, ev in enumerate(m.events):
        try:
            f = event_map(d, ev)
        except DiagramError as exc:
            raise DiagramError(exc.code, f"event {n + 1} ({ev}): {exc}") from exc
        total = f if total is None else total.then(f)
        d = step(d, ev).after
    if total is None:
        return identity_map(bs_complex(d))
    return total


# ---------------------------------------------------------------------------
# vertical separation and horizontal splitting

def _part_of(d, c):
    return d.edges[d.crossings[c][0]].part, d.edges[d.crossings[c][1]].part


def to_separate(d: TangleDiagram):
    """Crossings where a lower part passes over a higher one."""
    out = []
    for c in d.order:
        under, over = _part_of(d, c)
        if under is not None and over is not None and over < under:
            out.append(c)
    return out


def change_crossings(d: TangleDiagram, cs):
    """Switch the crossings ``cs`` one at a time; returns the new diagram and
    the composite crossing-change map."""
    total = None
    for c in cs:
        d, f = crossing_change(d, c)
        total = f if total is None else total.then(f)
    if total is None:
        total = identity_map(bs_complex(d))
    return d, total


def reorder_map(d: TangleDiagram, new_order) -> ChainMap:
    """The sign isomorphism BS(d) -> BS(d with crossings listed in new_order)."""
    from .diagram import reorder

    d2 = reorder(d, new_order)
    A, B = bs_complex(d), bs_complex(d2)
    signs = order_signs(d, list(new_order))
    perm = [d.order.index(c) for c in new_order]
    blocks = {}
    for i, g in enumerate(A.gens):
        j = B.index[tuple(g.key[p] for p in perm)]
        blocks[i] = {j: cobcat.identity(g.obj, d.ring, signs[g.key])}
    return ChainMap(A, B, blocks, label="reorder")


def _to_frame(d: TangleDiagram, frame: TangleDiagram):
    """Crossing changes from d to the separated frame, reordered to match."""
    d2, cc = change_crossings(d, to_separate(d))
    if d2.order != frame.order:
        cc = cc.then(reorder_map(d2, frame.order))
    return cc


def _same_diagram(a: TangleDiagram, b: TangleDiagram) -> bool:
    if a.crossings != b.crossings or sorted(a.order) != sorted(b.order) or a.edges.keys() != b.edges.keys():
        return False
    return all((x.tail, x.head, x.weight, x.part) == (y.tail, y.head, y.weight, y.part)
               for x, y in ((a.edges[k], b.edges[k]) for k in a.edges))


def _sep_candidates(ev: MovieEvent):
    yield ev
    if ev.kind == "R2" and ev.direction == "add":
        args = dict(ev.args)
        args["over"], args["under"] = ev.get("under"), ev.get("over")
        em, ep, fm, fp = _many(ev.get("new_edges"), 4, "new_edges")
        args["new_edges"] = [fm, fp, em, ep]
        if ev.get("face"):
            w = ev.get("face")
            args["face"] = w[1] + w[0]
        yield MovieEvent(ev.kind, ev.direction, args, ev.line)
        c1, c2 = _many(ev.get("new_crossings"), 2, "new_crossings")
        args = dict(args, new_crossings=[c2, c1])
        yield MovieEvent(ev.kind, ev.direction, args, ev.line)


def _check_weights(frames):
    from .coeff import is_invertible

    ws = {}
    for d in frames:
        for e in d.edges.values():
            ws.setdefault(e.part, set()).add(e.weight)
    parts = sorted(p for p in ws if p is not None)
    ring = frames[0].ring
    for i, p in enumerate(parts):
        for q in parts[i + 1:]:
            for a in ws[p]:
                for b in ws[q]:
                    if not is_invertible(ring(a) - ring(b), ring):
                        raise DiagramError("NonInvertibleWeight",
                                           f"parts {p} and {q} have weights {a} and {b}; "
                                           f"their difference is not a unit in {ring.spec}")


@dataclass
class Separated:
    movie: Movie
    cc_initial: ChainMap
    cc_final: ChainMap
    changed: list


def sep_movie(m: Movie) -> Separated:
    """Rewrite every frame so higher parts always cross over lower parts.

    Returns the separated movie and the crossing-change isomorphisms at both
    ends.  Each separated event is checked against the directly separated
    frame."""
    frames = m.frames()
    if any(e.part is None for d in frames for e in d.edges.values()):
        raise DiagramError("NoPartition", "sep needs a part label on every component")
    _check_weights(frames)
    tilde = [_separate_plain(d) for d in frames]
    events = []
    for n, ev in enumerate(m.events):
        for cand in _sep_candidates(ev):
            try:
                nxt = apply_event(tilde[n], cand)
            except DiagramError:
                continue
            if _same_diagram(nxt, tilde[n + 1]):
                events.append(cand)
                break
        else:
            raise IntegrityError(f"event {n + 1} ({ev}) has no separated counterpart")
    sep = Movie(tilde[0], events, m.partition)
    sframes = sep.frames()
    cc0 = _to_frame(frames[0], sframes[0])
    cc1 = _to_frame(frames[-1], sframes[-1])
    return Separated(sep, cc0, cc1, [to_separate(d) for d in frames])


def _separate_plain(d):
    for c in to_separate(d):
        d = change_crossing(d, c)
    return d


def sep_square(m: Movie, unit="unknown"):
    """Compare CC o BS(M) with BS(sep M) o CC up to homotopy and a unit.
    Returns the solver result (None when the square does not commute)."""
    from .tqft import homotopy_solve

    s = sep_movie(m)
    top = movie_map(m).then(s.cc_final)
    bottom = s.cc_initial.then(movie_map(s.movie))
    return homotopy_solve(top, bottom, unit=unit)


def _erase(d: TangleDiagram, keep):
    """Keep only the parts in ``keep``; strands of other parts are deleted
    along with every crossing they take part in.  Returns the erased diagram
    and a map from surviving edges to the edge now carrying them."""
    kept = {c for c in d.order if all(d.edges[e].part in keep for e in d.crossings[c])}
    alive = lambda end: end is None or end[0] == "B" or end[1] in kept  # noqa: E731
    crossings = {c: d.crossings[c] for c in kept}
    edges, alias = {}, {}
    mine = sorted(e.id for e in d.edges.values() if e.part in keep)
    for eid in mine:
        e = d.edges[eid]
        if e.is_free_loop:
            edges[eid] = e
            alias[eid] = eid
    for eid in mine:
        e = d.edges[eid]
        if e.is_free_loop or not alive(e.tail):
            continue
        chain, cur = [eid], e
        while not alive(cur.head):
            c, k = cur.head[1], cur.head[2]
            cur = d.edges[d.crossings[c][(k + 2) % 4]]
            chain.append(cur.id)
        edges[eid] = replace(e, head=cur.head, left_shaded=None)
        _reroute(crossings, cur.head, eid)
        for x in chain:
            alias[x] = eid
    for eid in mine:
        if eid in alias:
            continue
        chain, cur = [eid], d.edges[eid]
        while True:
            c, k = cur.head[1], cur.head[2]
            cur = d.edges[d.crossings[c][(k + 2) % 4]]
            if cur.id == eid:
                break
            chain.append(cur.id)
        name = min(chain)
        edges[name] = replace(d.edges[name], tail=None, head=None, left_shaded=None)
        for x in chain:
            alias[x] = name
    comps = {k: [e for e in v if e in edges] for k, v in d.components.items()}
    out = d.copy(crossings=crossings, order=[c for c in d.order if c in kept], edges=edges,
                 components={k: v for k, v in comps.items() if v})
    return _finish(out, crossings, out.order, edges), alias


def _touches(d, ev):
    """The set of parts an event involves."""
    if ev.kind == "plane-isotopy":
        return set()
    if ev.kind == "birth":
        return {int(ev.get("part")) if ev.get("part") is not None else None}
    if ev.kind in ("R2", "R3") and (ev.direction == "remove" or ev.kind == "R3"):
        cs = _many(ev.get("crossings"), 3 if ev.kind == "R3" else 2, "crossings")
        return {p for c in cs for p in _part_of(d, c)}
    keys = {"R1": ("edge", "crossing"), "R2": ("over", "under"), "saddle": ("edges",),
            "death": ("circle_edge", "edge"), "dot": ("edge",)}[ev.kind]
    out = set()
    for k in keys:
        v = ev.get(k)
        if v is None:
            continue
        for x in ([v] if isinstance(v, str) else v):
            if x in d.edges:
                out.add(d.edges[x].part)
            elif x in d.crossings:
                out |= set(_part_of(d, x))
    return out


_EDGE_ARGS = ("edge", "over", "under", "edges", "circle_edge", "near", "loop")


def _translate(ev, alias, cur, fresh_map):
    args = {}
    for k, v in ev.args.items():
        if k in _EDGE_ARGS and not (k == "edge" and ev.kind == "birth"):
            args[k] = alias[v] if isinstance(v, str) else [alias[x] for x in v]
        elif k in ("new_edges", "new_edge") or (k == "edge" and ev.kind == "birth"):
            vs = [v] if isinstance(v, str) else list(v)
            out = []
            for x in vs:
                y = x
                while y in cur.edges or y in out:
                    y += "'"
                fresh_map[x] = y
                out.append(y)
            args[k] = out[0] if isinstance(v, str) else out
        else:
            args[k] = v
    if ev.kind == "birth":
        x = ev.get("edge") or ev.get("new_edge")
        y = x
        while y in cur.edges:
            y += "'"
        fresh_map[x] = y
        args["edge" if ev.get("edge") else "new_edge"] = y
    return MovieEvent(ev.kind, ev.direction, args, ev.line)


def _match(canon, nxt, canon_alias, origin):
    """Map each edge of ``canon`` to the edge of ``nxt`` with the same ends;
    free loops are matched through ``origin`` (label of T_i -> nxt edge)."""
    by_ends = {(e.tail, e.head): e.id for e in nxt.edges.values() if not e.is_free_loop}
    out = {}
    for e in canon.edges.values():
        if e.is_free_loop:
            cands = {origin[x] for x, y in canon_alias.items() if y == e.id and x in origin}
            cands = {c for c in cands if c in nxt.edges and nxt.edges[c].is_free_loop}
            if len(cands) != 1:
                raise IntegrityError(f"cannot follow the circle {e.id} through the split movie")
            out[e.id] = cands.pop()
        else:
            if (e.tail, e.head) not in by_ends:
                raise IntegrityError(f"split frame lost the strand {e.id}")
            out[e.id] = by_ends[(e.tail, e.head)]
    if sorted(out.values()) != sorted(nxt.edges):
        raise IntegrityError("split frame does not match the erased frame")
    return out


def split_movie(m: Movie, with_alias=False):
    """The movie of each part run in its own disk: events between different
    parts become plane isotopies; the others are replayed on the parts.

    With ``with_alias`` also returns the map from edges of the final frame of
    ``m`` to the edges of the final split frame carrying them."""
    frames = m.frames()
    for d in (frames[0], frames[-1]):
        bad = [c for c in d.order if len(set(_part_of(d, c))) > 1]
        if bad:
            raise DiagramError("NotSplit", f"crossings {bad} join different parts")
    if any(e.part is None for d in frames for e in d.edges.values()):
        raise DiagramError("NoPartition", "split needs a part label on every component")
    parts = sorted({e.part for d in frames for e in d.edges.values()})
    if frames[0].boundary:
        raise DiagramError("NotALink", "split movies are defined for links")
    if len(parts) <= 1:
        out = Movie(m.initial, list(m.events), m.partition)
        return (out, {e: e for e in frames[-1].edges}) if with_alias else out

    def placed(d):
        out = None
        alias = {}
        for p in parts:
            piece, al = _erase(d, {p})
            alias.update(al)
            out = piece if out is None else _union(out, piece)
        return out, alias

    cur, alias = placed(frames[0])
    start = cur
    events = []
    for n, ev in enumerate(m.events):
        touched = _touches(frames[n], ev)
        canon, canon_alias = placed(frames[n + 1])
        if len(touched) == 1:
            fresh = {}
            tev = _translate(ev, alias, cur, fresh)
            nxt = apply_event(cur, tev)
            origin = {}
            for x in frames[n + 1].edges:
                if x in fresh:
                    origin[x] = fresh[x]
                elif x in alias and alias[x] in nxt.edges:
                    origin[x] = alias[x]
        else:
            tev = MovieEvent("plane-isotopy", None, {}, ev.line)
            nxt = cur
            origin = {x: alias[x] for x in frames[n + 1].edges if x in alias}
        m2c = _match(canon, nxt, canon_alias, origin)
        alias = {x: m2c[y] for x, y in canon_alias.items()}
        events.append(tev)
        cur = nxt
    out = Movie(start, events, m.partition)
    return (out, alias) if with_alias else out


def relabel_map(a: TangleDiagram, b: TangleDiagram, alias, cmap=None) -> ChainMap:
    """Identity cobordisms BS(a) -> BS(b) for two diagrams that agree after
    renaming edges by ``alias`` (a edge -> b edge) and crossings by ``cmap``."""
    if cmap and any(k != v for k, v in cmap.items()):
        a2 = _rename_crossings(a, cmap)
        A, A2 = bs_complex(a), bs_complex(a2)
        same = ChainMap(A, A2, {i: {i: cobcat.identity(g.obj, a.ring)} for i, g in enumerate(A.gens)})
        return same.then(relabel_map(a2, b, alias))
    if sorted(a.order) != sorted(b.order):
        raise IntegrityError("relabelling needs the same crossings")
    if a.order != b.order:
        return reorder_map(a, b.order).then(relabel_map(a.copy(order=list(b.order)), b, alias))
    A, B = bs_complex(a), bs_complex(b)
    labels = {a.edges[x].label: b.edges[y].label for x, y in alias.items() if x in a.edges}
    blocks = {}
    for i, g in enumerate(A.gens):
        j = B.index[g.key]
        T = B.gens[j].obj
        groups = [([c], [T.comp_of_atom(labels[next(iter(c.atoms))])], 0) for c in g.obj.comps]
        blocks[i] = {j: cobcat.from_parts(g.obj, T, groups, a.ring)}
    return ChainMap(A, B, blocks, label="relabel")


def _rename_crossings(d: TangleDiagram, cmap):
    def mv(end):
        if end is not None and end[0] == "X":
            return ("X", cmap.get(end[1], end[1]), end[2])
        return end

    crossings = {cmap.get(c, c): s for c, s in d.crossings.items()}
    edges = {k: replace(e, tail=mv(e.tail), head=mv(e.head)) for k, e in d.edges.items()}
    return d.copy(crossings=crossings, order=[cmap.get(c, c) for c in d.order], edges=edges)


def isomorphism(a: TangleDiagram, b: TangleDiagram):
    """A relabelling (edge map, crossing map) carrying ``a`` onto ``b``
    (same rotation system, weights, parts and shading), or None.  Free loops
    are matched in sorted order within each class; their shading tells
    inside from outside only up to that class."""
    from itertools import permutations

    if len(a.crossings) != len(b.crossings) or len(a.edges) != len(b.edges):
        return None

    def key(e):
        return (str(e.weight), e.part, e.left_shaded)

    loops_a = sorted((e for e in a.edges.values() if e.is_free_loop), key=lambda e: (key(e), e.id))
    loops_b = sorted((e for e in b.edges.values() if e.is_free_loop), key=lambda e: (key(e), e.id))
    if [key(e) for e in loops_a] != [key(e) for e in loops_b]:
        return None
    cs_b = list(b.crossings)
    for perm in permutations(cs_b):
        cmap = dict(zip(a.crossings, perm))
        emap = {}
        ok = True
        for e in a.edges.values():
            if e.is_free_loop:
                continue
            if e.tail[0] == "X":
                f = b.crossings[cmap[e.tail[1]]][e.tail[2]]
            else:
                f = next((x.id for x in b.edges.values() if x.tail == e.tail), None)
            if f is None or f in emap.values():
                ok = False
                break
            fe = b.edges[f]
            head = e.head if e.head[0] == "B" else ("X", cmap[e.head[1]], e.head[2])
            tail = e.tail if e.tail[0] == "B" else ("X", cmap[e.tail[1]], e.tail[2])
            if (fe.tail, fe.head) != (tail, head) or key(fe) != key(e):
                ok = False
                break
            emap[e.id] = f
        if ok:
            for x, y in zip(loops_a, loops_b):
                emap[x.id] = y.id
            return emap, cmap
    return None


def _union(a: TangleDiagram, b: TangleDiagram) -> TangleDiagram:
    from .diagram import disjoint_union

    if set(a.edges) & set(b.edges) or set(a.crossings) & set(b.crossings):
        raise IntegrityError("parts share labels")
    u = disjoint_union(a, b, prefix=("", ""))
    comps = dict(a.components)
    comps.update(b.components)
    return u.copy(components=comps)
