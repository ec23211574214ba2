"""Reidemeister-type moves on bonded diagrams, applied as local slot rewrites.

Every move is addressed by a :class:`MoveSite`.  Targets are node/slot pairs in the
input diagram; :func:`find_sites` lists every site where a move applies, and
:func:`random_moves` drives seeded random walks through the move graph.

Geometry conventions (slots counterclockwise):

* ``I+``/``I-``: a curl inserted on a chain edge; ``variant`` picks the side.
* ``II``: the edge at dart ``(n1, s1)`` is pushed across the edge at dart ``(n2, s2)``
  of the same face; ``variant`` 0 pushes it over, 1 under.
* ``III``: the triangle face left of dart ``(x, s)``; the first side (in face order
  starting from the dart) whose strand is over or under at both its crossings is moved.
* ``IV``/``IV'``: the strand crossing the edge at vertex slot ``(v, k)`` slides over
  (``IV``) or under (``IV'``) the vertex onto the two other edges.
* ``RV``: the rigid vertex flip of the bond at vertex ``v``; a crossing appears between
  the chain edges at both bond ends.  ``variant`` picks the flip direction.
* ``V``: a single-vertex twist, valid only for topological vertices.
* ``bond_slide``: a strand crossing the bond next to ``v`` is slid off through ``v``
  (``IV``/``IV'``) and the bond is then flipped (``RV``).

``inverse=True`` undoes the corresponding pattern where it is present.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ._graph import Graph, RewriteError
from .diagram import BOND, CHAIN, BondedDiagram, crossing_sign, faces

__all__ = [
    "MoveSite",
    "MoveError",
    "MOVES",
    "ISOTOPY_MOVES",
    "apply_move",
    "find_sites",
    "random_moves",
]

MOVES = ("I+", "I-", "II", "III", "IV", "IV'", "V", "RV", "bond_slide")
ISOTOPY_MOVES = ("II", "III", "IV", "IV'", "RV", "bond_slide")

_KINKS = {(1, 0): (0, 3), (1, 1): (3, 0), (-1, 0): (0, 1), (-1, 1): (1, 0)}


class MoveError(RewriteError):
    """The local pattern at a site does not match the requested move."""


@dataclass(frozen=True, order=True)
class MoveSite:
    move: str
    target: tuple[int, ...]
    variant: int = 0
    inverse: bool = False

    def __str__(self) -> str:
        inv = "^-1" if self.inverse else ""
        return f"{self.move}{inv}@{','.join(map(str, self.target))}/{self.variant}"


# ---------------------------------------------------------------------------
# move I


def _kink(g: Graph, edge: int, sign: int, variant: int) -> None:
    if g.kind(edge) != CHAIN:
        raise MoveError("move I is only applied to chain edges")
    p, q = _KINKS[(sign, variant % 2)]
    x = g.add_node(4, under=0)
    info = g.edges[edge]
    if info["tail"] is None:
        g.insert_on_loop(edge, x, in_slot=p, out_slot=q + 2)
    else:
        g.insert_on(*info["tail"], x, near=p, far=q + 2)
    g.add_edge(CHAIN, 0, tail=(x, p + 2), head=(x, q))


def _kink_loop(g: Graph, x: int) -> tuple[int, int] | None:
    if x not in g.nodes or not g.is_crossing(x):
        return None
    for s in range(4):
        e, is_head = g.end_at(x, s)
        if is_head:
            continue
        tail, head = g.edges[e]["tail"], g.edges[e]["head"]
        if head[0] == x and (head[1] - tail[1]) % 4 in (1, 3):
            return tail[1], head[1]
    return None


def _unkink(g: Graph, x: int, sign: int) -> None:
    loop = _kink_loop(g, x)
    if loop is None:
        raise MoveError(f"no curl at crossing {x}")
    if _sign(g, x) != sign:
        raise MoveError(f"curl at crossing {x} has the wrong sign")
    a, b = loop
    g.join(x, a + 2, a)
    g.join(x, b, b + 2)
    g.remove_node(x)


def _sign(g: Graph, x: int) -> int:
    p = g.under[x]
    start = p if g.end_at(x, p)[1] else p + 2
    return 1 if not g.end_at(x, start + 1)[1] else -1


# ---------------------------------------------------------------------------
# faces on the mutable graph


def _face(g: Graph, node: int, slot: int, limit: int = 4) -> list[tuple[int, int]] | None:
    out = [(node, slot)]
    while True:
        n2, s2 = g.other_end(*out[-1])
        nxt = (n2, (s2 - 1) % g.deg(n2))
        if nxt == out[0]:
            return out
        if len(out) >= limit:
            return None
        out.append(nxt)


# ---------------------------------------------------------------------------
# move II


def _push(g: Graph, dart_e: tuple[int, int], dart_f: tuple[int, int], e_over: bool) -> None:
    e, f = g.edge_at(*dart_e), g.edge_at(*dart_f)
    if e == f:
        raise MoveError("move II needs two distinct edges")
    face = _face(g, *dart_e, limit=10**6)
    if dart_f not in face:
        raise MoveError("move II edges do not share a face")
    under = 0 if e_over else 1
    x1 = g.add_node(4, under)
    x2 = g.add_node(4, under)
    # x1: [f_mid, e_mid, f_end, e_start]; x2: [f_start, e_mid, f_mid, e_end]
    g.insert_on(*dart_e, x1, near=3, far=1)
    g.insert_on(x1, 1, x2, near=1, far=3)
    g.insert_on(*dart_f, x2, near=0, far=2)
    g.insert_on(x2, 2, x1, near=0, far=2)


def _bigon(g: Graph, x1: int, s: int) -> tuple[int, int] | None:
    if x1 not in g.nodes or not g.is_crossing(x1):
        return None
    face = _face(g, x1, s, limit=2)
    if face is None or len(face) != 2:
        return None
    x2, t = face[1]
    if x2 == x1 or not g.is_crossing(x2):
        return None
    if g.over_at(x1, s) != g.over_at(x2, t + 1):
        return None
    return x2, t


def _unpush(g: Graph, x1: int, s: int) -> None:
    found = _bigon(g, x1, s)
    if found is None:
        raise MoveError(f"no removable bigon at dart ({x1}, {s})")
    x2, t = found
    g.join(x1, s, s + 2)
    g.join(x2, t + 1, t + 3)
    g.join(x1, s + 1, s + 3)
    g.join(x2, t, t + 2)
    g.remove_node(x1)
    g.remove_node(x2)


# ---------------------------------------------------------------------------
# move III


def _triangle(g: Graph, x1: int, i: int) -> list[tuple[int, int]] | None:
    if x1 not in g.nodes or not g.is_crossing(x1):
        return None
    face = _face(g, x1, i, limit=3)
    if face is None or len(face) != 3:
        return None
    nodes = [n for n, _ in face]
    if len(set(nodes)) != 3 or not all(g.is_crossing(n) for n in nodes):
        return None
    return face


def _movable_sides(g: Graph, face: list[tuple[int, int]]) -> list[int]:
    out = []
    for r in range(3):
        n, s = face[r]
        n2, s2 = g.other_end(n, s)
        if g.over_at(n, s) == g.over_at(n2, s2):
            out.append(r)
    return out


def _reidemeister3(g: Graph, x1: int, i: int, variant: int = 0) -> None:
    face = _triangle(g, x1, i)
    if face is None:
        raise MoveError(f"no triangle face at dart ({x1}, {i})")
    sides = _movable_sides(g, face)
    if not sides:
        raise MoveError("triangle has no strand over or under both others")
    r = sides[variant % len(sides)]
    (x1, i), (x2, jb), (x3, lc) = face[r:] + face[:r]
    j, l = jb + 1, lc + 1
    a, b, c = g.edge_at(x1, i), g.edge_at(x2, j - 1), g.edge_at(x3, l - 1)
    a_fwd = g.edges[a]["tail"] == g.norm(x1, i)
    b_fwd = g.edges[b]["tail"] == g.norm(x2, j - 1)
    c_fwd = g.edges[c]["tail"] == g.norm(x3, l - 1)
    p_over = g.over_at(x1, i)
    r_under = not g.over_at(x3, l + 1)
    yq = g.add_node(4, 1 if p_over else 0)
    yr = g.add_node(4, 1 if p_over else 0)
    x3n = g.add_node(4, 0 if r_under else 1)
    for e in (a, b, c):
        g.remove_edge_ends(e)
    g.move_end((x1, i + 2), (yq, 2))
    g.move_end((x1, i + 3), (x3n, 2))
    g.move_end((x2, j + 2), (yr, 0))
    g.move_end((x2, j + 1), (x3n, 3))
    g.move_end((x3, l + 2), (yq, 1))
    g.move_end((x3, l + 1), (yr, 1))
    g.attach(a, (yq, 0), (yr, 2), a_fwd)
    g.attach(b, (x3n, 1), (yq, 3), b_fwd)
    g.attach(c, (yr, 3), (x3n, 0), c_fwd)
    for n in (x1, x2, x3):
        g.remove_node(n)


# ---------------------------------------------------------------------------
# move IV


def _slide_site(g: Graph, v: int, k: int, strict: bool = True) -> tuple[int, int] | None:
    if v not in g.nodes or g.is_crossing(v):
        return None
    other = g.other_end(v, k)
    if other is None or not g.is_crossing(other[0]):
        return None
    x, j = other
    if not strict:
        return x, j
    xe = [g.edge_at(x, s) for s in range(4)]
    ve = [g.edge_at(v, s) for s in range(3)]
    if len(set(xe)) != 4 or len(set(ve)) != 3 or set(xe) & set(ve) != {ve[k % 3]}:
        return None
    return x, j


def _slide(g: Graph, v: int, k: int, expect_over: bool | None, strict: bool = True) -> None:
    site = _slide_site(g, v, k, strict)
    if site is None:
        raise MoveError(f"no crossing to slide next to vertex {v} slot {k}")
    x, j = site
    s_over = g.over_at(x, j + 1)
    if expect_over is not None and s_over != expect_over:
        raise MoveError("strand passes on the other side of the vertex (IV vs IV')")
    under = 0 if s_over else 1
    y1 = g.add_node(4, under)
    y2 = g.add_node(4, under)
    s_edge, p_to_q = g.end_at(x, j + 1)
    kind = g.kind(s_edge)
    g.insert_on(v, k + 1, y1, near=0, far=2)
    g.insert_on(v, k + 2, y2, near=0, far=2)
    g.move_end((x, j + 1), (y2, 3))
    g.move_end((x, j + 3), (y1, 1))
    if p_to_q:
        g.add_edge(kind, 0, tail=(y2, 1), head=(y1, 3))
    else:
        g.add_edge(kind, 0, tail=(y1, 3), head=(y2, 1))
    g.join(x, j, j + 2)
    g.remove_node(x)


def _unslide_site(g: Graph, v: int, k: int):
    if v not in g.nodes or g.is_crossing(v):
        return None
    o1, o2 = g.other_end(v, k + 1), g.other_end(v, k + 2)
    if o1 is None or o2 is None:
        return None
    (y1, a1), (y2, a2) = o1, o2
    if y1 == y2 or y1 == v or y2 == v or not (g.is_crossing(y1) and g.is_crossing(y2)):
        return None
    mid_other = g.other_end(y2, a2 + 1)
    if mid_other != g.norm(y1, a1 + 3):
        return None
    if g.over_at(y2, a2 + 1) != g.over_at(y1, a1 + 3):
        return None
    edges = [g.edge_at(y1, s) for s in range(4)] + [g.edge_at(y2, s) for s in range(4)]
    if len(set(edges)) != 7:
        return None
    if len({g.edge_at(v, s) for s in range(3)}) != 3:
        return None
    return y1, a1, y2, a2


def _unslide(g: Graph, v: int, k: int, expect_over: bool | None) -> None:
    site = _unslide_site(g, v, k)
    if site is None:
        raise MoveError(f"no slid strand around vertex {v} slot {k}")
    y1, a1, y2, a2 = site
    s_over = g.over_at(y2, a2 + 1)
    if expect_over is not None and s_over != expect_over:
        raise MoveError("strand passes on the other side of the vertex (IV vs IV')")
    x = g.add_node(4, 0 if s_over else 1)
    mid = g.edge_at(y2, a2 + 1)
    g.insert_on(v, k, x, near=0, far=2)
    g.remove_edge(mid)
    g.move_end((y2, a2 + 3), (x, 1))
    g.move_end((y1, a1 + 1), (x, 3))
    g.join(y1, a1, a1 + 2)
    g.join(y2, a2, a2 + 2)
    g.remove_node(y1)
    g.remove_node(y2)


# ---------------------------------------------------------------------------
# vertex twists (V, RV)


def _bond_slot(g: Graph, v: int) -> int:
    for s in range(3):
        if g.kind(g.edge_at(v, s)) == BOND:
            return s
    raise MoveError(f"node {v} is not a bond vertex")


def _twist(g: Graph, v: int, over_p: bool) -> None:
    k = _bond_slot(g, v)
    x = g.add_node(4, 0 if over_p else 1)
    p_head = g.end_at(v, k + 1)[1]
    q_head = g.end_at(v, k + 2)[1]
    g.move_end((v, k + 1), (x, 1))
    g.move_end((v, k + 2), (x, 2))
    if p_head:
        g.add_edge(CHAIN, 0, tail=(x, 3), head=(v, k + 2))
    else:
        g.add_edge(CHAIN, 0, tail=(v, k + 2), head=(x, 3))
    if q_head:
        g.add_edge(CHAIN, 0, tail=(x, 0), head=(v, k + 1))
    else:
        g.add_edge(CHAIN, 0, tail=(v, k + 1), head=(x, 0))


def _twist_site(g: Graph, v: int) -> tuple[int, int] | None:
    """Return ``(x, x0)`` when both chain ends of ``v`` run straight into crossing ``x``."""
    if v not in g.nodes or g.is_crossing(v):
        return None
    k = _bond_slot(g, v)
    o1, o2 = g.other_end(v, k + 1), g.other_end(v, k + 2)
    if o1 is None or o2 is None or o1[0] != o2[0] or not g.is_crossing(o1[0]):
        return None
    x, x0 = o1
    if g.norm(x, x0 - 1) != o2:
        return None
    if g.edge_at(v, k + 1) == g.edge_at(v, k + 2):
        return None
    far = {g.edge_at(x, x0 + 1), g.edge_at(x, x0 + 2)}
    if far & {g.edge_at(v, k + 1), g.edge_at(v, k + 2)}:
        return None
    return x, x0


def _untwist(g: Graph, v: int, over_p: bool | None) -> None:
    site = _twist_site(g, v)
    if site is None:
        raise MoveError(f"no twist at vertex {v}")
    x, x0 = site
    if over_p is not None and g.over_at(x, x0 + 1) != over_p:
        raise MoveError(f"twist at vertex {v} has the other handedness")
    k = _bond_slot(g, v)
    g.remove_edge(g.edge_at(v, k + 1))
    g.remove_edge(g.edge_at(v, k + 2))
    g.move_end((x, x0 + 1), (v, k + 1))
    g.move_end((x, x0 + 2), (v, k + 2))
    g.remove_node(x)


def _bond_ends(g: Graph, v: int) -> tuple[int, int]:
    """``(tail_vertex, head_vertex)`` of the bond at ``v``."""
    k = _bond_slot(g, v)
    e, is_head = g.end_at(v, k)
    node = v
    slot = k
    # walk to the far end through crossings
    while True:
        n2, s2 = g.other_end(node, slot)
        if not g.is_crossing(n2):
            break
        node, slot = n2, s2 + 2
    far = n2
    return (far, v) if is_head else (v, far)


def _rigid_flip(g: Graph, v: int, up: bool) -> None:
    tail, head = _bond_ends(g, v)
    _twist(g, tail, up)
    _twist(g, head, not up)


def _rigid_unflip(g: Graph, v: int, up: bool | None) -> None:
    tail, head = _bond_ends(g, v)
    st, sh = _twist_site(g, tail), _twist_site(g, head)
    if st is None or sh is None:
        raise MoveError(f"bond at vertex {v} is not flipped")
    ot = g.over_at(st[0], st[1] + 1)
    oh = g.over_at(sh[0], sh[1] + 1)
    if ot == oh or (up is not None and ot != up):
        raise MoveError(f"bond at vertex {v} is not a rigid flip")
    _untwist(g, tail, None)
    _untwist(g, head, None)


# ---------------------------------------------------------------------------
# dispatch


def _apply(g: Graph, site: MoveSite) -> None:
    m, t, var, inv = site.move, site.target, site.variant, site.inverse
    if m in ("I+", "I-"):
        sign = 1 if m == "I+" else -1
        if inv:
            _unkink(g, t[0], sign)
        else:
            _kink(g, t[0], sign, var)
    elif m == "II":
        if inv:
            _unpush(g, t[0], t[1])
        else:
            _push(g, g.norm(t[0], t[1]), g.norm(t[2], t[3]), var % 2 == 0)
    elif m == "III":
        _reidemeister3(g, t[0], t[1], var)
    elif m in ("IV", "IV'"):
        over = m == "IV"
        if inv:
            _unslide(g, t[0], t[1], over)
        else:
            _slide(g, t[0], t[1], over)
    elif m == "RV":
        if inv:
            _rigid_unflip(g, t[0], None)
        else:
            _rigid_flip(g, t[0], var % 2 == 0)
    elif m == "V":
        if inv:
            _untwist(g, t[0], None)
        else:
            _twist(g, t[0], var % 2 == 0)
    elif m == "bond_slide":
        if inv:
            raise MoveError("bond_slide is applied forward only; undo it with RV^-1 and IV^-1")
        v = t[0]
        k = _bond_slot(g, v)
        site_x = _slide_site(g, v, k)
        if site_x is None:
            raise MoveError(f"no strand crossing the bond next to vertex {v}")
        over = g.over_at(site_x[0], site_x[1] + 1)
        _slide(g, v, k, over)
        _rigid_flip(g, v, var % 2 == 0)
    else:
        raise MoveError(f"unknown move {m!r}")


def apply_move(d: BondedDiagram, site: MoveSite) -> BondedDiagram:
    """Return the diagram rewritten at ``site``; raises :class:`MoveError` on mismatch."""
    g = Graph.from_diagram(d)
    try:
        _apply(g, site)
    except (KeyError, IndexError, TypeError) as exc:
        raise MoveError(f"{site}: {exc!r}") from exc
    return g.to_diagram()


def bond_slide_steps(d: BondedDiagram, v: int, variant: int = 0) -> list[MoveSite]:
    """The primitive moves that make up ``bond_slide`` at ``v`` (for cross-checking)."""
    g = Graph.from_diagram(d)
    k = _bond_slot(g, v)
    site_x = _slide_site(g, v, k)
    if site_x is None:
        raise MoveError(f"no strand crossing the bond next to vertex {v}")
    name = "IV" if g.over_at(site_x[0], site_x[1] + 1) else "IV'"
    return [MoveSite(name, (v, k)), MoveSite("RV", (v,), variant)]


# ---------------------------------------------------------------------------
# site enumeration


def find_sites(d: BondedDiagram, moves=MOVES, inverses: bool = True) -> list[MoveSite]:
    g = Graph.from_diagram(d)
    out: list[MoveSite] = []
    want = set(moves)
    vertices = [n for n in sorted(g.nodes) if not g.is_crossing(n)]
    crossings = [n for n in sorted(g.nodes) if g.is_crossing(n)]

    for m, sign in (("I+", 1), ("I-", -1)):
        if m not in want:
            continue
        for e in sorted(g.edges):
            if g.kind(e) == CHAIN:
                out.extend(MoveSite(m, (e,), var) for var in (0, 1))
        if inverses:
            for x in crossings:
                if _kink_loop(g, x) is not None and _sign(g, x) == sign:
                    out.append(MoveSite(m, (x,), inverse=True))

    if "II" in want or "III" in want:
        for face in faces(d):
            if "II" in want:
                for i, de in enumerate(face):
                    for df in face[i + 1:]:
                        if g.edge_at(*de) != g.edge_at(*df):
                            out.extend(MoveSite("II", de + df, var) for var in (0, 1))
                if inverses and len(face) == 2 and _bigon(g, *face[0]) is not None:
                    out.append(MoveSite("II", face[0], inverse=True))
            if "III" in want and len(face) == 3:
                tri = _triangle(g, *face[0])
                if tri is not None:
                    for var in range(len(_movable_sides(g, tri))):
                        out.append(MoveSite("III", face[0], var))

    for v in vertices:
        for k in range(3):
            site = _slide_site(g, v, k)
            if site is not None:
                name = "IV" if g.over_at(site[0], site[1] + 1) else "IV'"
                if name in want:
                    out.append(MoveSite(name, (v, k)))
            if inverses:
                us = _unslide_site(g, v, k)
                if us is not None:
                    name = "IV" if g.over_at(us[2], us[3] + 1) else "IV'"
                    if name in want:
                        out.append(MoveSite(name, (v, k), inverse=True))
        if "V" in want:
            out.extend(MoveSite("V", (v,), var) for var in (0, 1))
            if inverses and _twist_site(g, v) is not None:
                out.append(MoveSite("V", (v,), inverse=True))
        tail, head = _bond_ends(g, v)
        if tail == v:
            if "RV" in want:
                out.extend(MoveSite("RV", (v,), var) for var in (0, 1))
                if inverses:
                    st, sh = _twist_site(g, tail), _twist_site(g, head)
                    if st and sh and g.over_at(st[0], st[1] + 1) != g.over_at(sh[0], sh[1] + 1):
                        out.append(MoveSite("RV", (v,), inverse=True))
        if "bond_slide" in want and _slide_site(g, v, _bond_slot(g, v)) is not None:
            out.extend(MoveSite("bond_slide", (v,), var) for var in (0, 1))
    return out


_GROWS = {"I+", "I-", "II", "RV", "V", "bond_slide"}


def random_moves(
    d: BondedDiagram,
    count: int,
    seed: int,
    moves=MOVES,
    max_crossings: int | None = None,
) -> BondedDiagram:
    """Apply ``count`` seeded random moves; the log is stored in ``result.meta['moves']``.

    A move family (forward or inverse) is drawn first, then a site within it, so the
    walk does not drift toward ever larger diagrams.  Draws that fail are skipped.
    """
    rng = random.Random(seed)
    log: list[MoveSite] = []
    cur = d
    for _ in range(count):
        sites = find_sites(cur, moves)
        if max_crossings is not None and len(cur.crossings) >= max_crossings:
            sites = [s for s in sites if s.inverse or s.move not in _GROWS]
        families: dict[tuple[str, bool], list[MoveSite]] = {}
        for s in sites:
            families.setdefault((s.move, s.inverse), []).append(s)
        if not families:
            break
        key = rng.choice(sorted(families))
        site = rng.choice(families[key])
        try:
            cur = apply_move(cur, site)
        except MoveError:
            continue
        log.append(site)
    return BondedDiagram(cur.edges, cur.crossings, cur.bond_vertices, meta={"moves": log})


def kink_sign(d: BondedDiagram, x: int) -> int:
    return crossing_sign(next(c for c in d.crossings if c.id == x))
