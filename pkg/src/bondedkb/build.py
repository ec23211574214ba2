"""Constructors for standard and random bonded diagrams."""

from __future__ import annotations

import random

from ._graph import Graph, RewriteError
from .diagram import BOND, CHAIN, BondedDiagram, disjoint_union, faces

__all__ = [
    "unknot",
    "theta",
    "handcuff",
    "braid_closure",
    "trefoil",
    "add_bond",
    "theta_sum",
    "handcuff_sum",
    "double_bonded_circles",
    "random_bonded",
]


def _vertex_on(g: Graph, edge: int, left: bool = True) -> int:
    """Subdivide ``edge`` by a new bond vertex whose bond slot faces left or right."""
    w = g.add_node(3)
    in_slot, out_slot = (1, 2) if left else (2, 1)
    info = g.edges[edge]
    if info["tail"] is None:
        g.insert_on_loop(edge, w, in_slot, out_slot)
    else:
        g.insert_on(*info["tail"], w, near=in_slot, far=out_slot)
    return w


def _small_circle(g: Graph) -> int:
    c = g.add_edge(CHAIN)
    w = g.add_node(3)
    g.insert_on_loop(c, w, in_slot=2, out_slot=1)
    return w


def unknot() -> BondedDiagram:
    g = Graph()
    g.add_edge(CHAIN)
    return g.to_diagram()


def theta() -> BondedDiagram:
    """A circle with one bond chord."""
    return theta_sum(unknot(), 0)


def handcuff() -> BondedDiagram:
    """Two circles joined by one bond."""
    return handcuff_sum(unknot(), 0)


def theta_sum(d: BondedDiagram, edge: int, left: bool = True) -> BondedDiagram:
    """Connected sum with a theta graph spliced into chain edge ``edge``."""
    g = Graph.from_diagram(d)
    if g.kind(edge) != CHAIN:
        raise RewriteError("theta summands go on chain edges")
    w1 = _vertex_on(g, edge, left)
    nxt = g.edge_at(w1, 2 if left else 1)
    w2 = _vertex_on(g, nxt, left)
    g.add_edge(BOND, 0, tail=(w1, 0), head=(w2, 0))
    return g.to_diagram()


def handcuff_sum(d: BondedDiagram, edge: int, left: bool = True) -> BondedDiagram:
    """Attach a new small circle to chain edge ``edge`` by one bond."""
    g = Graph.from_diagram(d)
    if g.kind(edge) != CHAIN:
        raise RewriteError("handcuff summands go on chain edges")
    w1 = _vertex_on(g, edge, left)
    w2 = _small_circle(g)
    g.add_edge(BOND, 0, tail=(w1, 0), head=(w2, 0))
    return g.to_diagram()


def add_bond(d: BondedDiagram, dart1: tuple[int, int], dart2: tuple[int, int]) -> BondedDiagram:
    """Draw a new bond through the face to the left of two chain darts of that face."""
    if dart1 == dart2:
        raise RewriteError("a bond needs two distinct darts")
    face = next((f for f in faces(d) if tuple(dart1) in f), None)
    if face is None or tuple(dart2) not in face:
        raise RewriteError("darts do not lie on a common face")
    g = Graph.from_diagram(d)
    e1, e2 = g.edge_at(*dart1), g.edge_at(*dart2)
    if g.kind(e1) != CHAIN or g.kind(e2) != CHAIN:
        raise RewriteError("bonds attach to chain edges only")
    ws = []
    for n, s in (dart1, dart2):
        w = g.add_node(3)
        # the traversal leaving (n, s) enters w at "back" (1) and leaves at "forward" (2)
        g.insert_on(n, s, w, near=1, far=2)
        ws.append(w)
    g.add_edge(BOND, 0, tail=(ws[0], 0), head=(ws[1], 0))
    return g.to_diagram()


def double_bonded_circles() -> BondedDiagram:
    """Two circles joined by two parallel bonds."""
    d = handcuff()
    for f in faces(d):
        chain = [dt for dt in f if d.edge_map[d.node_map[dt[0]][dt[1]].edge].kind == CHAIN]
        nodes_seen = {}
        for dt in chain:
            comp = _circle_of(d, dt)
            nodes_seen.setdefault(comp, dt)
        if len(nodes_seen) == 2:
            a, b = nodes_seen.values()
            return add_bond(d, a, b)
    raise AssertionError("handcuff has no face touching both circles")


def _circle_of(d: BondedDiagram, dart) -> int:
    # the handcuff's two circles are single loop edges; identify them by edge id
    return d.node_map[dart[0]][dart[1]].edge


# positive: [BR, TR, TL, BL]; negative: [BL, BR, TR, TL]
_SLOTS = {1: {"BR": 0, "TR": 1, "TL": 2, "BL": 3}, -1: {"BL": 0, "BR": 1, "TR": 2, "TL": 3}}


def braid_closure(strands: int, word) -> BondedDiagram:
    """Closure of a braid word; letter ``±i`` is generator ``i`` (1-based) or its inverse.

    Strands run upward; the over-strand of a positive letter goes bottom-left to top-right.
    """
    g = Graph()
    cur: list = [None] * strands
    first: list = [None] * strands
    for letter in word:
        i = abs(letter) - 1
        if not 0 <= i < strands - 1 or letter == 0:
            raise ValueError(f"bad braid letter {letter} for {strands} strands")
        sl = _SLOTS[1 if letter > 0 else -1]
        x = g.add_node(4, under=0)
        for pos, corner in ((i, "BL"), (i + 1, "BR")):
            slot = (x, sl[corner])
            if cur[pos] is None:
                first[pos] = slot
            else:
                g.add_edge(CHAIN, 0, tail=cur[pos], head=slot)
        cur[i], cur[i + 1] = (x, sl["TL"]), (x, sl["TR"])
    for pos in range(strands):
        if cur[pos] is None:
            g.add_edge(CHAIN)
        else:
            g.add_edge(CHAIN, 0, tail=cur[pos], head=first[pos])
    return g.to_diagram()


def trefoil(right: bool = True) -> BondedDiagram:
    return braid_closure(2, [1, 1, 1] if right else [-1, -1, -1])


def random_bonded(
    seed: int,
    max_strands: int = 3,
    max_letters: int = 5,
    max_bonds: int = 2,
    summands: int = 1,
) -> BondedDiagram:
    """A seeded random bonded diagram: a braid closure plus bonds drawn across faces."""
    rng = random.Random(seed)
    n = rng.randint(1, max_strands)
    word = []
    if n > 1:
        for _ in range(rng.randint(0, max_letters)):
            word.append(rng.choice([1, -1]) * rng.randint(1, n - 1))
    d = braid_closure(n, word)
    for _ in range(rng.randint(1, max_bonds)):
        chain_faces = []
        for f in faces(d):
            darts = [dt for dt in f if d.edge_map[d.node_map[dt[0]][dt[1]].edge].kind == CHAIN]
            if len(darts) >= 2:
                chain_faces.append(darts)
        if not chain_faces:
            chain = [e.id for e in d.edges if e.kind == CHAIN]
            d = theta_sum(d, rng.choice(chain), rng.random() < 0.5)
            continue
        darts = rng.choice(chain_faces)
        a, b = rng.sample(darts, 2)
        d = add_bond(d, a, b)
    for _ in range(rng.randint(0, summands)):
        chain = [e.id for e in d.edges if e.kind == CHAIN]
        if rng.random() < 0.5:
            d = theta_sum(d, rng.choice(chain), rng.random() < 0.5)
        else:
            d = handcuff_sum(d, rng.choice(chain), rng.random() < 0.5)
    if rng.random() < 0.2:
        d = disjoint_union(d, theta())
    return d
