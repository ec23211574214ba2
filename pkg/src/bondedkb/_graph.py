"""Mutable slot-level view of a diagram used by the rewriters.

Slots are addressed as ``(node, slot)``; each slot holds ``(edge, is_head)``.  Crossing
slots keep their geometric counterclockwise order but need not start at the incoming
under-strand; ``under[node]`` records the parity of the under-strand slots.  Freezing
back to :class:`BondedDiagram` restores the canonical rotation.
"""

from __future__ import annotations

from .diagram import BOND, CHAIN, BondedDiagram, BondVertex, Crossing, DiagramError, Edge, Ref

Slot = tuple[int, int]


class RewriteError(DiagramError):
    pass


class Graph:
    def __init__(self):
        self.nodes: dict[int, list] = {}
        self.under: dict[int, int] = {}
        self.edges: dict[int, dict] = {}
        self._next_edge = 0
        self._next_node = 0

    @classmethod
    def from_diagram(cls, d: BondedDiagram) -> "Graph":
        g = cls()
        for e in d.edges:
            g.edges[e.id] = {"kind": e.kind, "tw": e.half_twists, "tail": None, "head": None}
        for nid, refs in d.node_map.items():
            g.nodes[nid] = [None] * len(refs)
            if len(refs) == 4:
                g.under[nid] = 0
            for s, r in enumerate(refs):
                g._put(r.edge, not r.out, (nid, s))
        g._next_edge = max(g.edges, default=-1) + 1
        g._next_node = max(g.nodes, default=-1) + 1
        return g

    def copy(self) -> "Graph":
        g = Graph()
        g.nodes = {k: list(v) for k, v in self.nodes.items()}
        g.under = dict(self.under)
        g.edges = {k: dict(v) for k, v in self.edges.items()}
        g._next_edge, g._next_node = self._next_edge, self._next_node
        return g

    # -- primitives -------------------------------------------------------

    def _put(self, edge: int, is_head: bool, slot: Slot) -> None:
        self.edges[edge]["head" if is_head else "tail"] = slot
        self.nodes[slot[0]][slot[1]] = (edge, is_head)

    def deg(self, node: int) -> int:
        return len(self.nodes[node])

    def norm(self, node: int, slot: int) -> Slot:
        return node, slot % len(self.nodes[node])

    def end_at(self, node: int, slot: int) -> tuple[int, bool]:
        v = self.nodes[node][slot % len(self.nodes[node])]
        if v is None:
            raise RewriteError(f"empty slot {node}:{slot}")
        return v

    def edge_at(self, node: int, slot: int) -> int:
        return self.end_at(node, slot)[0]

    def kind(self, edge: int) -> str:
        return self.edges[edge]["kind"]

    def other_end(self, node: int, slot: int) -> Slot | None:
        e, is_head = self.end_at(node, slot)
        return self.edges[e]["tail" if is_head else "head"]

    def is_crossing(self, node: int) -> bool:
        return len(self.nodes[node]) == 4

    def add_node(self, nslots: int, under: int = 0) -> int:
        nid = self._next_node
        self._next_node += 1
        self.nodes[nid] = [None] * nslots
        if nslots == 4:
            self.under[nid] = under % 2
        return nid

    def add_edge(self, kind: str = CHAIN, tw: int = 0, tail: Slot | None = None, head: Slot | None = None) -> int:
        eid = self._next_edge
        self._next_edge += 1
        self.edges[eid] = {"kind": kind, "tw": tw, "tail": None, "head": None}
        if tail is not None:
            self._put(eid, False, self.norm(*tail))
        if head is not None:
            self._put(eid, True, self.norm(*head))
        return eid

    def remove_edge(self, edge: int) -> None:
        info = self.edges.pop(edge)
        for key in ("tail", "head"):
            if info[key] is not None:
                n, s = info[key]
                self.nodes[n][s] = None

    def remove_edge_ends(self, edge: int) -> None:
        """Detach both ends of ``edge`` but keep the edge record."""
        info = self.edges[edge]
        for key in ("tail", "head"):
            if info[key] is not None:
                n, s = info[key]
                self.nodes[n][s] = None
                info[key] = None

    def attach(self, edge: int, a: Slot, b: Slot, forward: bool) -> None:
        """Attach ``edge`` between ``a`` and ``b``, running a->b when ``forward``."""
        a, b = self.norm(*a), self.norm(*b)
        tail, head = (a, b) if forward else (b, a)
        self._put(edge, False, tail)
        self._put(edge, True, head)

    def remove_node(self, node: int) -> None:
        if any(x is not None for x in self.nodes[node]):
            raise RewriteError(f"node {node} still has attached edges")
        del self.nodes[node]
        self.under.pop(node, None)

    def move_end(self, src: Slot, dst: Slot) -> None:
        src = self.norm(*src)
        dst = self.norm(*dst)
        e, is_head = self.end_at(*src)
        if self.nodes[dst[0]][dst[1]] is not None:
            raise RewriteError(f"slot {dst} occupied")
        self.nodes[src[0]][src[1]] = None
        self._put(e, is_head, dst)

    def insert_on(self, node: int, slot: int, new: int, near: int, far: int) -> tuple[int, int]:
        """Subdivide the edge at ``(node, slot)`` by ``new``.

        The piece touching ``(node, slot)`` attaches at ``(new, near)``, the remainder at
        ``(new, far)``.  Returns ``(near_piece, far_piece)`` edge ids.
        """
        node, slot = self.norm(node, slot)
        e, is_head = self.end_at(node, slot)
        info = self.edges[e]
        nearslot, farslot = self.norm(new, near), self.norm(new, far)
        if is_head:
            # flow: far side -> new -> node ; new edge carries the head part
            n = self.add_edge(info["kind"], 0)
            self.nodes[node][slot] = None
            self._put(n, True, (node, slot))
            self._put(n, False, nearslot)
            self._put(e, True, farslot)
            return n, e
        n = self.add_edge(info["kind"], 0)
        old_head = info["head"]
        self._put(e, True, nearslot)
        self._put(n, False, farslot)
        if old_head is not None:
            self._put(n, True, old_head)
        return e, n

    def insert_on_loop(self, edge: int, new: int, in_slot: int, out_slot: int) -> None:
        info = self.edges[edge]
        if info["tail"] is not None:
            raise RewriteError(f"edge {edge} is not a free loop")
        self._put(edge, True, self.norm(new, in_slot))
        self._put(edge, False, self.norm(new, out_slot))

    def join(self, node: int, sa: int, sb: int) -> int:
        """Fuse the two edge ends at ``(node, sa)`` and ``(node, sb)`` into one edge."""
        node, sa = self.norm(node, sa)
        _, sb = self.norm(node, sb)
        ea, ha = self.end_at(node, sa)
        eb, hb = self.end_at(node, sb)
        if ha == hb:
            raise RewriteError(f"cannot join two {'heads' if ha else 'tails'} at node {node}")
        if ea == eb:
            self.nodes[node][sa] = None
            self.nodes[node][sb] = None
            self.edges[ea]["tail"] = self.edges[ea]["head"] = None
            return ea
        arriving, leaving = (ea, eb) if ha else (eb, ea)
        ia, il = self.edges[arriving], self.edges[leaving]
        if ia["kind"] != il["kind"]:
            raise RewriteError(f"cannot join {ia['kind']} edge {arriving} with {il['kind']} edge {leaving}")
        self.nodes[node][sa] = None
        self.nodes[node][sb] = None
        head = il["head"]
        tw = ia["tw"] + il["tw"]
        del self.edges[leaving]
        ia["head"] = None
        ia["tw"] = tw
        if head is not None:
            self._put(arriving, True, head)
        return arriving

    def over_at(self, node: int, slot: int) -> bool:
        return slot % 2 != self.under[node]

    # -- freezing ---------------------------------------------------------

    def to_diagram(self) -> BondedDiagram:
        edges = tuple(Edge(k, v["kind"], v["tw"]) for k, v in self.edges.items())
        crossings, vertices = [], []
        for nid, slots in self.nodes.items():
            if any(x is None for x in slots):
                raise RewriteError(f"node {nid} has an empty slot")
            refs = [Ref(e, not is_head) for e, is_head in slots]
            if len(slots) == 4:
                p = self.under[nid]
                start = p if not refs[p].out else p + 2
                crossings.append(Crossing(nid, tuple(refs[(start + k) % 4] for k in range(4))))
            else:
                kinds = [self.edges[r.edge]["kind"] for r in refs]
                start = kinds.index(BOND) if BOND in kinds else 0
                vertices.append(BondVertex(nid, tuple(refs[(start + k) % 3] for k in range(3))))
        return BondedDiagram(edges, tuple(crossings), tuple(vertices))
