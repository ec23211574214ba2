"""Combinatorial bonded link diagrams.

A diagram is a planar map whose nodes are 4-valent crossings and trivalent bond
vertices.  Every node lists signed edge references in counterclockwise order:

* crossing: slot 0 is the incoming under-strand, slot 2 the outgoing under-strand,
  slots 1 and 3 carry the over-strand;
* bond vertex: slot 0 is the bond end, slots 1 and 2 are the chain ends.

An edge that is referenced nowhere is a free circle.  A bond is a maximal path of
``bond`` edges running straight through crossings between two bond vertices; its
orientation is the direction of its edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

__all__ = [
    "Ref",
    "Edge",
    "Crossing",
    "BondVertex",
    "Bond",
    "BondedDiagram",
    "DiagramError",
    "ParseError",
    "ValidationError",
    "parse_diagram",
    "serialize_diagram",
    "validate",
    "writhe",
    "crossing_sign",
    "split_components",
    "disjoint_union",
    "canonical_key",
    "faces",
    "euler_ok",
]

CHAIN = "chain"
BOND = "bond"


class DiagramError(Exception):
    """Base class for diagram errors."""


class ParseError(DiagramError):
    pass


class ValidationError(DiagramError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True, order=True)
class Ref:
    edge: int
    out: bool

    def to_json(self) -> dict:
        return {"edge": self.edge, "dir": "out" if self.out else "in"}


@dataclass(frozen=True)
class Edge:
    id: int
    kind: str = CHAIN
    half_twists: int = 0


@dataclass(frozen=True)
class Crossing:
    id: int
    incident: tuple[Ref, Ref, Ref, Ref]


@dataclass(frozen=True)
class BondVertex:
    id: int
    incident: tuple[Ref, Ref, Ref]


@dataclass(frozen=True)
class Bond:
    id: int
    tail: int
    head: int
    segments: tuple[int, ...]


@dataclass(frozen=True)
class BondedDiagram:
    edges: tuple[Edge, ...] = ()
    crossings: tuple[Crossing, ...] = ()
    bond_vertices: tuple[BondVertex, ...] = ()
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))
        object.__setattr__(self, "crossings", tuple(sorted(self.crossings, key=lambda c: c.id)))
        object.__setattr__(
            self, "bond_vertices", tuple(sorted(self.bond_vertices, key=lambda v: v.id))
        )

    @cached_property
    def edge_map(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def node_map(self) -> dict[int, tuple[Ref, ...]]:
        out: dict[int, tuple[Ref, ...]] = {}
        for c in self.crossings:
            out[c.id] = c.incident
        for v in self.bond_vertices:
            out[v.id] = v.incident
        return out

    @cached_property
    def ends(self) -> dict[int, list]:
        """``edge -> [tail (node, slot) | None, head (node, slot) | None]``."""
        out: dict[int, list] = {e.id: [None, None] for e in self.edges}
        for nid, refs in self.node_map.items():
            for slot, r in enumerate(refs):
                if r.edge in out:
                    out[r.edge][0 if r.out else 1] = (nid, slot)
        return out

    def is_crossing(self, node: int) -> bool:
        return len(self.node_map[node]) == 4

    def other_end(self, node: int, slot: int) -> tuple[int, int] | None:
        r = self.node_map[node][slot]
        tail, head = self.ends[r.edge]
        return head if r.out else tail

    @cached_property
    def bonds(self) -> tuple[Bond, ...]:
        out = []
        for v in self.bond_vertices:
            r = v.incident[0]
            if not r.out:
                continue
            segs = [r.edge]
            end = self.ends[r.edge][1]
            guard = 0
            while end is not None and len(self.node_map[end[0]]) == 4 and guard <= len(self.edges):
                nxt = self.node_map[end[0]][(end[1] + 2) % 4]
                segs.append(nxt.edge)
                end = self.ends[nxt.edge][1]
                guard += 1
            if end is None or len(self.node_map[end[0]]) != 3:
                continue
            out.append(Bond(r.edge, v.id, end[0], tuple(segs)))
        return tuple(sorted(out, key=lambda b: b.id))

    @property
    def bond_orientations(self) -> dict[int, tuple[int, int]]:
        return {b.id: (b.tail, b.head) for b in self.bonds}

    @property
    def bond_count(self) -> int:
        return len(self.bond_vertices) // 2

    def free_loops(self) -> list[Edge]:
        return [e for e in self.edges if self.ends[e.id] == [None, None]]

    def to_json(self) -> str:
        return serialize_diagram(self)


# ---------------------------------------------------------------------------
# JSON


def _ref_from_json(obj, where: str) -> Ref:
    if not isinstance(obj, dict) or "edge" not in obj or obj.get("dir") not in ("in", "out"):
        raise ParseError(f"{where}: expected {{'edge': id, 'dir': 'in'|'out'}}, got {obj!r}")
    if not isinstance(obj["edge"], int):
        raise ParseError(f"{where}: edge id must be an integer")
    return Ref(obj["edge"], obj["dir"] == "out")


def diagram_from_obj(obj: dict) -> BondedDiagram:
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    try:
        edges = tuple(
            Edge(int(e["id"]), e.get("kind", CHAIN), int(e.get("half_twists", 0)))
            for e in obj.get("edges", [])
        )
        crossings = []
        for c in obj.get("crossings", []):
            refs = tuple(_ref_from_json(r, f"crossing {c.get('id')}") for r in c["incident"])
            crossings.append(Crossing(int(c["id"]), refs))
        vertices = []
        for v in obj.get("bond_vertices", []):
            refs = tuple(_ref_from_json(r, f"bond vertex {v.get('id')}") for r in v["incident"])
            vertices.append(BondVertex(int(v["id"]), refs))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed diagram element: {exc}") from exc
    d = BondedDiagram(edges, tuple(crossings), tuple(vertices))
    given = obj.get("bond_orientations")
    violations = validate(d)
    if given is not None and not violations:
        derived = {str(k): list(v) for k, v in d.bond_orientations.items()}
        normalized = {str(k): list(v) for k, v in given.items()}
        if derived != normalized:
            violations.append(
                f"bond_orientations {normalized} disagree with edge directions {derived}"
            )
    if violations:
        raise ValidationError(violations)
    return d


def parse_diagram(text: str) -> BondedDiagram:
    """Parse and validate the diagram JSON format."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return diagram_from_obj(obj)


def diagram_to_obj(d: BondedDiagram) -> dict:
    return {
        "edges": [{"id": e.id, "kind": e.kind, "half_twists": e.half_twists} for e in d.edges],
        "crossings": [
            {"id": c.id, "incident": [r.to_json() for r in c.incident]} for c in d.crossings
        ],
        "bond_vertices": [
            {"id": v.id, "incident": [r.to_json() for r in v.incident]} for v in d.bond_vertices
        ],
        "bond_orientations": {str(k): list(v) for k, v in sorted(d.bond_orientations.items())},
    }


def serialize_diagram(d: BondedDiagram) -> str:
    return json.dumps(diagram_to_obj(d), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# validation


def validate(d: BondedDiagram) -> list[str]:
    """Return a list of human-readable violations; empty iff ``d`` is well formed."""
    bad: list[str] = []
    edge_ids = [e.id for e in d.edges]
    if len(set(edge_ids)) != len(edge_ids):
        bad.append("duplicate edge ids")
    node_ids = [c.id for c in d.crossings] + [v.id for v in d.bond_vertices]
    if len(set(node_ids)) != len(node_ids):
        bad.append("duplicate node ids (crossings and bond vertices share one id space)")
    kinds = {e.id: e.kind for e in d.edges}
    for e in d.edges:
        if e.kind not in (CHAIN, BOND):
            bad.append(f"edge {e.id}: unknown kind {e.kind!r}")
        if e.kind == BOND and e.half_twists:
            bad.append(f"edge {e.id}: bonds carry blackboard framing (half_twists must be 0)")

    seen: dict[tuple[int, bool], int] = {}
    for nid, refs in _all_nodes(d):
        for r in refs:
            if r.edge not in kinds:
                bad.append(f"node {nid}: reference to undefined edge {r.edge}")
                continue
            seen[(r.edge, r.out)] = seen.get((r.edge, r.out), 0) + 1
    for e in d.edges:
        n_out, n_in = seen.get((e.id, True), 0), seen.get((e.id, False), 0)
        if (n_out, n_in) == (0, 0):
            if e.kind != CHAIN:
                bad.append(f"edge {e.id}: a closed bond loop is not allowed")
            continue
        if n_out != 1 or n_in != 1:
            bad.append(
                f"edge {e.id}: must appear once outgoing and once incoming "
                f"(found {n_out} outgoing, {n_in} incoming)"
            )

    for c in d.crossings:
        if len(c.incident) != 4:
            bad.append(f"crossing {c.id}: needs 4 incident references")
            continue
        r0, r1, r2, r3 = c.incident
        if r0.out or not r2.out:
            bad.append(f"crossing {c.id}: slot 0 must be the incoming under-strand, slot 2 outgoing")
        if r1.out == r3.out:
            bad.append(f"crossing {c.id}: over-strand must enter and leave (slots 1, 3)")
        if all(r.edge in kinds for r in c.incident):
            if kinds[r0.edge] != kinds[r2.edge] or kinds[r1.edge] != kinds[r3.edge]:
                bad.append(f"crossing {c.id}: a strand changes kind through the crossing")
    for v in d.bond_vertices:
        if len(v.incident) != 3:
            bad.append(f"bond vertex {v.id}: needs 3 incident references")
            continue
        if not all(r.edge in kinds for r in v.incident):
            continue
        n_bond = sum(kinds[r.edge] == BOND for r in v.incident)
        if n_bond != 1:
            bad.append(f"bond vertex {v.id}: must have exactly one bond end, found {n_bond}")
        elif kinds[v.incident[0].edge] != BOND:
            bad.append(f"bond vertex {v.id}: the bond end must be listed first")
        else:
            a, b = v.incident[1], v.incident[2]
            if a.out == b.out:
                bad.append(f"bond vertex {v.id}: chain must pass through (one in, one out)")
    if bad:
        return bad

    # bonds: straight paths of bond edges between two distinct vertices
    starts = 0
    for v in d.bond_vertices:
        r = v.incident[0]
        if r.out:
            starts += 1
    bonds = d.bonds
    if len(bonds) != starts or 2 * len(bonds) != len(d.bond_vertices):
        bad.append("every bond must run straight from one bond vertex to another")
    for b in bonds:
        if b.tail == b.head:
            bad.append(f"bond {b.id}: both ends at vertex {b.tail}")
    covered = {s for b in bonds for s in b.segments}
    for e in d.edges:
        if e.kind == BOND and e.id not in covered:
            bad.append(f"edge {e.id}: bond segment not on a vertex-to-vertex bond path")
    return bad


def _all_nodes(d: BondedDiagram) -> Iterable[tuple[int, tuple[Ref, ...]]]:
    for c in d.crossings:
        yield c.id, c.incident
    for v in d.bond_vertices:
        yield v.id, v.incident


# ---------------------------------------------------------------------------
# writhe


def crossing_sign(c: Crossing) -> int:
    """Right-hand rule sign: positive when the over-strand leaves through slot 1."""
    return 1 if c.incident[1].out else -1


def writhe(d: BondedDiagram, include_bonds: bool = False) -> int:
    """Sum of crossing signs over crossings between chain strands.

    Crossings involving a bond are skipped unless ``include_bonds``; only the
    chain-only count is unchanged when a strand slides across a bond vertex.
    """
    kinds = {e.id: e.kind for e in d.edges}
    total = 0
    for c in d.crossings:
        if not include_bonds and (
            kinds[c.incident[0].edge] == BOND or kinds[c.incident[1].edge] == BOND
        ):
            continue
        total += crossing_sign(c)
    return total


# ---------------------------------------------------------------------------
# components


def _components(d: BondedDiagram) -> list[tuple[set[int], set[int]]]:
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for nid in d.node_map:
        parent[nid] = nid
    for e, (tail, head) in d.ends.items():
        if tail and head:
            a, b = find(tail[0]), find(head[0])
            if a != b:
                parent[a] = b
    groups: dict[int, tuple[set[int], set[int]]] = {}
    for nid in d.node_map:
        groups.setdefault(find(nid), (set(), set()))[0].add(nid)
    for e, (tail, head) in d.ends.items():
        if tail:
            groups[find(tail[0])][1].add(e)
    out = sorted(groups.values(), key=lambda g: min(g[0]))
    for e in d.free_loops():
        out.append((set(), {e.id}))
    return out


def split_components(d: BondedDiagram) -> list[BondedDiagram]:
    """Connected components of the underlying graph; free circles are their own parts."""
    parts = []
    for nodes, edges in _components(d):
        parts.append(
            BondedDiagram(
                tuple(e for e in d.edges if e.id in edges),
                tuple(c for c in d.crossings if c.id in nodes),
                tuple(v for v in d.bond_vertices if v.id in nodes),
            )
        )
    return parts


def relabel(d: BondedDiagram, edge_offset: int, node_offset: int) -> BondedDiagram:
    def rr(r: Ref) -> Ref:
        return Ref(r.edge + edge_offset, r.out)

    return BondedDiagram(
        tuple(Edge(e.id + edge_offset, e.kind, e.half_twists) for e in d.edges),
        tuple(Crossing(c.id + node_offset, tuple(map(rr, c.incident))) for c in d.crossings),
        tuple(BondVertex(v.id + node_offset, tuple(map(rr, v.incident))) for v in d.bond_vertices),
    )


def disjoint_union(a: BondedDiagram, b: BondedDiagram) -> BondedDiagram:
    eoff = max((e.id for e in a.edges), default=-1) + 1
    noff = max(a.node_map, default=-1) + 1
    b2 = relabel(b, eoff, noff)
    return BondedDiagram(a.edges + b2.edges, a.crossings + b2.crossings, a.bond_vertices + b2.bond_vertices)


def compact(d: BondedDiagram) -> BondedDiagram:
    """Renumber edges and nodes consecutively from 0, preserving order."""
    emap = {e.id: i for i, e in enumerate(d.edges)}
    nodes = sorted(d.node_map)
    nmap = {n: i for i, n in enumerate(nodes)}

    def rr(r: Ref) -> Ref:
        return Ref(emap[r.edge], r.out)

    return BondedDiagram(
        tuple(Edge(emap[e.id], e.kind, e.half_twists) for e in d.edges),
        tuple(Crossing(nmap[c.id], tuple(map(rr, c.incident))) for c in d.crossings),
        tuple(BondVertex(nmap[v.id], tuple(map(rr, v.incident))) for v in d.bond_vertices),
    )


# ---------------------------------------------------------------------------
# faces and canonical form


def faces(d: BondedDiagram) -> list[list[tuple[int, int]]]:
    """Faces as cycles of darts ``(node, slot)``; each face lies left of its darts."""
    seen: set[tuple[int, int]] = set()
    out = []
    for nid, refs in sorted(d.node_map.items()):
        for s in range(len(refs)):
            if (nid, s) in seen:
                continue
            face = []
            dart = (nid, s)
            while dart not in seen:
                seen.add(dart)
                face.append(dart)
                n2, s2 = d.other_end(*dart)
                dart = (n2, (s2 - 1) % len(d.node_map[n2]))
            out.append(face)
    return out


def euler_ok(d: BondedDiagram) -> bool:
    """True iff every connected component is a genus-zero map (V - E + F = 2)."""
    fs = faces(d)
    face_of = {dart: i for i, f in enumerate(fs) for dart in f}
    for nodes, edges in _components(d):
        if not nodes:
            continue
        n_faces = len({face_of[(n, s)] for n in nodes for s in range(len(d.node_map[n]))})
        if len(nodes) - len(edges) + n_faces != 2:
            return False
    return True


def _component_code(d: BondedDiagram, nodes: set[int]) -> tuple:
    kinds = d.edge_map
    best = None
    for root in sorted(nodes):
        for rs in range(len(d.node_map[root])):
            order = {root: 0}
            base = {root: rs}
            queue = [root]
            code: list = []
            i = 0
            while i < len(queue):
                n = queue[i]
                i += 1
                refs = d.node_map[n]
                deg = len(refs)
                code.append(("x" if deg == 4 else "v", base[n]))
                for k in range(deg):
                    s = (base[n] + k) % deg
                    r = refs[s]
                    e = kinds[r.edge]
                    n2, s2 = d.other_end(n, s)
                    if n2 not in order:
                        order[n2] = len(order)
                        base[n2] = s2
                        queue.append(n2)
                    deg2 = len(d.node_map[n2])
                    code.append(
                        (order[n2], (s2 - base[n2]) % deg2, e.kind == BOND, e.half_twists, r.out)
                    )
            t = tuple(code)
            if best is None or t < best:
                best = t
    return best


def canonical_key(d: BondedDiagram) -> bytes:
    """Byte string equal for diagrams that differ only by edge/node relabeling."""
    comps = []
    loops = []
    for nodes, edges in _components(d):
        if nodes:
            comps.append(_component_code(d, nodes))
        else:
            (eid,) = edges
            loops.append(d.edge_map[eid].half_twists)
    key = (tuple(sorted(comps)), tuple(sorted(loops)))
    return repr(key).encode()
