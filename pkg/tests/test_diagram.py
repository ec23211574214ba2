from __future__ import annotations

import json
import random
from collections import defaultdict

import networkx as nx
import pytest

from bondedkb.build import double_bonded_circles, handcuff, theta, trefoil, unknot
from bondedkb.diagram import (
    BondedDiagram,
    BondVertex,
    Crossing,
    Edge,
    ParseError,
    Ref,
    ValidationError,
    canonical_key,
    crossing_sign,
    disjoint_union,
    euler_ok,
    parse_diagram,
    serialize_diagram,
    split_components,
    validate,
    writhe,
)

from corpus import bondless, small_bonded
from oracles import DATA


def shuffled(d: BondedDiagram, seed: int) -> BondedDiagram:
    """Rename every edge and node and reorder the element lists."""
    rng = random.Random(seed)
    eids = [e.id for e in d.edges]
    nids = [c.id for c in d.crossings] + [v.id for v in d.bond_vertices]
    enew = dict(zip(eids, rng.sample(range(100, 100 + 3 * len(eids) + 1), len(eids))))
    nnew = dict(zip(nids, rng.sample(range(500, 500 + 3 * len(nids) + 1), len(nids))))

    def ref(r: Ref) -> Ref:
        return Ref(enew[r.edge], r.out)

    edges = [Edge(enew[e.id], e.kind, e.half_twists) for e in d.edges]
    xs = [Crossing(nnew[c.id], tuple(map(ref, c.incident))) for c in d.crossings]
    vs = [BondVertex(nnew[v.id], tuple(map(ref, v.incident))) for v in d.bond_vertices]
    for seq in (edges, xs, vs):
        rng.shuffle(seq)
    return BondedDiagram(tuple(edges), tuple(xs), tuple(vs))


def slot_graph(d: BondedDiagram) -> nx.DiGraph:
    """Slot-level graph: one vertex per (node, slot), labelled so that an isomorphism is
    exactly a relabeling of edges and nodes."""
    g = nx.DiGraph()
    ends = {}
    for nid, refs in [(c.id, c.incident) for c in d.crossings] + [(v.id, v.incident) for v in d.bond_vertices]:
        g.add_node(("n", nid), label=("x" if len(refs) == 4 else "v"))
        for s, r in enumerate(refs):
            g.add_node((nid, s), label=s)
            g.add_edge(("n", nid), (nid, s), label="slot")
            ends[(r.edge, r.out)] = (nid, s)
    for e in d.edges:
        if (e.id, True) in ends:
            g.add_edge(ends[(e.id, True)], ends[(e.id, False)], label=(e.kind, e.half_twists))
        else:
            g.add_node(("loop", e.id), label=("loop", e.half_twists))
    return g


def isomorphic(a: BondedDiagram, b: BondedDiagram) -> bool:
    match = lambda x, y: x["label"] == y["label"]  # noqa: E731
    return nx.is_isomorphic(slot_graph(a), slot_graph(b), node_match=match, edge_match=match)


@pytest.mark.parametrize("name", ["theta.json", "h.json", "two_bonds.json", "trtx.json"])
def test_files_round_trip(name):
    text = (DATA / name).read_text()
    d = parse_diagram(text)
    assert parse_diagram(serialize_diagram(d)) == d
    assert serialize_diagram(parse_diagram(serialize_diagram(d))) == serialize_diagram(d)


def test_builders_are_valid():
    for d in [unknot(), theta(), handcuff(), double_bonded_circles(), trefoil(), trefoil(False)]:
        assert validate(d) == []
        assert euler_ok(d)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError, match="line 1"):
        parse_diagram("{nope")
    with pytest.raises(ParseError):
        parse_diagram(json.dumps({"edges": [{"id": 0}], "crossings": [{"id": 1, "incident": [{"edge": 0}]}]}))


def _obj(d):
    return json.loads(serialize_diagram(d))


def test_validation_rejects_dangling_edge():
    obj = _obj(theta())
    obj["edges"].append({"id": 99, "kind": "bond", "half_twists": 0})
    with pytest.raises(ValidationError, match="closed bond loop"):
        parse_diagram(json.dumps(obj))


def test_validation_rejects_bond_with_twists():
    obj = _obj(theta())
    for e in obj["edges"]:
        if e["kind"] == "bond":
            e["half_twists"] = 1
    with pytest.raises(ValidationError, match="blackboard"):
        parse_diagram(json.dumps(obj))


def test_validation_rejects_wrong_orientation_claim():
    obj = _obj(theta())
    (k, v), = obj["bond_orientations"].items()
    obj["bond_orientations"] = {k: v[::-1]}
    with pytest.raises(ValidationError, match="bond_orientations"):
        parse_diagram(json.dumps(obj))


def test_validation_rejects_bad_crossing_and_vertex():
    d = trefoil()
    c = d.crossings[0]
    bad = BondedDiagram(d.edges, (Crossing(c.id, c.incident[1:] + c.incident[:1]),) + d.crossings[1:], ())
    assert any("slot 0" in v for v in validate(bad))
    t = theta()
    v = t.bond_vertices[0]
    rotated = BondVertex(v.id, v.incident[1:] + v.incident[:1])
    assert any("listed first" in m for m in validate(BondedDiagram(t.edges, (), (rotated, t.bond_vertices[1]))))
    dup = BondedDiagram(t.edges + (t.edges[0],), (), t.bond_vertices)
    assert "duplicate edge ids" in validate(dup)


def test_writhe_and_signs():
    assert writhe(trefoil()) == 3 and writhe(trefoil(False)) == -3
    assert {crossing_sign(c) for c in trefoil().crossings} == {1}
    assert writhe(unknot()) == 0


def test_split_and_union():
    d = disjoint_union(trefoil(), handcuff())
    parts = split_components(d)
    assert sorted(len(p.crossings) for p in parts) == [0, 3]
    assert sum(p.bond_count for p in parts) == 1


def test_canonical_key_ignores_labels():
    for i, d in enumerate(small_bonded(40) + bondless(3)[:40]):
        assert canonical_key(shuffled(d, i)) == canonical_key(d)
        assert isomorphic(shuffled(d, i), d)


def test_canonical_key_has_no_collisions():
    """Bucket a corpus of small diagrams (at most four crossings and two bonds) by key;
    every bucket must hold one isomorphism class and distinct buckets must differ."""
    corpus = [d for d in bondless(4) if len(d.crossings) <= 4]
    corpus += [d for d in small_bonded(200, max_crossings=4) if len(d.crossings) <= 4]
    corpus += [shuffled(d, i) for i, d in enumerate(corpus[::7])]
    buckets: dict[bytes, list] = defaultdict(list)
    for d in corpus:
        buckets[canonical_key(d)].append(d)
    for group in buckets.values():
        assert all(isomorphic(group[0], other) for other in group[1:])
    by_shape: dict[tuple, list] = defaultdict(list)
    for key, group in buckets.items():
        d = group[0]
        by_shape[(len(d.edges), len(d.crossings), len(d.bond_vertices))].append(d)
    for reps in by_shape.values():
        for i, a in enumerate(reps):
            for b in reps[i + 1:]:
                assert not isomorphic(a, b)
