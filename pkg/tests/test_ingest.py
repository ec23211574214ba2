from __future__ import annotations

import json
import math

import pytest

from bondedkb.diagram import ParseError, ValidationError, serialize_diagram, validate, writhe
from bondedkb.engine import classical_bracket, evaluate_framed, normalized_value
from bondedkb.ingest import (
    GenericityError,
    PolymerStructure,
    ProjectionConfig,
    close_chain,
    load_structure,
    parse_pdb,
    parse_structure_json,
    project,
)

from oracles import DATA, A, T, brute_bracket, laurent_expr, load_json, same


def atom(serial: int, chain: str, seq: int, xyz, name: str = "CA", alt: str = " ") -> str:
    x, y, z = xyz
    return f"ATOM  {serial:5d} {name:^4s}{alt}CYS {chain}{seq:4d}    {x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C"


def ssbond(c1: str, r1: int, c2: str, r2: int) -> str:
    return f"SSBOND   1 CYS {c1} {r1:4d}    CYS {c2} {r2:4d}"


def model_pdb(chain: str = "A") -> str:
    obj = load_json("trtx_model.json")
    lines = [ssbond(chain, ci_ri[1] + 1, chain, ci_ri[3] + 1) for ci_ri in obj["bonds"]]
    lines += [atom(i + 1, chain, i + 1, p) for i, p in enumerate(obj["chains"][0])]
    lines.append("END")
    return "\n".join(lines)


def test_pdb_matches_json_model():
    from_pdb = parse_pdb(model_pdb())
    from_json = parse_structure_json((DATA / "trtx_model.json").read_text())
    assert from_pdb == from_json
    assert from_pdb.residue_ids[0][:2] == ("A:1", "A:2")


def test_model_projects_to_the_golden_value():
    s = close_chain(parse_pdb(model_pdb()))
    target = A**4 / (1 + A**4) ** 2 * T**3
    for seed in range(4):
        d = project(s, ProjectionConfig(seed=seed))
        assert d.bond_count == 3 and not validate(d)
        assert same(normalized_value(d, "topological"), target)


def test_pdb_first_model_altloc_and_chain_filter():
    lines = [
        "MODEL        1",
        atom(1, "A", 1, (0, 0, 0)),
        atom(2, "A", 1, (9, 9, 9), alt="B"),
        atom(3, "A", 2, (1, 0, 0)),
        atom(4, "A", 2, (1, 0.5, 0), name="CB"),
        atom(5, "A", 3, (0, 1, 0.2)),
        atom(6, "B", 1, (5, 5, 5)),
        "ENDMDL",
        "MODEL        2",
        atom(7, "A", 4, (7, 7, 7)),
        "ENDMDL",
    ]
    s = parse_pdb("\n".join(lines))
    assert len(s.chains) == 2 and len(s.chains[0]) == 3
    assert s.chains[0][0] == (0.0, 0.0, 0.0)
    only_b = parse_pdb("\n".join(lines), chain="B")
    assert len(only_b.chains) == 1 and len(only_b.chains[0]) == 1


def test_pdb_errors_name_the_line():
    good = atom(1, "A", 1, (0, 0, 0))
    broken = good[:30] + "  x.yyy " + good[38:]
    with pytest.raises(ParseError, match="line 2"):
        parse_pdb("\n".join([good, broken]))
    with pytest.raises(ValidationError, match="line 1"):
        parse_pdb("\n".join([ssbond("A", 1, "A", 7), good]))
    with pytest.raises(ValidationError, match="no CA atoms"):
        parse_pdb("HEADER nothing here")


def test_json_structure_errors():
    with pytest.raises(ParseError, match="line 1"):
        parse_structure_json("{")
    with pytest.raises(ParseError):
        parse_structure_json(json.dumps({"chains": [[[0, 0]]]}))
    with pytest.raises(ValidationError, match="does not exist"):
        parse_structure_json(json.dumps({"chains": [[[0, 0, 0]]], "bonds": [[0, 0, 0, 5]]}))
    with pytest.raises(ValidationError, match="more than one bond"):
        parse_structure_json(json.dumps({"chains": [[[0, 0, 0], [1, 0, 0], [0, 1, 0]]],
                                         "bonds": [[0, 0, 0, 1], [0, 0, 0, 2]]}))


def test_load_structure_accepts_paths_and_text(tmp_path):
    p = tmp_path / "m.pdb"
    p.write_text(model_pdb())
    assert load_structure(str(p)) == load_structure(model_pdb(), fmt="pdb")
    assert load_structure(DATA / "trtx_model.json").bonds == ((0, 1, 0, 7), (0, 3, 0, 9), (0, 5, 0, 11))


def test_close_chain_drops_repeated_endpoint():
    s = PolymerStructure(((( 0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 0.0)),))
    c = close_chain(s)
    assert c.closed == (True,) and len(c.chains[0]) == 3


def test_project_needs_closed_chains():
    s = parse_structure_json(json.dumps({"chains": [[[0, 0, 0], [1, 0, 0], [0, 1, 0]]]}))
    with pytest.raises(ValidationError, match="close_chain"):
        project(s)


def test_projection_is_deterministic_per_seed():
    s = close_chain(parse_structure_json((DATA / "trtx_model.json").read_text()))
    for seed in range(3):
        assert serialize_diagram(project(s, ProjectionConfig(seed=seed))) == serialize_diagram(
            project(s, ProjectionConfig(seed=seed)))


def test_fixed_direction_gives_the_planar_picture():
    pts = [[math.cos(2 * math.pi * k / 8), math.sin(2 * math.pi * k / 8), 0.0] for k in range(8)]
    s = close_chain(parse_structure_json(json.dumps({"chains": [pts], "bonds": [[0, 0, 0, 4]]})))
    d = project(s, ProjectionConfig(direction=(0.0, 0.0, 1.0)))
    assert not d.crossings and d.bond_count == 1 and writhe(d) == 0
    assert evaluate_framed(d).value.terms == {(1, 0): evaluate_framed(d).value.coefficient(1, 0)}


def test_degenerate_structure_raises_genericity_error():
    s = close_chain(PolymerStructure((((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)),)))
    with pytest.raises(GenericityError):
        project(s, ProjectionConfig(seed=1, max_retries=3))


def test_config_guards():
    with pytest.raises(ValueError):
        ProjectionConfig(perturbation=0)
    with pytest.raises(ValueError):
        ProjectionConfig(max_retries=0)


def test_polygonal_trefoil_from_above():
    pts = []
    for k in range(24):
        t = 2 * math.pi * k / 24
        pts.append([math.sin(t) + 2 * math.sin(2 * t), math.cos(t) - 2 * math.cos(2 * t), -math.sin(3 * t)])
    s = close_chain(parse_structure_json(json.dumps({"chains": [pts]})))
    d = project(s, ProjectionConfig(direction=(0.0, 0.0, 1.0)))
    assert len(d.crossings) == 3 and abs(writhe(d)) == 3
    assert laurent_expr(classical_bracket(d)) - brute_bracket(d) == 0
