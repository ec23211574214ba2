from __future__ import annotations

import pytest

from bondedkb.build import handcuff, theta, trefoil
from bondedkb.diagram import canonical_key, euler_ok, serialize_diagram, validate, writhe
from bondedkb.engine import evaluate_framed
from bondedkb.moves import (
    ISOTOPY_MOVES,
    MOVES,
    MoveError,
    MoveSite,
    apply_move,
    bond_slide_steps,
    find_sites,
    random_moves,
)

from corpus import small_bonded


def _forward_sites(d, move):
    return [s for s in find_sites(d, (move,)) if not s.inverse]


def test_every_move_keeps_diagrams_valid_and_planar():
    for i, d in enumerate(small_bonded(30, max_crossings=4)):
        after = random_moves(d, 10, seed=i, moves=MOVES, max_crossings=8)
        assert validate(after) == []
        assert euler_ok(after)
        assert after.bond_count == d.bond_count


def test_forward_then_inverse_restores_the_diagram():
    """Each forward move is undone by some inverse site of the same family."""
    checked = 0
    for d in small_bonded(25, max_crossings=4):
        key = canonical_key(d)
        for move in ("I+", "I-", "II", "IV", "IV'", "V", "RV"):
            for site in _forward_sites(d, move)[:3]:
                try:
                    after = apply_move(d, site)
                except MoveError:
                    continue
                undo = [s for s in find_sites(after, (move,)) if s.inverse]
                assert any(canonical_key(apply_move(after, s)) == key for s in undo), (move, site)
                checked += 1
    assert checked > 100


def test_reidemeister_three_is_an_involution_up_to_relabeling():
    seen = 0
    for d in small_bonded(60, max_crossings=6):
        for site in find_sites(d, ("III",)):
            after = apply_move(d, site)
            back = [s for s in find_sites(after, ("III",))]
            assert any(canonical_key(apply_move(after, s)) == canonical_key(d) for s in back)
            seen += 1
    assert seen > 0


def test_writhe_changes_only_under_move_one():
    for i, d in enumerate(small_bonded(30)):
        w0 = writhe(d)
        after = random_moves(d, 8, seed=i, moves=ISOTOPY_MOVES, max_crossings=9)
        assert writhe(after) == w0
        for move, dw in (("I+", 1), ("I-", -1)):
            site = _forward_sites(d, move)[0]
            assert writhe(apply_move(d, site)) == w0 + dw


def test_bond_slide_equals_its_primitive_steps():
    compared = 0
    for i, d in enumerate(small_bonded(80)):
        moved = random_moves(d, 4, seed=i, moves=("II", "IV", "IV'"), max_crossings=8)
        for site in _forward_sites(moved, "bond_slide"):
            direct = apply_move(moved, site)
            stepped = moved
            for step in bond_slide_steps(moved, site.target[0], site.variant):
                stepped = apply_move(stepped, step)
            assert canonical_key(direct) == canonical_key(stepped)
            assert evaluate_framed(direct).value == evaluate_framed(moved).value
            compared += 1
    assert compared > 0


def test_random_moves_is_deterministic_and_logged():
    d = handcuff()
    a = random_moves(d, 12, seed=3)
    b = random_moves(d, 12, seed=3)
    assert serialize_diagram(a) == serialize_diagram(b)
    assert a.meta["moves"] == b.meta["moves"]
    assert all(isinstance(s, MoveSite) for s in a.meta["moves"])
    assert random_moves(d, 0, seed=3) == d


def test_bad_sites_raise():
    with pytest.raises(MoveError):
        apply_move(theta(), MoveSite("III", (0, 0)))
    with pytest.raises(MoveError):
        apply_move(trefoil(), MoveSite("II", (0, 0), inverse=True))
    with pytest.raises((MoveError, KeyError, ValueError)):
        apply_move(theta(), MoveSite("bogus", (0,)))


def test_move_one_only_on_chain_edges():
    d = theta()
    bond_edges = {e.id for e in d.edges if e.kind == "bond"}
    for s in find_sites(d, ("I+", "I-"), inverses=False):
        assert s.target[0] not in bond_edges
