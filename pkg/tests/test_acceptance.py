"""Acceptance criteria 1-10.  Each test records a PASS/FAIL line (see conftest)."""

from __future__ import annotations

import json
import math
import random
import time

import sympy as sp

from bondedkb import engine
from bondedkb.build import double_bonded_circles, handcuff, handcuff_sum, theta, theta_sum, unknot
from bondedkb.diagram import parse_diagram, serialize_diagram, validate, writhe
from bondedkb.engine import (
    EvaluationOptions,
    classical_bracket,
    evaluate_framed,
    evaluate_topological,
    normalized_value,
    reduced_polynomial,
)
from bondedkb.ingest import ProjectionConfig, close_chain, parse_structure_json, project
from bondedkb.laurent import SkeinValue, subst_topological
from bondedkb.moves import ISOTOPY_MOVES, apply_move, find_sites, random_moves

from corpus import bondless, chain_edges, desk_scale, small_bonded
from oracles import (
    DATA,
    DELTA,
    MU,
    A,
    H,
    T,
    bivariate_expr,
    brute_bracket,
    laurent_expr,
    record,
    same,
    skein_expr,
)

NO_SHORTCUT = EvaluationOptions(use_connected_sum_shortcut=False)


def trtx():
    return parse_diagram((DATA / "trtx.json").read_text())


# -- 1 -------------------------------------------------------------------------


def test_criterion_1_generators():
    t0 = time.perf_counter()
    ok = (
        evaluate_framed(theta()).value == SkeinValue.theta()
        and evaluate_framed(handcuff()).value == SkeinValue.handcuff()
        and evaluate_framed(theta(), NO_SHORTCUT).value == SkeinValue.theta()
        and evaluate_framed(handcuff(), NO_SHORTCUT).value == SkeinValue.handcuff()
        and same(evaluate_topological(handcuff()).value, DELTA * T)
        and same(evaluate_topological(theta()).value, T)
    )
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 1.0
    record(1, "theta and handcuff are fixed points; topological H = delta*Theta", ok, f"{elapsed:.3f}s")
    assert ok


# -- 2 -------------------------------------------------------------------------


def test_criterion_2_connected_sum():
    diagrams = small_bonded(60)
    rng = random.Random(2)
    bad = 0
    for d in diagrams:
        base = skein_expr(evaluate_framed(d, NO_SHORTCUT).value)
        e = rng.choice(chain_edges(d))
        for summed, gen in ((theta_sum(d, e, rng.random() < 0.5), T), (handcuff_sum(d, e, rng.random() < 0.5), H)):
            assert not validate(summed)
            for opts in (NO_SHORTCUT, EvaluationOptions()):
                if not same(evaluate_framed(summed, opts).value, gen * base / DELTA):
                    bad += 1
    record(2, "Theta#L and H#L equal (1/delta)*generator*L", bad == 0, f"{len(diagrams)} diagrams, {bad} mismatches")
    assert bad == 0


# -- 3 -------------------------------------------------------------------------


def test_criterion_3_two_bonds():
    expected = T**2 / MU - 2 * H * T / (DELTA * MU) + H**2 / MU
    d = double_bonded_circles()
    ok = d.bond_count == 2 and all(
        same(evaluate_framed(d, o).value, expected) for o in (EvaluationOptions(), NO_SHORTCUT)
    )
    record(3, "two circles joined by two bonds", ok)
    assert ok


# -- 4 -------------------------------------------------------------------------

DISPLAYED = (
    (A**12 + A**8 + 2 * A**4 + 1) * T**3
    + (-(A**18) + A**14 + A**10 + 2 * A**6 + 3 * A**2) * T**2 * H
    + (-(A**20) - A**16 + A**12 - A**8 + 2 * A**4) * T * H**2
    + (-(A**18) - A**10) * H**3
)


def test_criterion_4_trtx_golden():
    d = trtx()
    assert not validate(d) and d.bond_count == 3
    reduced = reduced_polynomial(d)
    term_for_term = sp.Poly(bivariate_expr(reduced) * A**40, A, T, H) == sp.Poly(sp.expand(DISPLAYED * A**40), A, T, H)
    top = evaluate_topological(d).value
    top_ok = same(top, A**4 / (1 + A**4) ** 2 * T**3)
    cross = subst_topological(evaluate_framed(d).value) == top
    ok = term_for_term and top_ok and cross and writhe(d) == 0
    record(4, "TRTX reduced polynomial and topological value", ok,
           f"reduced={term_for_term} topological={top_ok} cross-mode={cross}")
    assert ok


# -- 5 -------------------------------------------------------------------------


def test_criterion_5_classical():
    corpus = bondless(5)
    bad = [i for i, d in enumerate(corpus) if sp.expand(laurent_expr(classical_bracket(d)) - brute_bracket(d)) != 0]
    unknot_ok = laurent_expr(classical_bracket(unknot())) == 1
    ok = not bad and unknot_ok
    record(5, "classical bracket equals the brute-force state sum", ok, f"{len(corpus)} diagrams, unknot={unknot_ok}")
    assert ok


# -- 6 -------------------------------------------------------------------------


def _curl_factor(log) -> sp.Expr:
    k = 0
    for s in log:
        if s.move in ("I+", "I-"):
            k += (1 if s.move == "I+" else -1) * (-1 if s.inverse else 1)
    return (-(A**3)) ** k


def test_criterion_6_invariance():
    diagrams = small_bonded(100, max_crossings=5, start=1000)
    seen: dict[str, int] = {}
    iso_bad = curl_bad = norm_bad = single_bad = 0
    for i, d in enumerate(diagrams):
        v0 = evaluate_framed(d).value
        n0 = normalized_value(d)
        after = random_moves(d, 6, seed=i, moves=ISOTOPY_MOVES, max_crossings=9)
        for s in after.meta["moves"]:
            seen[s.move] = seen.get(s.move, 0) + 1
        iso_bad += evaluate_framed(after).value != v0
        norm_bad += normalized_value(after) != n0

        mixed = random_moves(d, 6, seed=10_000 + i, moves=ISOTOPY_MOVES + ("I+", "I-"), max_crossings=9)
        want = skein_expr(v0) * _curl_factor(mixed.meta["moves"])
        curl_bad += not same(evaluate_framed(mixed).value, want)
        norm_bad += normalized_value(mixed) != n0

        for m, factor in (("I+", -(A**3)), ("I-", -(A**-3))):
            site = next(s for s in find_sites(d, (m,), inverses=False) if s.variant == i % 2)
            single_bad += not same(evaluate_framed(apply_move(d, site)).value, factor * skein_expr(v0))
    covered = all(seen.get(m, 0) > 0 for m in ISOTOPY_MOVES)
    ok = not (iso_bad or curl_bad or norm_bad or single_bad) and covered
    record(6, "isotopy moves fix the framed value, I scales by -A^(+-3), normalized value invariant", ok,
           f"{len(diagrams)} sequences; moves seen {dict(sorted(seen.items()))}")
    assert ok


# -- 7 -------------------------------------------------------------------------


def test_criterion_7_determinism():
    diagrams = small_bonded(100, start=5000)
    variants = [EvaluationOptions(order_seed=s) for s in (1, 2, 3)] + [
        EvaluationOptions(parallel=True),
        EvaluationOptions(parallel=True, order_seed=7),
        EvaluationOptions(use_connected_sum_shortcut=False, order_seed=4),
        EvaluationOptions(memoize=False, order_seed=5),
    ]
    bad = 0
    for d in diagrams:
        ref = evaluate_framed(d).value.to_json()
        ref_top = evaluate_topological(d).value.to_json()
        for o in variants:
            bad += evaluate_framed(d, o).value.to_json() != ref
            bad += evaluate_topological(d, o).value.to_json() != ref_top
    ok = bad == 0
    record(7, "order permutations and parallel runs give byte-identical output", ok,
           f"{len(diagrams)} diagrams x {len(variants)} option sets")
    assert ok


# -- 8 -------------------------------------------------------------------------


def test_criterion_8_reduction():
    fixed = [theta(), handcuff(), double_bonded_circles(), trtx()]
    for name in ("theta.json", "h.json", "two_bonds.json"):
        fixed.append(parse_diagram((DATA / name).read_text()))
    model = close_chain(parse_structure_json((DATA / "trtx_model.json").read_text()))
    fixed += [project(model, ProjectionConfig(seed=s)) for s in range(5)]
    pool = fixed + small_bonded(120, start=9000) + [desk_scale(s) for s in range(5)]
    failures = []
    for i, d in enumerate(pool):
        try:
            reduced_polynomial(d)
        except engine.EngineError as exc:
            failures.append((i, str(exc)))
    ok = not failures
    record(8, "reduced polynomial has no residual denominator", ok, f"{len(pool)} diagrams")
    assert ok, failures[:3]


# -- 9 -------------------------------------------------------------------------


def _trefoil_points(n: int = 24):
    pts = []
    for k in range(n):
        t = 2 * math.pi * k / n
        pts.append([math.sin(t) + 2 * math.sin(2 * t), math.cos(t) - 2 * math.cos(2 * t), -math.sin(3 * t)])
    return pts


def _loop(n: int = 12, lift=None):
    lift = lift or {}
    return [[math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n), lift.get(k, 0.0)] for k in range(n)]


STRUCTURES = {
    "trivial loop": {"chains": [[[0, 0, 0], [1, 0, 0.1], [0.2, 1, -0.1]]], "bonds": []},
    "polygonal trefoil": {"chains": [_trefoil_points()], "bonds": []},
    "two-bond loop": {
        "chains": [_loop(12, {0: 0.6, 6: 0.6, 3: -0.6, 9: -0.6})],
        "bonds": [[0, 0, 0, 6], [0, 3, 0, 9]],
    },
    "bonded trefoil": {"chains": [_trefoil_points()], "bonds": [[0, 1, 0, 13]]},
}


def test_criterion_9_ingestion():
    notes = []
    ok = True
    for name, obj in STRUCTURES.items():
        s = close_chain(parse_structure_json(json.dumps(obj)))
        normalized, raw, writhes = set(), set(), set()
        for seed in range(10):
            d1 = project(s, ProjectionConfig(seed=seed))
            d2 = project(s, ProjectionConfig(seed=seed))
            ok &= serialize_diagram(d1) == serialize_diagram(d2) and not validate(d1)
            normalized.add(normalized_value(d1, "topological").to_json())
            raw.add(evaluate_topological(d1).value.to_json())
            writhes.add(writhe(d1))
        ok &= len(normalized) == 1
        notes.append(f"{name}: normalized values {len(normalized)}, raw values {len(raw)}, writhes {sorted(writhes)}")
    record(9, "projected topological value (writhe-normalized) is seed independent", ok, "; ".join(notes))
    assert ok


# -- 10 ------------------------------------------------------------------------


def test_criterion_10_performance():
    worst = 0.0
    for seed in range(5):
        d = desk_scale(seed)
        assert len(d.crossings) == 12 and d.bond_count == 3
        t0 = time.perf_counter()
        evaluate_framed(d, EvaluationOptions(memoize=True))
        worst = max(worst, time.perf_counter() - t0)
    ok = worst < 5.0
    record(10, "12-crossing 3-bond diagram evaluates in under 5 s", ok, f"slowest {worst:.3f}s")
    assert ok
